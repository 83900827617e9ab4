//! Query-efficient certification of monotone Boolean functions.
//!
//! Given query access to a monotone `f: {0,1}^n -> {0,1}` with certificate
//! complexity at most `k` and an input `x*`, this crate finds a size-`<= k`
//! certificate for `f`'s value on `x*` using a number of queries that grows
//! only logarithmically in `n`. The pipeline tracks the critical probability
//! of `f` under p-biased sampling, repeatedly restricts the most influential
//! coordinate, and trims the accumulated set down to a prime implicant.
//!
//! The crate also ships exact brute-force oracles for every estimated
//! quantity (for small `n`), a random-examples certifier for arbitrary
//! functions, adversarial experiment harnesses for the known lower bounds,
//! and a CLI exposing all of it.
//!
//! Estimator inner loops are data-parallel via rayon when the default
//! `parallel` feature is on; disable default features for a fully
//! sequential build. Either way, output for a fixed seed is identical
//! regardless of worker count, because every sample is drawn from its own
//! addressable ChaCha substream and aggregation is exact integer counting.

pub mod bits;
pub mod certify;
pub mod cli;
pub mod error;
pub mod exact;
pub mod exec;
pub mod experiments;
pub mod functions;
pub mod learners;
pub mod oracle;
pub mod pbias;
pub mod rng;

pub use bits::BitString;
pub use error::{Error, Result};
pub use functions::FunctionSpec;
pub use oracle::{build_function, Certificate, Oracle, Restriction};
pub use rng::SeedStream;
