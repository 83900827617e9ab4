//! Query access to Boolean functions with exact query accounting.
//!
//! An [`Oracle`] wraps a compiled evaluator behind a shared atomic query
//! counter. Restrictions produce child oracles that keep the full ambient
//! dimension (restricted coordinates are overridden on every query, so
//! coordinate identity is stable) and forward their queries to the same
//! counter. Each restriction frame caches its two extremal queries so the
//! monotone constant test costs at most 2 queries per frame no matter how
//! often the loop condition is re-checked.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};

use crossbeam_utils::CachePadded;
use serde::{Deserialize, Serialize};

use crate::bits::{words_for, BitString};
use crate::error::{Error, Result};
use crate::functions::{lanes_mask, Evaluator, FunctionSpec, OverridePlanes, PlaneAccess};

const COUNTER_STRIPES: usize = 8;

/// Exact, concurrency-safe query counter.
///
/// Striped to keep hot parallel sampling loops off a single cache line;
/// the total is exact because every stripe add is atomic.
#[derive(Debug, Default)]
pub struct QueryCounter {
    stripes: [CachePadded<AtomicU64>; COUNTER_STRIPES],
}

impl QueryCounter {
    pub fn add(&self, k: u64) {
        let s = current_stripe();
        self.stripes[s].fetch_add(k, Ordering::Relaxed);
    }

    pub fn total(&self) -> u64 {
        self.stripes.iter().map(|s| s.load(Ordering::Relaxed)).sum()
    }
}

#[cfg(feature = "parallel")]
fn current_stripe() -> usize {
    rayon::current_thread_index().unwrap_or(0) % COUNTER_STRIPES
}

#[cfg(not(feature = "parallel"))]
fn current_stripe() -> usize {
    0
}

/// A partial assignment of coordinates, `coordinate -> bit`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Restriction {
    assignments: BTreeMap<u32, bool>,
}

impl Restriction {
    pub fn new(assignments: impl IntoIterator<Item = (u32, bool)>) -> Self {
        Restriction { assignments: assignments.into_iter().collect() }
    }

    pub fn single(i: u32, b: bool) -> Self {
        Restriction { assignments: BTreeMap::from([(i, b)]) }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, bool)> + '_ {
        self.assignments.iter().map(|(&i, &b)| (i, b))
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }
}

/// Counted query access to `f: {0,1}^n -> {0,1}`.
#[derive(Clone)]
pub struct Oracle {
    eval: Arc<Evaluator>,
    counter: Arc<QueryCounter>,
    n: usize,
    monotone_declared: bool,
    fixed: Vec<u64>,
    fixed_values: Vec<u64>,
    fixed_count: usize,
    extremal_cache: [Arc<OnceLock<bool>>; 2],
}

/// Build a counted oracle from a spec. The oracle starts with
/// `query_count() == 0` and is declared monotone iff the family is
/// monotone by construction.
pub fn build_function(spec: &FunctionSpec) -> Result<Oracle> {
    let eval = spec.compile()?;
    Ok(Oracle::new(eval, spec.structurally_monotone()))
}

impl Oracle {
    pub fn new(eval: Evaluator, monotone_declared: bool) -> Self {
        let n = eval.dimension();
        Oracle {
            eval: Arc::new(eval),
            counter: Arc::new(QueryCounter::default()),
            n,
            monotone_declared,
            fixed: vec![0; words_for(n)],
            fixed_values: vec![0; words_for(n)],
            fixed_count: 0,
            extremal_cache: [Arc::new(OnceLock::new()), Arc::new(OnceLock::new())],
        }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn is_monotone_declared(&self) -> bool {
        self.monotone_declared
    }

    /// Declare the function monotone, e.g. for a truth table that passed
    /// [`Oracle::check_monotone_exhaustive`]. The caller vouches for it.
    pub fn declare_monotone(mut self) -> Self {
        self.monotone_declared = true;
        self
    }

    pub fn query_count(&self) -> u64 {
        self.counter.total()
    }

    /// Evaluate `f` at `x`, counting one query. Restricted coordinates are
    /// overridden regardless of what `x` carries there.
    pub fn query(&self, x: &BitString) -> bool {
        debug_assert_eq!(x.len(), self.n);
        self.counter.add(1);
        if self.fixed_count == 0 {
            return self.eval.eval(x);
        }
        let mut y = x.clone();
        for (w, word) in y.words_mut().iter_mut().enumerate() {
            *word = (*word & !self.fixed[w]) | (self.fixed_values[w] & self.fixed[w]);
        }
        self.eval.eval(&y)
    }

    /// Evaluate `lanes` samples presented as coordinate planes, counting
    /// `lanes` queries. Bits above `lanes` in the result are zero.
    pub fn query_block(&self, planes: &mut dyn PlaneAccess, lanes: u32) -> u64 {
        debug_assert!(lanes >= 1 && lanes <= 64);
        self.counter.add(lanes as u64);
        let out = if self.fixed_count == 0 {
            self.eval.eval_block(planes)
        } else {
            let mut overlaid = OverridePlanes {
                inner: planes,
                fixed: &self.fixed,
                values: &self.fixed_values,
            };
            self.eval.eval_block(&mut overlaid)
        };
        out & lanes_mask(lanes)
    }

    /// Restrict coordinates. The child keeps dimension `n`, forwards its
    /// queries to the shared counter, and starts a fresh extremal cache.
    /// Re-fixing an already-fixed coordinate gives the new value priority.
    pub fn restrict(&self, r: &Restriction) -> Result<Oracle> {
        let mut child = self.clone();
        child.extremal_cache = [Arc::new(OnceLock::new()), Arc::new(OnceLock::new())];
        for (i, b) in r.iter() {
            if i < 1 || i as usize > self.n {
                return Err(Error::InvalidParam(format!(
                    "restriction coordinate {i} outside [1, {}]",
                    self.n
                )));
            }
            let j = (i - 1) as usize;
            let (w, bit) = (j / 64, 1u64 << (j % 64));
            if child.fixed[w] & bit == 0 {
                child.fixed_count += 1;
            }
            child.fixed[w] |= bit;
            if b {
                child.fixed_values[w] |= bit;
            } else {
                child.fixed_values[w] &= !bit;
            }
        }
        Ok(child)
    }

    pub fn is_fixed(&self, i: u32) -> bool {
        let j = (i - 1) as usize;
        (self.fixed[j / 64] >> (j % 64)) & 1 == 1
    }

    pub fn fixed_count(&self) -> usize {
        self.fixed_count
    }

    /// Free (unrestricted) coordinates of this frame.
    pub fn free_coords(&self) -> impl Iterator<Item = u32> + '_ {
        (1..=self.n as u32).filter(move |&i| !self.is_fixed(i))
    }

    /// Query the all-`b` extension of this frame, cached per frame.
    fn extremal(&self, b: bool) -> bool {
        *self.extremal_cache[b as usize]
            .get_or_init(|| self.query(&BitString::constant(self.n, b)))
    }

    /// Constant test for monotone functions: `f` is constant iff
    /// `f(0^n) = f(1^n)`. Costs 2 queries on first use per frame and 0
    /// thereafter. Returns the constant value, or `None` if nonconstant.
    pub fn test_constant_monotone(&self) -> Result<Option<bool>> {
        if !self.monotone_declared {
            return Err(Error::NotMonotone);
        }
        let f0 = self.extremal(false);
        let f1 = self.extremal(true);
        Ok((f0 == f1).then_some(f0))
    }

    /// One-query certificate verification for monotone functions.
    ///
    /// For claimed value 1 the extremal completion fills 0s outside `S`,
    /// so every completion dominates it; symmetrically for claimed 0. This
    /// is sound and complete for monotone `f`.
    pub fn verify_certificate(&self, cert: &Certificate) -> Result<bool> {
        if !self.monotone_declared {
            return Err(Error::NotMonotone);
        }
        let z = cert.extremal_point(self.n);
        Ok(self.query(&z) == cert.claimed_value())
    }

    /// Exhaustively check monotonicity over every single-bit-raise edge.
    /// Counts `2^n` queries; requires `n <= 24`.
    pub fn check_monotone_exhaustive(&self) -> Result<bool> {
        if self.n > 24 {
            return Err(Error::DimensionTooLarge { n: self.n, max: 24 });
        }
        let size = 1u64 << self.n;
        let mut values = vec![false; size as usize];
        for idx in 0..size {
            values[idx as usize] = self.query(&BitString::from_index_msb(idx, self.n));
        }
        for idx in 0..size {
            if !values[idx as usize] {
                continue;
            }
            // f(x)=1: every y >= x must also be 1; check raised neighbors
            for c in 0..self.n {
                let above = idx | (1 << c);
                if above != idx && !values[above as usize] {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

impl std::fmt::Debug for Oracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Oracle")
            .field("n", &self.n)
            .field("monotone_declared", &self.monotone_declared)
            .field("fixed_count", &self.fixed_count)
            .field("queries", &self.query_count())
            .finish()
    }
}

/// A certificate: coordinates with pinned values, plus the claimed value of
/// `f` on every input agreeing with them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    values: BTreeMap<u32, bool>,
    claimed_value: bool,
}

impl Certificate {
    pub fn new(values: impl IntoIterator<Item = (u32, bool)>, claimed_value: bool) -> Self {
        Certificate { values: values.into_iter().collect(), claimed_value }
    }

    /// Certificate pinning `coords` to the corresponding bits of `x`.
    pub fn from_input(coords: &BTreeSet<u32>, x: &BitString, claimed_value: bool) -> Self {
        Certificate {
            values: coords.iter().map(|&i| (i, x.get(i))).collect(),
            claimed_value,
        }
    }

    pub fn coords(&self) -> impl Iterator<Item = u32> + '_ {
        self.values.keys().copied()
    }

    pub fn coord_set(&self) -> BTreeSet<u32> {
        self.values.keys().copied().collect()
    }

    pub fn values(&self) -> &BTreeMap<u32, bool> {
        &self.values
    }

    pub fn claimed_value(&self) -> bool {
        self.claimed_value
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The extremal completion: pinned values on `S`, the non-claimed bit
    /// everywhere else.
    pub fn extremal_point(&self, n: usize) -> BitString {
        let mut z = BitString::constant(n, !self.claimed_value);
        for (&i, &b) in &self.values {
            z.set(i, b);
        }
        z
    }

    /// Exhaustive validity check, enumerating all completions. Test and
    /// small-n use only.
    pub fn valid_exhaustive(&self, oracle: &Oracle) -> Result<bool> {
        let n = oracle.dimension();
        if n > 24 {
            return Err(Error::DimensionTooLarge { n, max: 24 });
        }
        let free: Vec<u32> = (1..=n as u32)
            .filter(|i| !self.values.contains_key(i))
            .collect();
        let mut x = BitString::zeros(n);
        for (&i, &b) in &self.values {
            x.set(i, b);
        }
        for combo in 0..(1u64 << free.len()) {
            for (j, &i) in free.iter().enumerate() {
                x.set(i, (combo >> j) & 1 == 1);
            }
            if oracle.query(&x) != self.claimed_value {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
