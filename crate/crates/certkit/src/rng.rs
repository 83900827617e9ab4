//! Seeded randomness with addressable substreams.
//!
//! All randomness in the library flows from a single 64-bit seed. A
//! [`SeedStream`] expands the seed into a ChaCha8 key and hands out
//! numbered substreams via ChaCha's independent-stream facility, so the
//! same seed produces the same draws no matter how work is scheduled
//! across threads. Estimators address their substreams as
//! `(call nonce, block, coordinate)`; every sampling call first allocates
//! a fresh nonce, so no two calls ever share a stream.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const NONCE_BITS: u32 = 24;
const BLOCK_BITS: u32 = 24;
const COORD_BITS: u32 = 16;

/// Hands out reproducible, independent random substreams.
#[derive(Clone, Debug)]
pub struct SeedStream {
    key: [u8; 32],
    next_nonce: u64,
}

impl SeedStream {
    pub fn from_seed(seed: u64) -> Self {
        let mut boot = ChaCha8Rng::seed_from_u64(seed);
        let mut key = [0u8; 32];
        boot.fill_bytes(&mut key);
        SeedStream { key, next_nonce: 0 }
    }

    /// Reserve a nonce for one sampling call.
    pub fn alloc_nonce(&mut self) -> u64 {
        let nonce = self.next_nonce;
        self.next_nonce += 1;
        assert!(nonce < 1 << NONCE_BITS, "substream nonce space exhausted");
        nonce
    }

    /// An independent child generator, e.g. one per experiment trial.
    pub fn fork(&mut self) -> SeedStream {
        let nonce = self.alloc_nonce();
        let mut rng = self.stream_rng(nonce, 0, 0);
        let mut key = [0u8; 32];
        rng.fill_bytes(&mut key);
        SeedStream { key, next_nonce: 0 }
    }

    /// A plain RNG bound to `(nonce, block, coord)`.
    pub(crate) fn stream_rng(&self, nonce: u64, block: u64, coord: u64) -> ChaCha8Rng {
        debug_assert!(block < 1 << BLOCK_BITS);
        debug_assert!(coord < 1 << COORD_BITS);
        let id = (nonce << (BLOCK_BITS + COORD_BITS)) | (block << COORD_BITS) | coord;
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(id);
        rng
    }

    /// A general-purpose RNG for one call site (instance generation etc.).
    pub fn general_rng(&mut self) -> ChaCha8Rng {
        let nonce = self.alloc_nonce();
        self.stream_rng(nonce, 0, 0)
    }

    /// Snapshot a copyable handle for one sampling call. The handle owns a
    /// fresh nonce, so all `(block, coord)` streams under it are disjoint
    /// from every other call's.
    pub(crate) fn handle(&mut self) -> StreamHandle {
        StreamHandle { key: self.key, nonce: self.alloc_nonce() }
    }

    pub(crate) fn key(&self) -> &[u8; 32] {
        &self.key
    }
}

/// Copyable address of one sampling call's substream family.
#[derive(Clone, Copy, Debug)]
pub(crate) struct StreamHandle {
    key: [u8; 32],
    nonce: u64,
}

impl StreamHandle {
    pub(crate) fn rng(&self, block: u64, coord: u64) -> ChaCha8Rng {
        debug_assert!(block < 1 << BLOCK_BITS);
        debug_assert!(coord < 1 << COORD_BITS);
        let id = (self.nonce << (BLOCK_BITS + COORD_BITS)) | (block << COORD_BITS) | coord;
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(id);
        rng
    }
}

/// Fixed-point acceptance threshold for exact Bernoulli(p) draws from u64s.
///
/// A bit is 1 iff a uniform `u64` is strictly below the threshold, so the
/// realized probability is `t / 2^64`, within half an ulp of the requested
/// `p`. The same threshold drives both the scalar and the 64-lane samplers,
/// keeping their distributions identical.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Threshold {
    Never,
    Always,
    Level(u64),
}

impl Threshold {
    pub fn for_probability(p: f64) -> Result<Threshold> {
        if !(0.0..=1.0).contains(&p) || p.is_nan() {
            return Err(Error::InvalidParam(format!(
                "probability {p} outside [0,1]"
            )));
        }
        if p <= 0.0 {
            return Ok(Threshold::Never);
        }
        if p >= 1.0 {
            return Ok(Threshold::Always);
        }
        let scaled = p * (u64::MAX as f64 + 1.0);
        if scaled >= u64::MAX as f64 + 1.0 {
            return Ok(Threshold::Always);
        }
        let t = scaled as u64;
        if t == 0 {
            return Ok(Threshold::Never);
        }
        Ok(Threshold::Level(t))
    }

    pub fn draw(self, rng: &mut ChaCha8Rng) -> bool {
        match self {
            Threshold::Never => false,
            Threshold::Always => true,
            Threshold::Level(t) => rng.next_u64() < t,
        }
    }
}

/// Draw 64 independent Bernoulli(threshold) bits as one word.
///
/// Compares 64 lane-parallel uniform u64s against the threshold one bit
/// level at a time, most significant first, retiring lanes as soon as they
/// differ from the threshold prefix. The expected number of `u64` draws is
/// about `log2(64) + 2` regardless of the threshold.
pub(crate) fn pbiased_word(rng: &mut ChaCha8Rng, threshold: Threshold) -> u64 {
    let t = match threshold {
        Threshold::Never => return 0,
        Threshold::Always => return !0,
        Threshold::Level(t) => t,
    };
    let mut undecided = !0u64; // lanes whose draw still equals the threshold prefix
    let mut below = 0u64; // lanes already known to be strictly below
    for level in (0..64).rev() {
        let r = rng.next_u64();
        if (t >> level) & 1 == 1 {
            below |= undecided & !r;
            undecided &= r;
        } else {
            undecided &= !r;
        }
        if undecided == 0 {
            break;
        }
    }
    // lanes still undecided drew exactly t, which is not < t
    below
}
