//! p-biased sampling and the three estimation subroutines: expectation
//! estimation, approximate critical-probability search, and shared-sample
//! influence estimation.
//!
//! Sample counts come from the Hoeffding bound,
//! `m(eps, delta) = ceil(ln(2/delta) / (2 eps^2))`, so every routine's
//! query spend is a closed-form function of its parameters; the
//! `*_query_count` functions return those forms and tests hold the
//! implementations to them exactly.
//!
//! Sampling is blocked in groups of 64: each (call, block, coordinate)
//! triple owns a ChaCha substream, and 64 samples' worth of one coordinate
//! are drawn as a single word. Blocks fold in parallel into integer
//! counts, so results are identical for every worker count, and a
//! coordinate plane never depends on which other planes were generated.

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::exec;
use crate::functions::{lanes_mask, PlaneAccess};
use crate::oracle::Oracle;
use crate::rng::{pbiased_word, SeedStream, StreamHandle, Threshold};

/// A probability in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Probability> {
        if !(0.0..=1.0).contains(&value) || value.is_nan() {
            return Err(Error::InvalidParam(format!(
                "probability {value} outside [0,1]"
            )));
        }
        Ok(Probability(value))
    }

    pub const HALF: Probability = Probability(0.5);

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Accuracy / confidence pair with its derived Hoeffding sample count.
#[derive(Clone, Copy, Debug)]
pub struct EstimationParams {
    eps: f64,
    delta: f64,
    sample_count: u64,
}

impl EstimationParams {
    pub fn new(eps: f64, delta: f64) -> Result<EstimationParams> {
        if !(eps > 0.0) || eps.is_nan() {
            return Err(Error::InvalidParam(format!("accuracy eps={eps} must be > 0")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParam(format!(
                "confidence delta={delta} must lie in (0,1)"
            )));
        }
        Ok(EstimationParams {
            eps,
            delta,
            sample_count: hoeffding_samples(eps, delta),
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn sample_count(&self) -> u64 {
        self.sample_count
    }
}

/// `m(eps, delta) = ceil(ln(2/delta) / (2 eps^2))`, at least 1.
pub fn hoeffding_samples(eps: f64, delta: f64) -> u64 {
    let raw = ((2.0 / delta).ln() / (2.0 * eps * eps)).ceil();
    (raw as u64).max(1)
}

/// Draw one sample of `{0,1}_p^n`; each coordinate is independently 1 with
/// probability `p`. Every call draws from its own substream.
pub fn sample_pbiased(n: usize, p: Probability, rng: &mut SeedStream) -> BitString {
    let threshold = Threshold::for_probability(p.value()).expect("checked probability");
    let handle = rng.handle();
    let mut source = handle.rng(0, 0);
    let mut x = BitString::zeros(n);
    let words = x.words_mut();
    for word in words.iter_mut() {
        *word = pbiased_word(&mut source, threshold);
    }
    if let Some(last) = words.last_mut() {
        *last &= crate::bits::tail_mask(n);
    }
    x
}

/// Scratch for one worker task: caches the coordinate planes of the block
/// being processed so a plane is generated at most once per block.
pub(crate) struct PlaneBuf {
    words: Vec<u64>,
    stamp: Vec<u64>,
    block: u64,
}

impl PlaneBuf {
    pub(crate) fn new(n: usize) -> PlaneBuf {
        PlaneBuf { words: vec![0; n], stamp: vec![u64::MAX; n], block: 0 }
    }

    fn begin(&mut self, block: u64) {
        self.block = block;
    }
}

/// Lazy plane source: coordinate `c` of block `b` comes from substream
/// `(call, b, c)`, generated on first request and cached for the block.
pub(crate) struct SampledPlanes<'a> {
    buf: &'a mut PlaneBuf,
    handle: StreamHandle,
    threshold: Threshold,
    n: usize,
}

impl<'a> SampledPlanes<'a> {
    pub(crate) fn new(
        buf: &'a mut PlaneBuf,
        handle: StreamHandle,
        threshold: Threshold,
        block: u64,
        n: usize,
    ) -> Self {
        buf.begin(block);
        SampledPlanes { buf, handle, threshold, n }
    }
}

impl PlaneAccess for SampledPlanes<'_> {
    fn dim(&self) -> usize {
        self.n
    }

    fn plane(&mut self, coord0: usize) -> u64 {
        if self.buf.stamp[coord0] == self.buf.block {
            return self.buf.words[coord0];
        }
        let mut rng = self.handle.rng(self.buf.block, coord0 as u64);
        let w = pbiased_word(&mut rng, self.threshold);
        self.buf.words[coord0] = w;
        self.buf.stamp[coord0] = self.buf.block;
        w
    }
}

fn lanes_in_block(block: u64, m: u64) -> u32 {
    let start = block * 64;
    (m - start).min(64) as u32
}

/// Count of 1-outputs of `f` over `m` p-biased samples; spends exactly `m`
/// queries.
fn count_ones_pbiased(oracle: &Oracle, p: Probability, m: u64, rng: &mut SeedStream) -> u64 {
    let threshold = Threshold::for_probability(p.value()).expect("checked probability");
    let handle = rng.handle();
    let n = oracle.dimension();
    let blocks = m.div_ceil(64);
    exec::fold_blocks(
        blocks,
        || 0u64,
        || PlaneBuf::new(n),
        |acc, buf, block| {
            let lanes = lanes_in_block(block, m);
            let mut planes = SampledPlanes::new(buf, handle, threshold, block, n);
            let out = oracle.query_block(&mut planes, lanes);
            *acc += out.count_ones() as u64;
        },
    )
}

/// Empirical mean of `f` over `m(eps, delta)` p-biased samples.
///
/// Within `eps` of `E_p[f]` with probability at least `1 - delta`; spends
/// exactly `params.sample_count()` queries.
pub fn estimate_phi(
    oracle: &Oracle,
    p: Probability,
    params: &EstimationParams,
    rng: &mut SeedStream,
) -> f64 {
    let m = params.sample_count();
    let ones = count_ones_pbiased(oracle, p, m, rng);
    ones as f64 / m as f64
}

/// Queries spent by one [`estimate_phi`] call.
pub fn phi_query_count(params: &EstimationParams) -> u64 {
    params.sample_count()
}

/// The binary-search grid for [`find_half_point`]: the paper's
/// `ceil(3k/eps)` intervals, rounded up to a power of two so the number of
/// bisection steps is a data-independent function of `(k, eps)`. Interval
/// width is then at most `eps/(3k)`, which is what the Lipschitz argument
/// needs.
fn half_point_grid(k: u32, eps: f64) -> u64 {
    let raw = (3.0 * k as f64 / eps).ceil() as u64;
    raw.next_power_of_two()
}

/// Number of estimations the per-estimate confidence is divided by.
fn half_point_estimations(k: u32, eps: f64) -> u64 {
    ((3.0 * k as f64 / eps).log2() + 1.0).ceil() as u64
}

fn half_point_params(k: u32, eps: f64, delta: f64) -> Result<EstimationParams> {
    let estimations = half_point_estimations(k, eps);
    EstimationParams::new(eps / 3.0, delta / estimations as f64)
}

/// Queries spent by one [`find_half_point`] call, excluding the at most
/// two cached extremal queries of its constant test.
pub fn half_point_query_count(k: u32, eps: f64, delta: f64) -> u64 {
    let grid = half_point_grid(k, eps);
    let steps = grid.trailing_zeros() as u64;
    let params = half_point_params(k, eps, delta).expect("validated before counting");
    steps * params.sample_count()
}

/// Find `p` with `E_p[f] = 1/2 +- eps` for a nonconstant monotone `f` with
/// `C(f) <= k`.
///
/// Splits `[0,1]` into intervals of width at most `eps/(3k)` and binary
/// searches the endpoints, estimating each visited endpoint to `eps/3`
/// with per-estimate confidence `delta / ceil(log2(3k/eps)+1)`. An
/// estimate of exactly 1/2 recurses right. Since the Lipschitz constant of
/// `E_p[f]` is at most `k`, the returned endpoint's true expectation is
/// within `1/2 +- eps` with probability at least `1 - delta`.
pub fn find_half_point(
    oracle: &Oracle,
    k: u32,
    eps: f64,
    delta: f64,
    rng: &mut SeedStream,
) -> Result<Probability> {
    if k < 1 {
        return Err(Error::InvalidParam("k must be at least 1".into()));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParam(format!("eps={eps} outside (0,1]")));
    }
    if oracle.test_constant_monotone()?.is_some() {
        return Err(Error::ConstantFunction);
    }
    let grid = half_point_grid(k, eps);
    let params = half_point_params(k, eps, delta)?;
    let (mut lo, mut hi) = (0u64, grid);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let p = Probability::new(mid as f64 / grid as f64)?;
        let est = estimate_phi(oracle, p, &params, rng);
        if est <= 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Probability::new(hi as f64 / grid as f64)
}

/// Queries spent by one [`find_critical_probability`] call, excluding the
/// constant test.
pub fn critical_probability_query_count(k: u32, eps: f64, delta: f64) -> u64 {
    half_point_query_count(k, eps / 8.0, delta)
}

/// Approximate the critical probability: returns `p = p(f) +- eps` with
/// probability at least `1 - delta`, by finding a point whose expectation
/// is `1/2 +- eps/8`.
pub fn find_critical_probability(
    oracle: &Oracle,
    k: u32,
    eps: f64,
    delta: f64,
    rng: &mut SeedStream,
) -> Result<Probability> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParam(format!("eps={eps} outside (0,1)")));
    }
    find_half_point(oracle, k, eps / 8.0, delta, rng)
}

/// Rerandomized influence estimates for every coordinate at one bias.
#[derive(Clone, Debug)]
pub struct InfluenceEstimates {
    rerandomized: Vec<f64>,
    p: Probability,
    eps: f64,
}

impl InfluenceEstimates {
    /// Per-coordinate rerandomized influence estimates, clamped to [0,1].
    pub fn rerandomized(&self) -> &[f64] {
        &self.rerandomized
    }

    pub fn p(&self) -> Probability {
        self.p
    }

    /// Requested simultaneous accuracy.
    pub fn accuracy(&self) -> f64 {
        self.eps
    }

    /// Flip-influence view, derived exactly as `rerandomized / (4p(1-p))`.
    /// Undefined at `p` in {0, 1}.
    pub fn flip(&self) -> Result<Vec<f64>> {
        let p = self.p.value();
        let scale = 4.0 * p * (1.0 - p);
        if scale == 0.0 {
            return Err(Error::InvalidParam(
                "flip influence is unrecoverable at p in {0,1}".into(),
            ));
        }
        Ok(self.rerandomized.iter().map(|v| v / scale).collect())
    }

    /// Highest estimate among `coords`; ties break to the lowest coordinate.
    pub fn argmax_among(&self, coords: impl Iterator<Item = u32>) -> Option<(u32, f64)> {
        let mut best: Option<(u32, f64)> = None;
        for i in coords {
            let v = self.rerandomized[(i - 1) as usize];
            match best {
                Some((_, bv)) if v <= bv => {}
                _ => best = Some((i, v)),
            }
        }
        best
    }
}

/// Queries spent by one [`estimate_influences`] call.
pub fn influence_query_count(n: usize, eps: f64, delta: f64) -> u64 {
    2 * hoeffding_samples(eps / 8.0, delta / (n as f64 + 1.0))
}

/// Estimate the rerandomized influence of every coordinate at bias `p`,
/// all within `eps` simultaneously with probability at least `1 - delta`.
///
/// Draws one shared sample set of size `2 m(eps/8, delta/(n+1))` and
/// queries `f` once per sample. For each coordinate the samples are split
/// by that coordinate's bit; the larger part (at least half the sample)
/// estimates the restricted expectation with no new queries, and the
/// influence follows from `Inf~ = 4(1-p)(E[f] - E[f_{x_i=0}]) =
/// 4p(E[f_{x_i=1}] - E[f])`, which holds for monotone `f`. At `p` in
/// {0,1} the rerandomized influence is identically 0 and the estimates
/// are returned as 0.
pub fn estimate_influences(
    oracle: &Oracle,
    p: Probability,
    eps: f64,
    delta: f64,
    rng: &mut SeedStream,
) -> Result<InfluenceEstimates> {
    if !oracle.is_monotone_declared() {
        return Err(Error::NotMonotone);
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParam(format!("eps={eps} must be > 0")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParam(format!("delta={delta} outside (0,1)")));
    }
    let n = oracle.dimension();
    let m = influence_query_count(n, eps, delta);
    let threshold = Threshold::for_probability(p.value())?;
    let handle = rng.handle();
    let blocks = m.div_ceil(64);

    let (f_total, ones, ones_f) = exec::fold_blocks(
        blocks,
        || (0u64, vec![0u64; n], vec![0u64; n]),
        || PlaneBuf::new(n),
        |acc, buf, block| {
            let lanes = lanes_in_block(block, m);
            let mask = lanes_mask(lanes);
            let mut planes = SampledPlanes::new(buf, handle, threshold, block, n);
            let out = oracle.query_block(&mut planes, lanes);
            acc.0 += out.count_ones() as u64;
            for c in 0..n {
                let w = planes.plane(c) & mask;
                acc.1[c] += w.count_ones() as u64;
                acc.2[c] += (w & out).count_ones() as u64;
            }
        },
    );

    let pv = p.value();
    let mean = f_total as f64 / m as f64;
    let rerandomized = (0..n)
        .map(|c| {
            let m1 = ones[c];
            let m0 = m - m1;
            let raw = if m1 >= m0 {
                // estimate E_p[f_{x_i=1}] from the x_i=1 part
                let e1 = ones_f[c] as f64 / m1 as f64;
                4.0 * pv * (e1 - mean)
            } else {
                let e0 = (f_total - ones_f[c]) as f64 / m0 as f64;
                4.0 * (1.0 - pv) * (mean - e0)
            };
            raw.clamp(0.0, 1.0)
        })
        .collect();

    Ok(InfluenceEstimates { rerandomized, p, eps })
}
