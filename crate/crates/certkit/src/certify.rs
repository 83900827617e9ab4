//! Certification algorithms for monotone functions.
//!
//! Three layers, composed by [`certify`]:
//!
//! 1. [`find_arbitrary_certificate`] kills the function: while nonconstant,
//!    estimate the critical probability, estimate every coordinate's
//!    rerandomized influence at that bias, and restrict the most
//!    influential coordinate to 0 if the bias estimate is at least 1/2
//!    (driving the critical probability up) or to 1 otherwise. The
//!    restricted set with that polarity is a certificate for the constant
//!    the function collapses to.
//! 2. [`find_input_certificate`] aims the arbitrary certificate at a given
//!    input: restrict the returned coordinates to the input's own bits,
//!    accumulate, and repeat until constant. Every 0-certificate meets
//!    every 1-certificate, so each round lowers `C_0 + C_1`.
//! 3. [`trim_certificate`] removes insensitive coordinates in one pass
//!    against the extremal completion, leaving a prime implicant of size
//!    at most `C(f)`.
//!
//! The critical-probability bias can be re-estimated each iteration
//! (`Reestimate`) or estimated once and drifted by a fixed step per
//! iteration (`DeterministicUpdate`), which saves a log factor in queries.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::oracle::{Certificate, Oracle, Restriction};
use crate::pbias::{estimate_influences, find_critical_probability, Probability};
use crate::rng::SeedStream;

/// How the certificate loop tracks the critical probability.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateMode {
    /// Re-estimate the critical probability every iteration.
    Reestimate,
    /// Estimate once, then shift the estimate by `eps_progress` per
    /// iteration (the minimum guaranteed progress).
    DeterministicUpdate,
}

impl std::fmt::Display for UpdateMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UpdateMode::Reestimate => f.write_str("reestimate"),
            UpdateMode::DeterministicUpdate => f.write_str("deterministic_update"),
        }
    }
}

/// Tuning for the certification loop.
#[derive(Clone, Debug)]
pub struct CertifyConfig {
    /// Claimed bound on the certificate complexity of the target.
    pub k: u32,
    /// Overall failure probability, split over the loop's estimates.
    pub delta: f64,
    pub mode: UpdateMode,
    /// Critical-probability accuracy and deterministic drift step.
    /// Influences are estimated to `k * eps_progress`.
    pub eps_progress: f64,
    /// Iteration cap for the restriction loop.
    pub max_iterations: u64,
    /// Round cap for the per-input loop.
    pub max_rounds: u64,
}

impl CertifyConfig {
    /// The step the deterministic-update analysis requires: `1/(40 k^3)`.
    pub fn default_eps(k: u32) -> f64 {
        1.0 / (40.0 * (k as f64).powi(3))
    }

    pub fn new(k: u32) -> CertifyConfig {
        CertifyConfig {
            k,
            delta: 0.01,
            mode: UpdateMode::DeterministicUpdate,
            eps_progress: Self::default_eps(k),
            max_iterations: 200 * (k as u64).pow(3),
            max_rounds: 10 * k as u64,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_mode(mut self, mode: UpdateMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps_progress = eps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidParam("k must be at least 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParam(format!(
                "delta={} outside (0,1)",
                self.delta
            )));
        }
        if !(self.eps_progress > 0.0 && self.eps_progress < 1.0) {
            return Err(Error::InvalidParam(format!(
                "eps_progress={} outside (0,1)",
                self.eps_progress
            )));
        }
        if self.mode == UpdateMode::DeterministicUpdate {
            let bound = Self::default_eps(self.k);
            if self.eps_progress > bound + 1e-12 {
                return Err(Error::InvalidParam(format!(
                    "deterministic_update requires eps_progress <= 1/(40k^3) = {bound}, got {}",
                    self.eps_progress
                )));
            }
        }
        Ok(())
    }
}

/// One restriction step of the arbitrary-certificate loop.
#[derive(Clone, Debug, Serialize)]
pub struct StepRecord {
    pub coord: u32,
    /// Critical-probability estimate governing this step.
    pub p_bar: f64,
}

/// Output of [`find_arbitrary_certificate`]: fixing every coordinate in
/// `coords` to `polarity` makes the function constant `polarity`.
#[derive(Clone, Debug)]
pub struct ArbitraryCertResult {
    pub coords: BTreeSet<u32>,
    pub polarity: bool,
    pub iterations: u64,
    pub queries_spent: u64,
    pub steps: Vec<StepRecord>,
}

impl ArbitraryCertResult {
    pub fn as_certificate(&self) -> Certificate {
        Certificate::new(
            self.coords.iter().map(|&i| (i, self.polarity)),
            self.polarity,
        )
    }
}

/// Find a set of coordinates and a single bit such that restricting all of
/// them to that bit kills `f` to the constant of the same value.
///
/// The polarity is fixed at the first iteration (0 if the initial bias
/// estimate is at least 1/2, else 1) and never re-examined: the sign of
/// the drift cannot flip, and holding it avoids an estimation-noise flip
/// breaking the progress argument. A constant input returns an empty set
/// whose polarity is the constant value.
pub fn find_arbitrary_certificate(
    oracle: &Oracle,
    config: &CertifyConfig,
    rng: &mut SeedStream,
) -> Result<ArbitraryCertResult> {
    config.validate()?;
    if !oracle.is_monotone_declared() {
        return Err(Error::NotMonotone);
    }
    let start_queries = oracle.query_count();
    if let Some(value) = oracle.test_constant_monotone()? {
        return Ok(ArbitraryCertResult {
            coords: BTreeSet::new(),
            polarity: value,
            iterations: 0,
            queries_spent: oracle.query_count() - start_queries,
            steps: Vec::new(),
        });
    }

    let k = config.k;
    let eps = config.eps_progress;
    let cap = config.max_iterations;
    let per_iteration_delta = config.delta / (2.0 * cap as f64);

    let mut polarity: Option<bool> = None;
    let mut drift_base = 0.0;
    if config.mode == UpdateMode::DeterministicUpdate {
        let p0 = find_critical_probability(oracle, k, eps, config.delta / 2.0, rng)?.value();
        let restrict_to_one = p0 < 0.5;
        polarity = Some(restrict_to_one);
        // anchor at the conservative end of the confidence interval, so
        // the true critical probability stays ahead of the drifted
        // estimate from the very first step
        drift_base = if restrict_to_one { p0 + eps } else { p0 - eps };
    }

    let mut frame = oracle.clone();
    let mut coords = BTreeSet::new();
    let mut steps = Vec::new();
    let mut iterations = 0u64;
    loop {
        if frame.test_constant_monotone()?.is_some() {
            break;
        }
        iterations += 1;
        if iterations > cap {
            return Err(Error::IterationCapExceeded { cap });
        }
        let p_bar = match config.mode {
            UpdateMode::Reestimate => {
                find_critical_probability(&frame, k, eps, per_iteration_delta, rng)?.value()
            }
            UpdateMode::DeterministicUpdate => {
                let drift = (iterations - 1) as f64 * eps;
                let b = polarity.expect("polarity set before deterministic loop");
                (if b { drift_base - drift } else { drift_base + drift }).clamp(0.0, 1.0)
            }
        };
        let b = *polarity.get_or_insert(p_bar < 0.5);
        let influences = estimate_influences(
            &frame,
            Probability::new(p_bar)?,
            k as f64 * eps,
            per_iteration_delta,
            rng,
        )?;
        let (coord, _) = influences
            .argmax_among(frame.free_coords())
            .ok_or_else(|| {
                Error::InvalidParam("nonconstant restriction with no free coordinates".into())
            })?;
        coords.insert(coord);
        steps.push(StepRecord { coord, p_bar });
        frame = frame.restrict(&Restriction::single(coord, b))?;
    }

    Ok(ArbitraryCertResult {
        coords,
        polarity: polarity.expect("nonconstant function ran at least one iteration"),
        iterations,
        queries_spent: oracle.query_count() - start_queries,
        steps,
    })
}

/// Output of [`find_input_certificate`].
#[derive(Clone, Debug)]
pub struct InputCertResult {
    pub certificate: Certificate,
    pub rounds: u64,
    pub queries_spent: u64,
    /// The arbitrary-certificate runs, in order, for instrumentation.
    pub arbitrary_runs: Vec<ArbitraryCertResult>,
}

/// Find a certificate for `f`'s value on `x_star` by repeatedly taking an
/// arbitrary certificate of the current restriction and pinning its
/// coordinates to the bits of `x_star` (not to the polarity bit).
pub fn find_input_certificate(
    oracle: &Oracle,
    x_star: &BitString,
    config: &CertifyConfig,
    rng: &mut SeedStream,
) -> Result<InputCertResult> {
    config.validate()?;
    if !oracle.is_monotone_declared() {
        return Err(Error::NotMonotone);
    }
    if x_star.len() != oracle.dimension() {
        return Err(Error::InvalidParam(format!(
            "input length {} != dimension {}",
            x_star.len(),
            oracle.dimension()
        )));
    }
    let start_queries = oracle.query_count();
    let claimed = oracle.query(x_star);

    let inner = CertifyConfig {
        delta: config.delta / config.max_rounds as f64,
        ..config.clone()
    };
    let mut frame = oracle.clone();
    let mut coords: BTreeSet<u32> = BTreeSet::new();
    let mut runs = Vec::new();
    let mut rounds = 0u64;
    while frame.test_constant_monotone()?.is_none() {
        rounds += 1;
        if rounds > config.max_rounds {
            return Err(Error::IterationCapExceeded { cap: config.max_rounds });
        }
        let run = find_arbitrary_certificate(&frame, &inner, rng)?;
        let pin = Restriction::new(run.coords.iter().map(|&i| (i, x_star.get(i))));
        coords.extend(run.coords.iter().copied());
        runs.push(run);
        frame = frame.restrict(&pin)?;
    }

    Ok(InputCertResult {
        certificate: Certificate::from_input(&coords, x_star, claimed),
        rounds,
        queries_spent: oracle.query_count() - start_queries,
        arbitrary_runs: runs,
    })
}

/// Output of [`trim_certificate`] and [`trim_with_claimed`].
#[derive(Clone, Debug)]
pub struct TrimOutcome {
    pub certificate: Certificate,
    pub queries_spent: u64,
}

/// Reduce a certificate to a prime implicant: one pass over the
/// coordinates in ascending order, dropping each coordinate that is
/// insensitive on the current extremal completion. Every surviving
/// coordinate is sensitive there, so the result has size at most `C(f)`.
/// Queries `f(x_star)` first to learn the claimed value; spends
/// `|S| + 2` queries in total.
pub fn trim_certificate(
    oracle: &Oracle,
    x_star: &BitString,
    coords: &BTreeSet<u32>,
) -> Result<TrimOutcome> {
    if !oracle.is_monotone_declared() {
        return Err(Error::NotMonotone);
    }
    let start_queries = oracle.query_count();
    let claimed = oracle.query(x_star);
    let inner = trim_with_claimed(oracle, x_star, coords, claimed)?;
    Ok(TrimOutcome {
        certificate: inner.certificate,
        queries_spent: oracle.query_count() - start_queries,
    })
}

/// Trim with the claimed value already known; spends `|S| + 1` queries
/// (one verification that doubles as the extremal query, then one flip
/// per coordinate).
pub fn trim_with_claimed(
    oracle: &Oracle,
    x_star: &BitString,
    coords: &BTreeSet<u32>,
    claimed: bool,
) -> Result<TrimOutcome> {
    if !oracle.is_monotone_declared() {
        return Err(Error::NotMonotone);
    }
    let start_queries = oracle.query_count();
    let cert = Certificate::from_input(coords, x_star, claimed);
    if !oracle.verify_certificate(&cert)? {
        return Err(Error::NotACertificate);
    }
    // f(z) = claimed from here on: removals only ever rewrite z at the
    // checked coordinate, whose flipped value was just observed equal.
    let mut z = cert.extremal_point(oracle.dimension());
    let mut kept = cert.values().clone();
    for &i in coords {
        if oracle.query(&z.flip(i)) == claimed {
            kept.remove(&i);
            z.set(i, !claimed);
        }
    }
    Ok(TrimOutcome {
        certificate: Certificate::new(kept, claimed),
        queries_spent: oracle.query_count() - start_queries,
    })
}

/// Full pipeline outcome.
#[derive(Clone, Debug)]
pub struct CertifyOutcome {
    pub certificate: Certificate,
    pub rounds: u64,
    pub queries_spent: u64,
    /// Result of the final one-query verification.
    pub verified: bool,
}

/// The full pipeline: per-input certificate, then trim, then one final
/// verification query whose outcome is reported separately.
pub fn certify(
    oracle: &Oracle,
    x_star: &BitString,
    config: &CertifyConfig,
    rng: &mut SeedStream,
) -> Result<CertifyOutcome> {
    let start_queries = oracle.query_count();
    let found = find_input_certificate(oracle, x_star, config, rng)?;
    let trimmed = trim_with_claimed(
        oracle,
        x_star,
        &found.certificate.coord_set(),
        found.certificate.claimed_value(),
    )?;
    let verified = oracle.verify_certificate(&trimmed.certificate)?;
    Ok(CertifyOutcome {
        certificate: trimmed.certificate,
        rounds: found.rounds,
        queries_spent: oracle.query_count() - start_queries,
        verified,
    })
}

/// Convenience wrapper when no bound on `C(f)` is known: double `k`
/// (1, 2, 4, ...) up to `n`, rerunning [`certify`] until the result
/// verifies. In deterministic-update mode the accuracy is tightened to
/// `1/(40k^3)` whenever the supplied one is too coarse for the mode.
pub fn certify_unknown_k(
    oracle: &Oracle,
    x_star: &BitString,
    base: &CertifyConfig,
    rng: &mut SeedStream,
) -> Result<(CertifyOutcome, u32)> {
    let n = oracle.dimension() as u32;
    let mut k = 1u32;
    let mut last_err = None;
    loop {
        let mut config = CertifyConfig {
            k,
            max_iterations: 200 * (k as u64).pow(3),
            max_rounds: 10 * k as u64,
            ..base.clone()
        };
        if config.mode == UpdateMode::DeterministicUpdate {
            config.eps_progress = config.eps_progress.min(CertifyConfig::default_eps(k));
        }
        match certify(oracle, x_star, &config, rng) {
            Ok(out) if out.verified => return Ok((out, k)),
            Ok(_) => last_err = Some(Error::NotACertificate),
            Err(e) => last_err = Some(e),
        }
        if k >= n {
            return Err(last_err.unwrap_or(Error::NotACertificate));
        }
        k = (k * 2).min(n);
    }
}

/// The classic trim-from-everything baseline: start from the trivial
/// certificate (all coordinates agreeing with the claimed value) and trim.
/// Spends `|S| + 2 <= n + 2` queries, linear in `n`.
pub fn angluin_certificate(oracle: &Oracle, x_star: &BitString) -> Result<TrimOutcome> {
    if !oracle.is_monotone_declared() {
        return Err(Error::NotMonotone);
    }
    let start_queries = oracle.query_count();
    let claimed = oracle.query(x_star);
    let coords: BTreeSet<u32> = (1..=oracle.dimension() as u32)
        .filter(|&i| x_star.get(i) == claimed)
        .collect();
    let inner = trim_with_claimed(oracle, x_star, &coords, claimed)?;
    Ok(TrimOutcome {
        certificate: inner.certificate,
        queries_spent: oracle.query_count() - start_queries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Table;
    use crate::functions::FunctionSpec;
    use crate::oracle::build_function;

    fn practical(k: u32) -> CertifyConfig {
        CertifyConfig::new(k)
            .with_mode(UpdateMode::Reestimate)
            .with_eps(0.1)
            .with_delta(0.05)
    }

    #[test]
    fn config_validation() {
        assert!(CertifyConfig::new(2).validate().is_ok());
        assert!(CertifyConfig::new(0).validate().is_err());
        // deterministic update rejects coarse eps
        let bad = CertifyConfig::new(2).with_eps(0.1);
        assert!(bad.validate().is_err());
        let ok = CertifyConfig::new(2)
            .with_eps(0.1)
            .with_mode(UpdateMode::Reestimate);
        assert!(ok.validate().is_ok());
    }

    #[test]
    fn arbitrary_certificate_on_conjunction() {
        let oracle = build_function(&FunctionSpec::conjunction(8, [1, 2])).unwrap();
        let mut rng = SeedStream::from_seed(21);
        let res = find_arbitrary_certificate(&oracle, &practical(2), &mut rng).unwrap();
        // p(f) ~ 0.707 >= 1/2 forces polarity 0; one zeroed conjunct kills f
        assert!(!res.polarity);
        assert_eq!(res.coords.len(), 1);
        assert_eq!(res.iterations, 1);
        let coord = *res.coords.iter().next().unwrap();
        assert!(coord == 1 || coord == 2, "picked {coord}");
    }

    #[test]
    fn arbitrary_certificate_on_constant_and_dictator() {
        let mut rng = SeedStream::from_seed(22);
        let constant = build_function(&FunctionSpec::conjunction(4, [])).unwrap();
        let res = find_arbitrary_certificate(&constant, &practical(1), &mut rng).unwrap();
        assert!(res.coords.is_empty());
        assert!(res.polarity);
        assert_eq!(res.iterations, 0);

        let dict = build_function(&FunctionSpec::dictator(16, 3)).unwrap();
        let res = find_arbitrary_certificate(&dict, &practical(1), &mut rng).unwrap();
        assert_eq!(res.coords, BTreeSet::from([3]));
    }

    #[test]
    fn arbitrary_certificate_polarity_is_sound() {
        // restricting the returned set to the polarity bit must yield the
        // constant of the same value
        let specs = [
            FunctionSpec::conjunction(8, [1, 2]),
            FunctionSpec::tribes(2, 3),
            FunctionSpec::monotone_dnf(10, vec![vec![1, 2], vec![4, 7, 9]]),
        ];
        let mut rng = SeedStream::from_seed(23);
        for spec in &specs {
            let oracle = build_function(spec).unwrap();
            let res = find_arbitrary_certificate(&oracle, &practical(3), &mut rng).unwrap();
            let pin =
                Restriction::new(res.coords.iter().map(|&i| (i, res.polarity)));
            let killed = oracle.restrict(&pin).unwrap();
            assert_eq!(
                killed.test_constant_monotone().unwrap(),
                Some(res.polarity),
                "spec {spec:?} result {res:?}"
            );
            assert_eq!(res.iterations as usize, res.coords.len());
        }
    }

    #[test]
    fn reestimate_mode_progress_is_monotone_in_exact_critical_probability() {
        // with polarity fixed, each restriction can only push the exact
        // critical probability further in the chosen direction
        let spec = FunctionSpec::monotone_dnf(8, vec![vec![1, 2, 3], vec![4, 5], vec![6, 7, 8]]);
        let oracle = build_function(&spec).unwrap();
        let mut rng = SeedStream::from_seed(24);
        let res = find_arbitrary_certificate(&oracle, &practical(3), &mut rng).unwrap();
        let mut table = Table::from_spec(&spec).unwrap();
        let mut last = table.critical_probability(1e-12).unwrap();
        for step in &res.steps {
            table = table.restrict(step.coord, res.polarity);
            let p = match table.is_constant() {
                Some(false) => 1.0,
                Some(true) => 0.0,
                None => table.critical_probability(1e-12).unwrap(),
            };
            if res.polarity {
                assert!(p <= last + 1e-9, "p went up while killing to 1");
            } else {
                assert!(p >= last - 1e-9, "p went down while killing to 0");
            }
            last = p;
        }
    }

    #[test]
    fn deterministic_update_tracks_true_critical_probability() {
        // Lemma-style invariant: with polarity 0, the exact critical
        // probability of each nonconstant restriction stays at or above
        // the drifted estimate; run at the analysis constants.
        let spec = FunctionSpec::conjunction(3, [1, 2]);
        let oracle = build_function(&spec).unwrap();
        let config = CertifyConfig::new(2).with_delta(0.1);
        assert!((config.eps_progress - 1.0 / 320.0).abs() < 1e-15);
        let mut rng = SeedStream::from_seed(25);
        let res = find_arbitrary_certificate(&oracle, &config, &mut rng).unwrap();
        assert!(!res.polarity);
        let mut table = Table::from_spec(&spec).unwrap();
        for step in &res.steps {
            // invariant is stated for the function the step acted on
            let p_exact = table.critical_probability(1e-12).unwrap();
            assert!(
                p_exact >= step.p_bar - 1e-9,
                "exact {p_exact} fell below estimate {}",
                step.p_bar
            );
            table = table.restrict(step.coord, res.polarity);
        }
        let cert = res.as_certificate();
        assert!(oracle.verify_certificate(&cert).unwrap());
    }

    #[test]
    fn input_certificate_on_conjunction() {
        let spec = FunctionSpec::conjunction(8, [1, 2]);
        let oracle = build_function(&spec).unwrap();
        let mut rng = SeedStream::from_seed(26);
        let res =
            find_input_certificate(&oracle, &BitString::ones(8), &practical(2), &mut rng)
                .unwrap();
        assert!(res.certificate.claimed_value());
        let coords = res.certificate.coord_set();
        assert!(coords.contains(&1) && coords.contains(&2), "coords {coords:?}");
        assert!(oracle.verify_certificate(&res.certificate).unwrap());
        assert!(res.certificate.valid_exhaustive(&oracle).unwrap());
    }

    #[test]
    fn input_certificate_zero_side() {
        let spec = FunctionSpec::conjunction(8, [1, 2]);
        let oracle = build_function(&spec).unwrap();
        let mut rng = SeedStream::from_seed(27);
        let mut x = BitString::ones(8);
        x.set(1, false);
        let res = find_input_certificate(&oracle, &x, &practical(2), &mut rng).unwrap();
        assert!(!res.certificate.claimed_value());
        assert!(oracle.verify_certificate(&res.certificate).unwrap());
        // C_0 = 1: the trimmed version is exactly coordinate 1 at 0
        let trimmed =
            trim_with_claimed(&oracle, &x, &res.certificate.coord_set(), false).unwrap();
        assert_eq!(trimmed.certificate.coord_set(), BTreeSet::from([1]));
    }

    #[test]
    fn trim_examples() {
        let oracle = build_function(&FunctionSpec::conjunction(5, [1, 2])).unwrap();
        let x = BitString::ones(5);
        let before = oracle.query_count();
        let out = trim_certificate(&oracle, &x, &BTreeSet::from([1, 2, 3])).unwrap();
        assert_eq!(out.certificate.coord_set(), BTreeSet::from([1, 2]));
        assert_eq!(out.queries_spent, 3 + 2);
        assert_eq!(oracle.query_count() - before, out.queries_spent);

        // already minimal set is unchanged
        let out = trim_certificate(&oracle, &x, &BTreeSet::from([1, 2])).unwrap();
        assert_eq!(out.certificate.coord_set(), BTreeSet::from([1, 2]));

        // dictator: the full set trims to the dictating coordinate
        let dict = build_function(&FunctionSpec::dictator(6, 1)).unwrap();
        let all: BTreeSet<u32> = (1..=6).collect();
        let out = trim_certificate(&dict, &BitString::ones(6), &all).unwrap();
        assert_eq!(out.certificate.coord_set(), BTreeSet::from([1]));
    }

    #[test]
    fn trim_rejects_invalid_input_set() {
        let oracle = build_function(&FunctionSpec::conjunction(5, [1, 2])).unwrap();
        let x = BitString::ones(5);
        // {3} does not certify f = 1
        assert!(matches!(
            trim_certificate(&oracle, &x, &BTreeSet::from([3])),
            Err(Error::NotACertificate)
        ));
    }

    #[test]
    fn trim_output_is_prime_implicant() {
        let spec = FunctionSpec::monotone_dnf(9, vec![vec![1, 2], vec![3, 4, 5], vec![2, 6]]);
        let oracle = build_function(&spec).unwrap();
        let x = BitString::ones(9);
        let all: BTreeSet<u32> = (1..=9).collect();
        let out = trim_certificate(&oracle, &x, &all).unwrap();
        // every surviving coordinate is sensitive on the extremal point
        let z = out.certificate.extremal_point(9);
        for i in out.certificate.coord_set() {
            assert_ne!(
                oracle.query(&z.flip(i)),
                out.certificate.claimed_value(),
                "coordinate {i} is not sensitive"
            );
        }
        let c = Table::from_spec(&spec).unwrap().certificate_stats().unwrap().c;
        assert!(out.certificate.len() as u32 <= c);
    }

    #[test]
    fn certify_examples() {
        let mut rng = SeedStream::from_seed(28);

        // tribes: the unique minimal 1-certificates are whole tribes
        let tribes = FunctionSpec::tribes(3, 3);
        let oracle = build_function(&tribes).unwrap();
        let out = certify(&oracle, &BitString::ones(9), &practical(3), &mut rng).unwrap();
        assert!(out.verified);
        assert!(out.certificate.len() <= 3);
        assert!(out.certificate.valid_exhaustive(&oracle).unwrap());

        // conjunction: exactly the two conjuncts
        let conj = build_function(&FunctionSpec::conjunction(8, [1, 2])).unwrap();
        let out = certify(&conj, &BitString::ones(8), &practical(2), &mut rng).unwrap();
        assert!(out.verified);
        assert_eq!(out.certificate.coord_set(), BTreeSet::from([1, 2]));

        // constant function: empty certificate
        let constant = build_function(&FunctionSpec::monotone_dnf(6, vec![])).unwrap();
        let out = certify(&constant, &BitString::zeros(6), &practical(1), &mut rng).unwrap();
        assert!(out.verified);
        assert!(out.certificate.is_empty());
    }

    #[test]
    fn certify_unknown_k_doubles_until_verified() {
        let spec = FunctionSpec::tribes(3, 2);
        let oracle = build_function(&spec).unwrap();
        let mut rng = SeedStream::from_seed(29);
        let base = practical(1);
        let (out, k) = certify_unknown_k(&oracle, &BitString::ones(6), &base, &mut rng).unwrap();
        assert!(out.verified);
        assert!(out.certificate.len() <= 3);
        assert!(k <= 6);
    }

    #[test]
    fn angluin_baseline_trims_from_everything() {
        let spec = FunctionSpec::conjunction(12, [4, 9]);
        let oracle = build_function(&spec).unwrap();
        let x = BitString::ones(12);
        let out = angluin_certificate(&oracle, &x).unwrap();
        assert_eq!(out.certificate.coord_set(), BTreeSet::from([4, 9]));
        // 1 for f(x*), 1 to verify, one flip per coordinate of S_{x*}
        assert_eq!(out.queries_spent, 12 + 2);
    }

    #[test]
    fn per_iteration_query_spend_is_seed_independent() {
        let spec = FunctionSpec::conjunction(8, [1, 2]);
        let run = |seed: u64| {
            let oracle = build_function(&spec).unwrap();
            let mut rng = SeedStream::from_seed(seed);
            let res = find_arbitrary_certificate(&oracle, &practical(2), &mut rng).unwrap();
            (res.iterations, res.queries_spent)
        };
        let (it_a, q_a) = run(1);
        let (it_b, q_b) = run(2);
        assert_eq!(it_a, it_b);
        assert_eq!(q_a, q_b);
    }
}
