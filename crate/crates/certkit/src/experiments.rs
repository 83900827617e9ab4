//! Adversarial instances, empirical lower-bound checks, closed-form bound
//! evaluation, and the query-scaling benchmark.
//!
//! The lower-bound harnesses run concrete strategies against the
//! adversarial distributions behind the known bounds and record empirical
//! success rates next to the bound values:
//!
//! - local search against a random dictator can return a size-`l`
//!   certificate with probability at most `(l + q - 1)/n`;
//! - a `q`-query algorithm against a random width-`k` conjunction succeeds
//!   with probability at most `2^q C(l,k)/C(n,k)`;
//! - against a random codimension-`k` subcube, at most `q 2^-k + kl/n`;
//! - the random-examples certifier succeeds with probability at least
//!   `1 - (1 - 2^-k)^m C(n,k)`.
//!
//! Trials are independent, each driven by its own forked seed stream, so
//! runs are reproducible for any worker count.

use std::collections::BTreeSet;
use std::io::Write;

use rand::Rng;
use serde::Serialize;

use crate::bits::BitString;
use crate::certify::{angluin_certificate, certify, CertifyConfig, UpdateMode};
use crate::error::{Error, Result};
use crate::exec;
use crate::functions::FunctionSpec;
use crate::learners::{
    certify_from_samples, draw_uniform_samples, random_examples_bound, SurvivorMode,
};
use crate::oracle::{build_function, Oracle};
use crate::rng::SeedStream;

/// Families of hidden test instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdversaryKind {
    /// `f(x) = x_i` for a uniform coordinate `i`.
    Dictator,
    /// AND of a uniform `k`-subset of coordinates.
    Conjunction,
    /// Indicator of a uniform codimension-`k` subcube.
    Subcube,
}

impl std::fmt::Display for AdversaryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AdversaryKind::Dictator => f.write_str("dictator"),
            AdversaryKind::Conjunction => f.write_str("conjunction"),
            AdversaryKind::Subcube => f.write_str("subcube"),
        }
    }
}

/// Hidden ground truth of a generated instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Hidden {
    Dictator(u32),
    Conjunction(BTreeSet<u32>),
    Subcube(Vec<(u32, bool)>),
}

/// A generated adversarial instance: the oracle plus the ground truth that
/// regenerates it.
#[derive(Debug)]
pub struct AdversaryInstance {
    pub kind: AdversaryKind,
    pub spec: FunctionSpec,
    pub oracle: Oracle,
    pub hidden: Hidden,
}

/// Sample `k` distinct coordinates of `[1, n]`, sorted.
fn sample_coords(n: usize, k: usize, rng: &mut impl Rng) -> Vec<u32> {
    let mut picked = BTreeSet::new();
    while picked.len() < k {
        picked.insert(rng.random_range(1..=n as u32));
    }
    picked.into_iter().collect()
}

pub fn gen_adversary(
    kind: AdversaryKind,
    n: usize,
    k: usize,
    rng: &mut SeedStream,
) -> Result<AdversaryInstance> {
    if k < 1 || k > n {
        return Err(Error::InvalidParam(format!("k={k} outside [1, n={n}]")));
    }
    let mut draws = rng.general_rng();
    let (spec, hidden) = match kind {
        AdversaryKind::Dictator => {
            let i = draws.random_range(1..=n as u32);
            (FunctionSpec::dictator(n, i), Hidden::Dictator(i))
        }
        AdversaryKind::Conjunction => {
            let coords = sample_coords(n, k, &mut draws);
            (
                FunctionSpec::conjunction(n, coords.iter().copied()),
                Hidden::Conjunction(coords.into_iter().collect()),
            )
        }
        AdversaryKind::Subcube => {
            let coords = sample_coords(n, k, &mut draws);
            let fixed: Vec<(u32, bool)> =
                coords.into_iter().map(|i| (i, draws.random_bool(0.5))).collect();
            (
                FunctionSpec::subcube(n, fixed.iter().copied()),
                Hidden::Subcube(fixed),
            )
        }
    };
    let oracle = build_function(&spec)?;
    Ok(AdversaryInstance { kind, spec, oracle, hidden })
}

/// One row of experiment output.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub n: u64,
    pub k: u32,
    pub l: u64,
    pub q: u64,
    pub m: u64,
    pub trials: u64,
    pub successes: u64,
    pub rate: f64,
    pub bound: f64,
    pub mean_queries: f64,
    pub std_queries: f64,
    pub seed: u64,
}

fn summarize_queries(queries: &[u64]) -> (f64, f64) {
    if queries.is_empty() {
        return (0.0, 0.0);
    }
    let n = queries.len() as f64;
    let mean = queries.iter().map(|&q| q as f64).sum::<f64>() / n;
    let var = queries
        .iter()
        .map(|&q| {
            let d = q as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / n;
    (mean, var.sqrt())
}

fn forked_streams(seed: u64, trials: u64) -> Vec<SeedStream> {
    let mut master = SeedStream::from_seed(seed);
    (0..trials).map(|_| master.fork()).collect()
}

/// Run the reference local-search certifier against random dictators.
///
/// The strategy queries `x* = 1^n`, then flips up to `q - 1` distinct
/// random coordinates of `x*`; a 0 answer pins the dictator. It outputs
/// the pinned coordinate padded to size `l`, or `l` unprobed coordinates
/// at random. Success of any local search is bounded by `(l + q - 1)/n`.
pub fn measure_local_search_success(
    n: usize,
    q: u64,
    l: u64,
    trials: u64,
    seed: u64,
) -> Result<ExperimentRecord> {
    if q < 1 || l < 1 || l > n as u64 {
        return Err(Error::InvalidParam(format!(
            "need q >= 1 and 1 <= l <= n, got q={q} l={l} n={n}"
        )));
    }
    let streams = forked_streams(seed, trials);
    let outcomes = exec::map_trials(trials, |t| {
        let mut stream = streams[t as usize].clone();
        let instance =
            gen_adversary(AdversaryKind::Dictator, n, 1, &mut stream).expect("valid params");
        let hidden = match instance.hidden {
            Hidden::Dictator(i) => i,
            _ => unreachable!(),
        };
        let mut draws = stream.general_rng();
        let x_star = BitString::ones(n);
        instance.oracle.query(&x_star);

        let mut probed = Vec::new();
        let mut found = None;
        if q > 1 {
            let probes = sample_coords(n, ((q - 1) as usize).min(n), &mut draws);
            for &j in &probes {
                probed.push(j);
                if !instance.oracle.query(&x_star.flip(j)) {
                    found = Some(j);
                    break;
                }
            }
        }
        let output: BTreeSet<u32> = match found {
            Some(j) => {
                let mut out = BTreeSet::from([j]);
                let mut next = 1u32;
                while out.len() < l as usize {
                    if !out.contains(&next) {
                        out.insert(next);
                    }
                    next += 1;
                }
                out
            }
            None => {
                let unprobed: Vec<u32> =
                    (1..=n as u32).filter(|i| !probed.contains(i)).collect();
                let mut out = BTreeSet::new();
                while out.len() < l as usize {
                    out.insert(unprobed[draws.random_range(0..unprobed.len())]);
                }
                out
            }
        };
        let success = output.contains(&hidden);
        (success as u64, instance.oracle.query_count())
    });
    let successes: u64 = outcomes.iter().map(|o| o.0).sum();
    let queries: Vec<u64> = outcomes.iter().map(|o| o.1).collect();
    let (mean_queries, std_queries) = summarize_queries(&queries);
    Ok(ExperimentRecord {
        experiment: "local-search".into(),
        n: n as u64,
        k: 1,
        l,
        q,
        m: 0,
        trials,
        successes,
        rate: successes as f64 / trials as f64,
        bound: (l + q - 1) as f64 / n as f64,
        mean_queries,
        std_queries,
        seed,
    })
}

/// Run the random-examples certifier against random conjunctions of width
/// `k` with `x* = 1^n`, recording the empirical rate next to the
/// guarantee `1 - (1 - 2^-k)^m C(n,k)`.
pub fn measure_random_examples_success(
    n: usize,
    k: usize,
    m: u64,
    trials: u64,
    seed: u64,
) -> Result<ExperimentRecord> {
    let streams = forked_streams(seed, trials);
    let outcomes = exec::map_trials(trials, |t| {
        let mut stream = streams[t as usize].clone();
        let instance = gen_adversary(AdversaryKind::Conjunction, n, k, &mut stream)
            .expect("valid params");
        let hidden = match &instance.hidden {
            Hidden::Conjunction(set) => set.iter().copied().collect::<Vec<u32>>(),
            _ => unreachable!(),
        };
        let samples = draw_uniform_samples(&instance.oracle, m, &mut stream);
        let x_star = BitString::ones(n);
        // the adversary is a conjunction, so f(x*) = 1 by construction
        let survivors =
            certify_from_samples(&samples, &x_star, true, k, SurvivorMode::First)
                .expect("within enumeration budget");
        let success = survivors.first().is_some_and(|s| *s == hidden);
        (success as u64, instance.oracle.query_count())
    });
    let successes: u64 = outcomes.iter().map(|o| o.0).sum();
    let queries: Vec<u64> = outcomes.iter().map(|o| o.1).collect();
    let (mean_queries, std_queries) = summarize_queries(&queries);
    Ok(ExperimentRecord {
        experiment: "random-examples".into(),
        n: n as u64,
        k: k as u32,
        l: k as u64,
        q: 0,
        m,
        trials,
        successes,
        rate: successes as f64 / trials as f64,
        bound: random_examples_bound(n as u64, k as u32, m),
        mean_queries,
        std_queries,
        seed,
    })
}

/// Parameters for [`lower_bound_formulas`].
#[derive(Clone, Copy, Debug)]
pub struct BoundParams {
    pub n: u64,
    pub k: u32,
    pub l: u64,
    pub q: u64,
    pub m: Option<u64>,
}

/// Closed-form values of the known success bounds, unclipped; the clipped
/// companions live in [`BoundValues::clipped`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundValues {
    /// Local search against monotone functions: `(l + q - 1)/n`.
    pub local_search: f64,
    /// Query algorithms against monotone functions: `2^q C(l,k)/C(n,k)`.
    pub monotone_queries: f64,
    /// Query algorithms against arbitrary functions: `q 2^-k + k l / n`.
    pub arbitrary_queries: f64,
    /// Random-examples certifier guarantee, when `m` is supplied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub random_examples: Option<f64>,
}

impl BoundValues {
    pub fn clipped(&self) -> BoundValues {
        BoundValues {
            local_search: self.local_search.clamp(0.0, 1.0),
            monotone_queries: self.monotone_queries.clamp(0.0, 1.0),
            arbitrary_queries: self.arbitrary_queries.clamp(0.0, 1.0),
            random_examples: self.random_examples.map(|v| v.clamp(0.0, 1.0)),
        }
    }
}

/// Evaluate the closed-form bounds at the given parameters.
pub fn lower_bound_formulas(params: &BoundParams) -> Result<BoundValues> {
    let BoundParams { n, k, l, q, m } = *params;
    if (k as u64) > l || l > n {
        return Err(Error::InvalidParam(format!(
            "need k <= l <= n, got k={k} l={l} n={n}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParam("n must be positive".into()));
    }
    // C(l,k)/C(n,k) as a stable product of ratios
    let mut ratio = 1.0f64;
    for j in 0..k as u64 {
        ratio *= (l - j) as f64 / (n - j) as f64;
    }
    Ok(BoundValues {
        local_search: (l + q - 1) as f64 / n as f64,
        monotone_queries: (q as f64).exp2() * ratio,
        arbitrary_queries: q as f64 * 0.5f64.powi(k as i32) + (k as u64 * l) as f64 / n as f64,
        random_examples: m.map(|m| random_examples_bound(n, k, m)),
    })
}

/// Query-scaling benchmark: run the certification pipeline and the
/// trim-from-everything baseline on fresh conjunction (or dictator)
/// adversaries with `x* = 1^n` at each dimension in `n_list`, recording
/// mean and standard deviation of queries. A trial counts as a success
/// when the returned certificate verifies and has size at most `k`.
/// `delta` defaults per dimension to `1/n^2`.
pub fn query_scaling_benchmark(
    kind: AdversaryKind,
    k: usize,
    n_list: &[usize],
    trials: u64,
    eps: f64,
    mode: UpdateMode,
    seed: u64,
) -> Result<Vec<ExperimentRecord>> {
    if kind == AdversaryKind::Subcube {
        return Err(Error::NotMonotone);
    }
    let mut records = Vec::new();
    for &n in n_list {
        if n < 2 * k {
            return Err(Error::InvalidParam(format!("need n >= 2k, got n={n} k={k}")));
        }
        let delta = 1.0 / (n as f64 * n as f64);
        let config = CertifyConfig::new(k as u32)
            .with_mode(mode)
            .with_eps(eps)
            .with_delta(delta);
        config.validate()?;
        let streams = forked_streams(seed, trials);
        let config_ref = &config;
        let outcomes = exec::map_trials(trials, move |t| {
            let mut stream = streams[t as usize].clone();
            let instance =
                gen_adversary(kind, n, k, &mut stream).expect("valid params");
            let x_star = BitString::ones(n);
            let out = certify(&instance.oracle, &x_star, config_ref, &mut stream)
                .expect("certify on a monotone adversary");
            let cert_ok = out.verified && out.certificate.len() <= k;
            let certify_queries = out.queries_spent;

            let baseline = gen_adversary(kind, n, k, &mut stream).expect("valid params");
            let ang = angluin_certificate(&baseline.oracle, &x_star)
                .expect("baseline on a monotone adversary");
            let ang_ok = baseline.oracle.verify_certificate(&ang.certificate).unwrap()
                && ang.certificate.len() <= k;
            (cert_ok as u64, certify_queries, ang_ok as u64, ang.queries_spent)
        });
        let cert_queries: Vec<u64> = outcomes.iter().map(|o| o.1).collect();
        let (mean_c, std_c) = summarize_queries(&cert_queries);
        let ang_queries: Vec<u64> = outcomes.iter().map(|o| o.3).collect();
        let (mean_a, std_a) = summarize_queries(&ang_queries);
        records.push(ExperimentRecord {
            experiment: "certify".into(),
            n: n as u64,
            k: k as u32,
            l: 0,
            q: 0,
            m: 0,
            trials,
            successes: outcomes.iter().map(|o| o.0).sum(),
            rate: outcomes.iter().map(|o| o.0).sum::<u64>() as f64 / trials as f64,
            bound: 0.0,
            mean_queries: mean_c,
            std_queries: std_c,
            seed,
        });
        records.push(ExperimentRecord {
            experiment: "angluin".into(),
            n: n as u64,
            k: k as u32,
            l: 0,
            q: 0,
            m: 0,
            trials,
            successes: outcomes.iter().map(|o| o.2).sum(),
            rate: outcomes.iter().map(|o| o.2).sum::<u64>() as f64 / trials as f64,
            bound: 0.0,
            mean_queries: mean_a,
            std_queries: std_a,
            seed,
        });
    }
    Ok(records)
}

/// Format with six significant digits, scientific only outside a readable
/// magnitude range.
pub fn fmt_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..6).contains(&mag) {
        let decimals = (5 - mag).max(0) as usize;
        format!("{:.*}", decimals, x)
    } else {
        format!("{:.5e}", x)
    }
}

pub const CSV_HEADER: &str =
    "experiment,n,k,l,q,m,trials,successes,rate,bound,mean_queries,std_queries,seed";

/// Write records as CSV with one header row; floats carry six significant
/// digits.
pub fn write_records_csv<W: Write>(records: &[ExperimentRecord], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.experiment,
            r.n,
            r.k,
            r.l,
            r.q,
            r.m,
            r.trials,
            r.successes,
            fmt_sig6(r.rate),
            fmt_sig6(r.bound),
            fmt_sig6(r.mean_queries),
            fmt_sig6(r.std_queries),
            r.seed,
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Table;

    #[test]
    fn adversary_hidden_description_matches_oracle() {
        let mut rng = SeedStream::from_seed(41);
        for kind in [AdversaryKind::Dictator, AdversaryKind::Conjunction, AdversaryKind::Subcube]
        {
            let instance = gen_adversary(kind, 12, 3, &mut rng).unwrap();
            let reference = match &instance.hidden {
                Hidden::Dictator(i) => FunctionSpec::dictator(12, *i),
                Hidden::Conjunction(set) => {
                    FunctionSpec::conjunction(12, set.iter().copied())
                }
                Hidden::Subcube(fixed) => FunctionSpec::subcube(12, fixed.iter().copied()),
            };
            let reference = build_function(&reference).unwrap();
            let mut draws = rng.general_rng();
            for _ in 0..1000 {
                let idx = draws.random_range(0..(1u64 << 12));
                let x = BitString::from_index_msb(idx, 12);
                assert_eq!(instance.oracle.query(&x), reference.query(&x));
            }
        }
    }

    #[test]
    fn adversary_subcube_has_certificate_complexity_k() {
        let mut rng = SeedStream::from_seed(42);
        let instance = gen_adversary(AdversaryKind::Subcube, 8, 3, &mut rng).unwrap();
        let stats = Table::from_spec(&instance.spec).unwrap().certificate_stats().unwrap();
        assert_eq!(stats.c, 3);
    }

    #[test]
    fn adversary_conjunction_with_k_equal_n_is_the_full_and() {
        let mut rng = SeedStream::from_seed(43);
        let instance = gen_adversary(AdversaryKind::Conjunction, 5, 5, &mut rng).unwrap();
        match instance.hidden {
            Hidden::Conjunction(ref set) => assert_eq!(set.len(), 5),
            _ => panic!("wrong kind"),
        }
        assert!(instance.oracle.query(&BitString::ones(5)));
        assert!(!instance.oracle.query(&BitString::parse01("01111").unwrap()));
        assert!(gen_adversary(AdversaryKind::Conjunction, 4, 5, &mut rng).is_err());
    }

    #[test]
    fn local_search_respects_its_bound() {
        // the strategy meets the bound with equality in expectation, so
        // allow three binomial standard errors
        let rec = measure_local_search_success(100, 20, 1, 2000, 4401).unwrap();
        assert!((rec.bound - 0.20).abs() < 1e-12);
        let sigma = (rec.rate * (1.0 - rec.rate) / rec.trials as f64).sqrt();
        assert!(
            rec.rate <= rec.bound + 3.0 * sigma,
            "rate {} bound {}",
            rec.rate,
            rec.bound
        );
        // q = 1: pure guessing, rate near 1/n
        let rec = measure_local_search_success(100, 1, 1, 2000, 4402).unwrap();
        assert!(rec.rate <= 0.01 + 3.0 * (0.01f64 * 0.99 / 2000.0).sqrt() + 0.01);
        assert!((rec.mean_queries - 1.0).abs() < 1e-12);
        // bound >= 1 is vacuous
        let rec = measure_local_search_success(10, 10, 1, 50, 4403).unwrap();
        assert!((rec.bound - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_examples_beats_its_guarantee() {
        let rec = measure_random_examples_success(16, 3, 100, 200, 4404).unwrap();
        assert!((rec.bound - 0.99911).abs() < 5e-5);
        let sigma = (rec.rate * (1.0 - rec.rate) / rec.trials as f64).sqrt();
        assert!(
            rec.rate >= rec.bound - 3.0 * sigma,
            "rate {} bound {}",
            rec.rate,
            rec.bound
        );
        assert!((rec.mean_queries - 100.0).abs() < 1e-12);
    }

    #[test]
    fn bound_formula_examples() {
        // 2^10 * C(5,2) / C(100,2) = 1024 * 10 / 4950
        let v = lower_bound_formulas(&BoundParams { n: 100, k: 2, l: 5, q: 10, m: None })
            .unwrap();
        assert!((v.monotone_queries - 10240.0 / 4950.0).abs() < 1e-12);
        assert!((v.monotone_queries - 2.06869).abs() < 1e-5);
        assert!((v.clipped().monotone_queries - 1.0).abs() < 1e-12);

        // 8/16 + 16/100 = 0.66
        let v = lower_bound_formulas(&BoundParams { n: 100, k: 4, l: 4, q: 8, m: None })
            .unwrap();
        assert!((v.arbitrary_queries - 0.66).abs() < 1e-12);

        // q = 0: local-search bound becomes (l-1)/n
        let v = lower_bound_formulas(&BoundParams { n: 50, k: 2, l: 5, q: 0, m: None })
            .unwrap();
        assert!((v.local_search - 4.0 / 50.0).abs() < 1e-12);

        // l = n makes the binomials cancel: bound is exactly 2^q
        let v = lower_bound_formulas(&BoundParams { n: 40, k: 3, l: 40, q: 7, m: None })
            .unwrap();
        assert!((v.monotone_queries - 128.0).abs() < 1e-9);

        assert!(
            lower_bound_formulas(&BoundParams { n: 10, k: 5, l: 3, q: 1, m: None }).is_err()
        );
        assert!(
            lower_bound_formulas(&BoundParams { n: 10, k: 2, l: 11, q: 1, m: None }).is_err()
        );
    }

    #[test]
    fn scaling_benchmark_smoke() {
        let records = query_scaling_benchmark(
            AdversaryKind::Conjunction,
            2,
            &[16, 64],
            4,
            0.15,
            UpdateMode::Reestimate,
            4405,
        )
        .unwrap();
        assert_eq!(records.len(), 4);
        for rec in &records {
            assert_eq!(rec.successes, rec.trials, "{rec:?}");
        }
        // the baseline is linear in n
        let ang16 = records.iter().find(|r| r.experiment == "angluin" && r.n == 16).unwrap();
        let ang64 = records.iter().find(|r| r.experiment == "angluin" && r.n == 64).unwrap();
        assert!((ang16.mean_queries - 18.0).abs() < 1e-12);
        assert!((ang64.mean_queries - 66.0).abs() < 1e-12);
    }

    #[test]
    fn csv_format_is_stable() {
        let rec = ExperimentRecord {
            experiment: "bounds".into(),
            n: 100,
            k: 2,
            l: 5,
            q: 10,
            m: 0,
            trials: 1,
            successes: 1,
            rate: 1.0,
            bound: 10240.0 / 4950.0,
            mean_queries: 12.0,
            std_queries: 0.0,
            seed: 7,
        };
        let mut buf = Vec::new();
        write_records_csv(&[rec], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        assert_eq!(
            lines.next().unwrap(),
            "bounds,100,2,5,10,0,1,1,1.00000,2.06869,12.0000,0,7"
        );
    }

    #[test]
    fn fmt_sig6_cases() {
        assert_eq!(fmt_sig6(0.0), "0");
        assert_eq!(fmt_sig6(0.2), "0.200000");
        assert_eq!(fmt_sig6(2.0686868686), "2.06869");
        assert_eq!(fmt_sig6(123456.5), "123457" /* rounded at unit */);
        assert_eq!(fmt_sig6(1.0e-113), "1.00000e-113");
    }
}
