//! Certification from uniform random examples, for arbitrary (not
//! necessarily monotone) functions.
//!
//! The algorithm enumerates all size-`k` coordinate sets in colex order
//! and keeps those not eliminated by any sample, where the sample
//! `(x, y)` eliminates `S` iff `x` agrees with `x*` on `S` but
//! `y != f(x*)`. A true certificate is never eliminated, and against a
//! function of certificate complexity at most `k` every non-certificate
//! survives `m` samples with probability at most `(1 - 2^-k)^m`.

use std::io::{BufRead, Write};

use crate::bits::{binomial, BitString, ColexSubsets};
use crate::error::{Error, Result};
use crate::oracle::Oracle;
use crate::pbias::{sample_pbiased, Probability};
use crate::rng::SeedStream;

/// One uniform example `(x, f(x))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledSample {
    pub x: BitString,
    pub label: bool,
}

/// Enumeration guard: candidate sets are capped at this count.
pub const MAX_CANDIDATES: u128 = 10_000_000;
pub const MAX_DIMENSION: usize = 30;

/// Which survivors to report.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SurvivorMode {
    /// The first surviving set in colex order, if any.
    First,
    /// Every surviving set, for introspection.
    All,
}

/// Draw `m` uniform samples with true labels; spends `m` queries.
pub fn draw_uniform_samples(oracle: &Oracle, m: u64, rng: &mut SeedStream) -> Vec<LabeledSample> {
    let n = oracle.dimension();
    (0..m)
        .map(|_| {
            let x = sample_pbiased(n, Probability::HALF, rng);
            let label = oracle.query(&x);
            LabeledSample { x, label }
        })
        .collect()
}

fn check_enumerable(n: usize, k: usize) -> Result<()> {
    if n > MAX_DIMENSION || binomial(n as u64, k as u64) > MAX_CANDIDATES {
        return Err(Error::EnumerationBudget { n, k });
    }
    Ok(())
}

/// Packed coordinate masks of the samples that can eliminate candidates:
/// those labeled differently from the claimed value. A candidate `S` is
/// eliminated iff some eliminator agrees with `x*` on all of `S`.
fn eliminator_masks(samples: &[LabeledSample], x_star: &BitString, value: bool) -> Vec<u64> {
    samples
        .iter()
        .filter(|s| s.label != value)
        .map(|s| {
            let mut agree = 0u64;
            for i in 1..=x_star.len() as u32 {
                if s.x.get(i) == x_star.get(i) {
                    agree |= 1u64 << (i - 1);
                }
            }
            agree
        })
        .collect()
}

fn set_mask(coords: &[u32]) -> u64 {
    coords.iter().fold(0u64, |m, &i| m | (1u64 << (i - 1)))
}

/// Surviving size-`k` candidate certificates for `f`'s value on `x_star`.
///
/// `SurvivorMode::First` returns at most one set (the colex-least
/// survivor); `SurvivorMode::All` returns every survivor. An empty result
/// means every candidate was eliminated.
pub fn certify_from_samples(
    samples: &[LabeledSample],
    x_star: &BitString,
    value_at_star: bool,
    k: usize,
    mode: SurvivorMode,
) -> Result<Vec<Vec<u32>>> {
    let n = x_star.len();
    check_enumerable(n, k)?;
    for s in samples {
        if s.x.len() != n {
            return Err(Error::InvalidParam(format!(
                "sample dimension {} != input dimension {n}",
                s.x.len()
            )));
        }
    }
    let eliminators = eliminator_masks(samples, x_star, value_at_star);
    let mut survivors = Vec::new();
    for coords in ColexSubsets::new(n, k) {
        let mask = set_mask(&coords);
        let eliminated = eliminators.iter().any(|&agree| mask & !agree == 0);
        if !eliminated {
            survivors.push(coords);
            if mode == SurvivorMode::First {
                break;
            }
        }
    }
    Ok(survivors)
}

/// The success probability bound for the random-examples algorithm:
/// `1 - (1 - 2^-k)^m * C(n, k)`. Can be negative for small `m`; reported
/// unclipped.
pub fn random_examples_bound(n: u64, k: u32, m: u64) -> f64 {
    let miss = 1.0 - 0.5f64.powi(k as i32);
    1.0 - miss.powf(m as f64) * binomial(n, k as u64) as f64
}

/// Write samples one per line as `bits label`, e.g. `0110100101 1`.
pub fn write_samples<W: Write>(samples: &[LabeledSample], mut out: W) -> Result<()> {
    for s in samples {
        writeln!(out, "{} {}", s.x.to_string01(), s.label as u8)?;
    }
    Ok(())
}

/// Read samples in the `bits label` line format; all lines must share one
/// dimension.
pub fn read_samples<R: BufRead>(input: R) -> Result<Vec<LabeledSample>> {
    let mut samples = Vec::new();
    let mut dim: Option<usize> = None;
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (bits, label) = match (parts.next(), parts.next(), parts.next()) {
            (Some(b), Some(l), None) => (b, l),
            _ => {
                return Err(Error::InvalidParam(format!(
                    "line {}: expected 'bits label'",
                    lineno + 1
                )))
            }
        };
        let x = BitString::parse01(bits)
            .map_err(|e| Error::InvalidParam(format!("line {}: {e}", lineno + 1)))?;
        let label = match label {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::InvalidParam(format!(
                    "line {}: label must be 0 or 1, got {other:?}",
                    lineno + 1
                )))
            }
        };
        if let Some(d) = dim {
            if x.len() != d {
                return Err(Error::InvalidParam(format!(
                    "line {}: dimension {} != {}",
                    lineno + 1,
                    x.len(),
                    d
                )));
            }
        } else {
            dim = Some(x.len());
        }
        samples.push(LabeledSample { x, label });
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Table;
    use crate::functions::FunctionSpec;
    use crate::oracle::build_function;
    use rand::RngCore;

    #[test]
    fn elimination_definition() {
        // a sample agreeing on S with the wrong label eliminates S
        let x_star = BitString::ones(4);
        let sample = LabeledSample { x: BitString::parse01("1100").unwrap(), label: false };
        let survivors =
            certify_from_samples(&[sample], &x_star, true, 2, SurvivorMode::All).unwrap();
        // {1,2} agrees with x* on the sample and is eliminated
        assert!(!survivors.contains(&vec![1, 2]));
        assert!(survivors.contains(&vec![3, 4]));
    }

    #[test]
    fn no_samples_means_everything_survives_in_colex_order() {
        let x_star = BitString::ones(4);
        let survivors =
            certify_from_samples(&[], &x_star, true, 2, SurvivorMode::All).unwrap();
        assert_eq!(survivors.len(), 6);
        assert_eq!(survivors[0], vec![1, 2]);
        let first = certify_from_samples(&[], &x_star, true, 2, SurvivorMode::First).unwrap();
        assert_eq!(first, vec![vec![1, 2]]);
    }

    #[test]
    fn true_certificates_are_never_eliminated() {
        // adversarial sample set = every point of the cube, on random
        // truth tables; any true certificate must survive
        let mut rng = SeedStream::from_seed(31).general_rng();
        for n in [3usize, 5, 8, 10] {
            for _ in 0..6 {
                let bits: String = (0..1usize << n)
                    .map(|_| if rng.next_u32() & 1 == 1 { '1' } else { '0' })
                    .collect();
                let spec = FunctionSpec::truth_table(n, bits);
                let oracle = build_function(&spec).unwrap();
                let table = Table::from_spec(&spec).unwrap();
                let x_star = BitString::from_index_msb(rng.next_u64() & ((1 << n) - 1), n);
                let v = table.value(&x_star);
                let all_samples: Vec<LabeledSample> = (0..1u64 << n)
                    .map(|idx| {
                        let x = BitString::from_index_msb(idx, n);
                        let label = table.value(&x);
                        LabeledSample { x, label }
                    })
                    .collect();
                // find one true certificate of each size by brute force
                for k in 1..=n.min(4) {
                    let mut true_cert = None;
                    for coords in ColexSubsets::new(n, k) {
                        let cert = crate::oracle::Certificate::new(
                            coords.iter().map(|&i| (i, x_star.get(i))),
                            v,
                        );
                        if cert.valid_exhaustive(&oracle).unwrap() {
                            true_cert = Some(coords);
                            break;
                        }
                    }
                    let Some(coords) = true_cert else { continue };
                    let survivors =
                        certify_from_samples(&all_samples, &x_star, v, k, SurvivorMode::All)
                            .unwrap();
                    assert!(
                        survivors.contains(&coords),
                        "true certificate {coords:?} eliminated on n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn nonconstant_small_functions_hit_both_values_often() {
        // Pr[f = b] >= 2^-C(f) for both b, exhaustively for n <= 4 and on
        // a seeded sample at n = 5
        for n in 1..=4usize {
            let size = 1u64 << n;
            for packed in 1..(1u64 << size) - 1 {
                let t = Table::from_packed(n, packed);
                let ones = (0..size).filter(|&i| t.get(i)).count() as f64;
                let c = t.certificate_stats().unwrap().c;
                let bound = 0.5f64.powi(c as i32);
                assert!(ones / size as f64 >= bound - 1e-12, "n={n} table={packed:#x}");
                assert!(
                    (size as f64 - ones) / size as f64 >= bound - 1e-12,
                    "n={n} table={packed:#x}"
                );
            }
        }
        let mut rng = SeedStream::from_seed(32).general_rng();
        let size = 32u64;
        for _ in 0..2000 {
            let packed = rng.next_u64() & 0xFFFF_FFFF;
            if packed == 0 || packed == 0xFFFF_FFFF {
                continue;
            }
            let t = Table::from_packed(5, packed);
            let ones = (0..size).filter(|&i| t.get(i)).count() as f64;
            let c = t.certificate_stats().unwrap().c;
            let bound = 0.5f64.powi(c as i32);
            assert!(ones / size as f64 >= bound - 1e-12);
            assert!((size as f64 - ones) / size as f64 >= bound - 1e-12);
        }
    }

    #[test]
    fn survivors_on_conjunction_contain_the_support() {
        let spec = FunctionSpec::conjunction(10, [2, 5]);
        let oracle = build_function(&spec).unwrap();
        let mut rng = SeedStream::from_seed(33);
        let samples = draw_uniform_samples(&oracle, 2000, &mut rng);
        assert_eq!(oracle.query_count(), 2000);
        let x_star = BitString::ones(10);
        let survivors =
            certify_from_samples(&samples, &x_star, true, 2, SurvivorMode::All).unwrap();
        assert!(survivors.contains(&vec![2, 5]));
        // with 2000 samples, everything else is essentially always gone
        assert_eq!(survivors, vec![vec![2, 5]]);
    }

    #[test]
    fn draw_uniform_samples_labels_are_true() {
        let spec = FunctionSpec::majority(5);
        let oracle = build_function(&spec).unwrap();
        let table = Table::from_spec(&spec).unwrap();
        let mut rng = SeedStream::from_seed(34);
        for s in draw_uniform_samples(&oracle, 200, &mut rng) {
            assert_eq!(s.label, table.value(&s.x));
        }
        let mut rng = SeedStream::from_seed(35);
        assert!(draw_uniform_samples(&oracle, 0, &mut rng).is_empty());
    }

    #[test]
    fn enumeration_budget_is_enforced() {
        let x_star = BitString::ones(31);
        assert!(matches!(
            certify_from_samples(&[], &x_star, true, 2, SurvivorMode::First),
            Err(Error::EnumerationBudget { .. })
        ));
    }

    #[test]
    fn bound_formula_examples() {
        // 1 - (1 - 2^-3)^100 * C(16,3) ~ 0.99911
        let b = random_examples_bound(16, 3, 100);
        assert!((b - 0.99911).abs() < 5e-5, "bound {b}");
        // m = 0 is vacuous and goes negative; reported unchanged
        let b0 = random_examples_bound(16, 3, 0);
        assert!((b0 - (1.0 - 560.0)).abs() < 1e-9);
    }

    #[test]
    fn sample_file_round_trip() {
        let samples = vec![
            LabeledSample { x: BitString::parse01("0110100101").unwrap(), label: true },
            LabeledSample { x: BitString::parse01("1111100000").unwrap(), label: false },
        ];
        let mut buf = Vec::new();
        write_samples(&samples, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "0110100101 1\n1111100000 0\n"
        );
        let back = read_samples(std::io::BufReader::new(&buf[..])).unwrap();
        assert_eq!(back, samples);

        assert!(read_samples(std::io::BufReader::new("01 2\n".as_bytes())).is_err());
        assert!(read_samples(std::io::BufReader::new("01 1\n011 0\n".as_bytes())).is_err());
    }
}
