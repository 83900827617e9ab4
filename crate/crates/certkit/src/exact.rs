//! Exact ground truth for every quantity the randomized pipeline estimates.
//!
//! Everything here works on a fully materialized truth table, so it is
//! limited to small dimensions, and nothing touches the query counter:
//! these are the reference values the estimators and algorithms are judged
//! against.
//!
//! Notation used throughout: `phi(p) = E_p[f]` is the p-biased expectation,
//! flip influence of coordinate `i` is `Pr_p[f(x) != f(x^(flip i))]`, and
//! rerandomized influence is twice the probability that resampling bit `i`
//! changes `f`, which equals `4p(1-p)` times the flip influence.

use crate::bits::{BitString, ColexSubsets};
use crate::error::{Error, Result};
use crate::functions::{Evaluator, FunctionSpec};

pub const PHI_MAX_N: usize = 24;
pub const CERT_STATS_MAX_N: usize = 16;

/// Materialized truth table over `{0,1}^n`, indexed with coordinate 1 as
/// the most significant bit of the index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    n: usize,
    bits: Vec<u64>,
}

impl Table {
    pub fn from_eval(ev: &Evaluator) -> Result<Table> {
        let n = ev.dimension();
        if n > PHI_MAX_N {
            return Err(Error::DimensionTooLarge { n, max: PHI_MAX_N });
        }
        let size = 1u64 << n;
        let mut bits = vec![0u64; (size as usize).div_ceil(64)];
        for idx in 0..size {
            if ev.eval(&BitString::from_index_msb(idx, n)) {
                bits[(idx / 64) as usize] |= 1u64 << (idx % 64);
            }
        }
        Ok(Table { n, bits })
    }

    pub fn from_spec(spec: &FunctionSpec) -> Result<Table> {
        Table::from_eval(&spec.compile()?)
    }

    /// Build directly from packed truth-table bits (low `2^n` bits used).
    pub fn from_packed(n: usize, packed: u64) -> Table {
        assert!(n <= 6);
        Table { n, bits: vec![packed & crate::bits::tail_mask(1 << n)] }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn get(&self, idx: u64) -> bool {
        (self.bits[(idx / 64) as usize] >> (idx % 64)) & 1 == 1
    }

    pub fn value(&self, x: &BitString) -> bool {
        self.get(x.index_msb())
    }

    pub fn size(&self) -> u64 {
        1u64 << self.n
    }

    /// Bit position of coordinate `i` within a truth-table index.
    fn index_bit(&self, i: u32) -> u64 {
        1u64 << (self.n as u32 - i)
    }

    pub fn is_constant(&self) -> Option<bool> {
        let first = self.get(0);
        if (1..self.size()).all(|idx| self.get(idx) == first) {
            Some(first)
        } else {
            None
        }
    }

    pub fn is_monotone(&self) -> bool {
        for idx in 0..self.size() {
            if self.get(idx) {
                continue;
            }
            for c in 0..self.n {
                let below = idx & !(1u64 << c);
                if below != idx && self.get(below) {
                    return false;
                }
            }
        }
        true
    }

    /// Truth table of the restriction `f_{x_i=b}`, same ambient dimension.
    pub fn restrict(&self, i: u32, b: bool) -> Table {
        let bit = self.index_bit(i);
        let size = self.size();
        let mut out = Table { n: self.n, bits: vec![0u64; self.bits.len()] };
        for idx in 0..size {
            let src = if b { idx | bit } else { idx & !bit };
            if self.get(src) {
                out.bits[(idx / 64) as usize] |= 1u64 << (idx % 64);
            }
        }
        out
    }

    /// `phi(p) = E_p[f] = sum over 1-inputs of p^|x| (1-p)^(n-|x|)`.
    pub fn phi(&self, p: f64) -> f64 {
        let hist = self.weight_histogram();
        phi_from_histogram(&hist, self.n, p)
    }

    fn weight_histogram(&self) -> Vec<u64> {
        let mut hist = vec![0u64; self.n + 1];
        for idx in 0..self.size() {
            if self.get(idx) {
                hist[idx.count_ones() as usize] += 1;
            }
        }
        hist
    }

    /// Sensitivity of `f` at `x`: the number of coordinates whose flip
    /// changes the value.
    pub fn sensitivity(&self, x: &BitString) -> u32 {
        let idx = x.index_msb();
        let v = self.get(idx);
        (1..=self.n as u32)
            .filter(|&i| self.get(idx ^ self.index_bit(i)) != v)
            .count() as u32
    }

    /// Per-coordinate flip and rerandomized influences at `p`, plus totals.
    ///
    /// Asserts the basic identities the totals must satisfy: total flip
    /// influence equals `E_p[Sens_f(x)]`, and total rerandomized influence
    /// dominates `Var_p[f]`.
    pub fn influences(&self, p: f64) -> Influences {
        let n = self.n;
        let mut flip = vec![0.0f64; n];
        for i in 1..=n as u32 {
            let bit = self.index_bit(i);
            // disagreeing pairs binned by the weight of the other n-1 coords
            let mut hist = vec![0u64; n];
            for idx in 0..self.size() {
                if idx & bit != 0 {
                    continue;
                }
                if self.get(idx) != self.get(idx | bit) {
                    hist[idx.count_ones() as usize] += 1;
                }
            }
            flip[(i - 1) as usize] = phi_from_histogram(&hist, n - 1, p);
        }
        let rerandomized: Vec<f64> = flip.iter().map(|&v| 4.0 * p * (1.0 - p) * v).collect();
        let total_flip: f64 = flip.iter().sum();
        let total_rerandomized: f64 = rerandomized.iter().sum();

        let expected_sens = self.expected_sensitivity(p);
        assert!(
            (total_flip - expected_sens).abs() <= 1e-9,
            "total flip influence {total_flip} != E_p[Sens] {expected_sens}"
        );
        let phi = self.phi(p);
        let var = phi * (1.0 - phi);
        assert!(
            total_rerandomized >= var - 1e-9,
            "total rerandomized influence {total_rerandomized} below variance {var}"
        );

        Influences { flip, rerandomized, total_flip, total_rerandomized }
    }

    /// `E_p[Sens_f(x)]`, computed directly from the definition.
    pub fn expected_sensitivity(&self, p: f64) -> f64 {
        let n = self.n;
        let mut total = 0.0;
        for idx in 0..self.size() {
            let v = self.get(idx);
            let sens = (0..n)
                .filter(|&c| self.get(idx ^ (1u64 << c)) != v)
                .count();
            if sens > 0 {
                let w = idx.count_ones() as i32;
                total += sens as f64 * pw(p, w, n as i32 - w);
            }
        }
        total
    }

    /// Rerandomized influence of `i` straight from its definition:
    /// `2 Pr[f(x) != f(x with bit i resampled)]`.
    pub fn rerandomized_influence_direct(&self, i: u32, p: f64) -> f64 {
        let n = self.n;
        let bit = self.index_bit(i);
        let mut total = 0.0;
        for idx in 0..self.size() {
            let v = self.get(idx);
            let v1 = self.get(idx | bit);
            let v0 = self.get(idx & !bit);
            let change = p * ((v1 != v) as u8 as f64) + (1.0 - p) * ((v0 != v) as u8 as f64);
            if change > 0.0 {
                let w = idx.count_ones() as i32;
                total += change * pw(p, w, n as i32 - w);
            }
        }
        2.0 * total
    }

    /// Certificate complexity profile. Uses a lattice sweep when `f` is
    /// monotone and subset enumeration (pruned by sensitivity) otherwise.
    pub fn certificate_stats(&self) -> Result<CertStats> {
        if self.n > CERT_STATS_MAX_N {
            return Err(Error::DimensionTooLarge { n: self.n, max: CERT_STATS_MAX_N });
        }
        let per_input = if self.is_monotone() {
            self.per_input_certificates_monotone()
        } else {
            self.per_input_certificates_generic()
        };
        let mut c0 = 0u32;
        let mut c1 = 0u32;
        for idx in 0..self.size() {
            let c = per_input[idx as usize];
            if self.get(idx) {
                c1 = c1.max(c);
            } else {
                c0 = c0.max(c);
            }
        }
        Ok(CertStats { c: c0.max(c1), c0, c1, per_input })
    }

    /// For monotone `f`, the smallest certificate at a 1-input is the
    /// lightest 1-input below it, and at a 0-input the complement of the
    /// heaviest 0-input above it. Two lattice sweeps give every `C(f,x)`.
    fn per_input_certificates_monotone(&self) -> Vec<u32> {
        let size = self.size() as usize;
        let n = self.n as u32;
        const INF: u32 = u32::MAX;
        let mut down = vec![INF; size];
        for idx in 0..size as u64 {
            if !self.get(idx) {
                continue;
            }
            let mut best = idx.count_ones();
            let mut rest = idx;
            while rest != 0 {
                let bit = rest & rest.wrapping_neg();
                rest ^= bit;
                best = best.min(down[(idx ^ bit) as usize]);
            }
            down[idx as usize] = best;
        }
        let mut up = vec![0u32; size];
        for idx in (0..size as u64).rev() {
            if self.get(idx) {
                continue;
            }
            let mut best = idx.count_ones();
            for c in 0..self.n {
                let above = idx | (1u64 << c);
                if above != idx && !self.get(above) {
                    best = best.max(up[above as usize]);
                }
            }
            up[idx as usize] = best;
        }
        (0..size as u64)
            .map(|idx| {
                if self.get(idx) {
                    down[idx as usize]
                } else {
                    n - up[idx as usize]
                }
            })
            .collect()
    }

    fn per_input_certificates_generic(&self) -> Vec<u32> {
        let size = self.size();
        (0..size)
            .map(|idx| self.certificate_size_at(&BitString::from_index_msb(idx, self.n)))
            .collect()
    }

    /// Smallest certificate at `x` by subset enumeration in increasing
    /// size, starting from the sensitivity lower bound.
    pub fn certificate_size_at(&self, x: &BitString) -> u32 {
        let n = self.n;
        let v = self.value(x);
        let start = self.sensitivity(x) as usize;
        for s in start..=n {
            for coords in ColexSubsets::new(n, s) {
                if self.subset_certifies(x, &coords, v) {
                    return s as u32;
                }
            }
        }
        n as u32
    }

    fn subset_certifies(&self, x: &BitString, coords: &[u32], v: bool) -> bool {
        let free: Vec<u32> = (1..=self.n as u32)
            .filter(|i| !coords.contains(i))
            .collect();
        let mut y = x.clone();
        for combo in 0..(1u64 << free.len()) {
            for (j, &i) in free.iter().enumerate() {
                y.set(i, (combo >> j) & 1 == 1);
            }
            if self.value(&y) != v {
                return false;
            }
        }
        true
    }

    /// The unique `p` with `phi(p) = 1/2`, by bisection; requires monotone
    /// nonconstant `f`.
    pub fn critical_probability(&self, tol: f64) -> Result<f64> {
        if self.is_constant().is_some() {
            return Err(Error::ConstantFunction);
        }
        let hist = self.weight_histogram();
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while hi - lo > tol.max(1e-15) / 2.0 {
            let mid = 0.5 * (lo + hi);
            if phi_from_histogram(&hist, self.n, mid) < 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Central-difference check of the derivative identity
    /// `d/dp phi(p) = total flip influence at p`.
    pub fn russo_margulis_residual(&self, p: f64, h: f64) -> Result<f64> {
        if h <= 0.0 || h > p.min(1.0 - p) {
            return Err(Error::InvalidParam(format!(
                "step h={h} must satisfy 0 < h <= min(p, 1-p) for p={p}"
            )));
        }
        let derivative = (self.phi(p + h) - self.phi(p - h)) / (2.0 * h);
        let influence = self.influences(p).total_flip;
        Ok((derivative - influence).abs())
    }

    /// Prime implicants of `f`: supports of the minimal 1-inputs. For
    /// monotone `f` these are exactly the minimal 1-certificate sets.
    pub fn prime_implicants(&self) -> Vec<BitString> {
        let mut out = Vec::new();
        for idx in 0..self.size() {
            if !self.get(idx) {
                continue;
            }
            let minimal = (0..self.n).all(|c| {
                let below = idx & !(1u64 << c);
                below == idx || !self.get(below)
            });
            if minimal {
                out.push(BitString::from_index_msb(idx, self.n));
            }
        }
        out
    }

    /// Prime implicants of `not f`, reported as the zero-sets of the
    /// maximal 0-inputs. For monotone `f`, fixing such a set to 0 forces
    /// `f = 0`, and these are exactly the minimal 0-certificate sets.
    pub fn prime_implicants_complement(&self) -> Vec<BitString> {
        let mut out = Vec::new();
        for idx in 0..self.size() {
            if self.get(idx) {
                continue;
            }
            let maximal = (0..self.n).all(|c| {
                let above = idx | (1u64 << c);
                above == idx || self.get(above)
            });
            if maximal {
                let mut zeros = BitString::zeros(self.n);
                for i in 1..=self.n as u32 {
                    if idx & self.index_bit(i) == 0 {
                        zeros.set(i, true);
                    }
                }
                out.push(zeros);
            }
        }
        out
    }
}

fn phi_from_histogram(hist: &[u64], n: usize, p: f64) -> f64 {
    let mut total = 0.0;
    for (w, &count) in hist.iter().enumerate() {
        if count > 0 {
            total += count as f64 * pw(p, w as i32, (n - w) as i32);
        }
    }
    total
}

fn pw(p: f64, ones: i32, zeros: i32) -> f64 {
    p.powi(ones) * (1.0 - p).powi(zeros)
}

/// Exact per-coordinate influences at one bias.
#[derive(Clone, Debug)]
pub struct Influences {
    pub flip: Vec<f64>,
    pub rerandomized: Vec<f64>,
    pub total_flip: f64,
    pub total_rerandomized: f64,
}

/// Exact certificate complexity profile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertStats {
    pub c: u32,
    pub c0: u32,
    pub c1: u32,
    /// `C(f, x)` indexed by the truth-table index of `x`.
    pub per_input: Vec<u32>,
}

/// All monotone truth tables on exactly `n` coordinates, as packed tables
/// (bit `idx` is the value on the input with truth-table index `idx`).
/// Counts follow the Dedekind numbers: 2, 3, 6, 20, 168, 7581 for n = 0..5.
pub fn all_monotone_tables(n: usize) -> Vec<u64> {
    assert!(n <= 5, "monotone enumeration supported for n <= 5");
    let mut tables: Vec<u64> = vec![0, 1];
    for m in 1..=n {
        let half = 1u32 << (m - 1);
        let mut next = Vec::new();
        // split on coordinate 1 (index MSB): low half is f_{x1=0}, high
        // half is f_{x1=1}; monotone iff lo <= hi pointwise
        for &hi in &tables {
            for &lo in &tables {
                if lo | hi == hi {
                    next.push(lo | (hi << half));
                }
            }
        }
        tables = next;
    }
    tables
}

pub fn monotone_table_count(n: usize) -> usize {
    all_monotone_tables(n).len()
}

/// Everything the `oracle` CLI subcommand reports for one function.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ExactProfile {
    pub n: usize,
    pub monotone: bool,
    pub constant: Option<bool>,
    pub c: u32,
    pub c0: u32,
    pub c1: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_critical: Option<f64>,
    pub p: f64,
    pub phi_at_p: f64,
    pub flip_influences: Vec<f64>,
    pub rerandomized_influences: Vec<f64>,
    pub total_flip_influence: f64,
    pub max_sensitivity: u32,
}

impl ExactProfile {
    pub fn build(spec: &FunctionSpec, p: f64, tol: f64) -> Result<ExactProfile> {
        let table = Table::from_spec(spec)?;
        let monotone = table.is_monotone();
        let constant = table.is_constant();
        let stats = table.certificate_stats()?;
        let p_critical = if monotone && constant.is_none() {
            Some(table.critical_probability(tol)?)
        } else {
            None
        };
        let inf = table.influences(p);
        let max_sensitivity = (0..table.size())
            .map(|idx| table.sensitivity(&BitString::from_index_msb(idx, table.dimension())))
            .max()
            .unwrap_or(0);
        Ok(ExactProfile {
            n: table.dimension(),
            monotone,
            constant,
            c: stats.c,
            c0: stats.c0,
            c1: stats.c1,
            p_critical,
            p,
            phi_at_p: table.phi(p),
            flip_influences: inf.flip,
            rerandomized_influences: inf.rerandomized,
            total_flip_influence: inf.total_flip,
            max_sensitivity,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn table(spec: &FunctionSpec) -> Table {
        Table::from_spec(spec).unwrap()
    }

    #[test]
    fn phi_examples() {
        let conj = table(&FunctionSpec::conjunction(2, [1, 2]));
        assert!((conj.phi(0.5) - 0.25).abs() < TOL);
        // MAJ_3: phi(p) = 3p^2 - 2p^3 by enumeration
        let maj = table(&FunctionSpec::majority(3));
        assert!((maj.phi(0.3) - 0.216).abs() < TOL);
        for p in [0.0, 0.2, 1.0] {
            let expect = 3.0 * p * p - 2.0 * p * p * p;
            assert!((maj.phi(p) - expect).abs() < TOL);
        }
        // phi(1) = f(1^n), phi(0) = f(0^n)
        let tt = table(&FunctionSpec::truth_table(2, "1001"));
        assert!((tt.phi(1.0) - 1.0).abs() < TOL);
        assert!((tt.phi(0.0) - 1.0).abs() < TOL);
    }

    #[test]
    fn influence_examples() {
        let maj = table(&FunctionSpec::majority(3));
        let inf = maj.influences(0.5);
        for i in 0..3 {
            assert!((inf.flip[i] - 0.5).abs() < TOL, "flip {:?}", inf.flip);
            assert!((inf.rerandomized[i] - 0.5).abs() < TOL);
        }
        let dict = table(&FunctionSpec::dictator(4, 1));
        for p in [0.1, 0.5, 0.9] {
            let inf = dict.influences(p);
            assert!((inf.flip[0] - 1.0).abs() < TOL);
            for i in 1..4 {
                assert!(inf.flip[i].abs() < TOL);
            }
        }
        let conj = table(&FunctionSpec::conjunction(2, [1, 2]));
        assert!((conj.influences(0.5).flip[0] - 0.5).abs() < TOL);
    }

    #[test]
    fn sensitivity_examples() {
        let maj = table(&FunctionSpec::majority(3));
        assert_eq!(maj.sensitivity(&BitString::parse01("110").unwrap()), 2);
        let dict = table(&FunctionSpec::dictator(4, 1));
        for idx in 0..16 {
            assert_eq!(dict.sensitivity(&BitString::from_index_msb(idx, 4)), 1);
        }
        let one = table(&FunctionSpec::conjunction(3, []));
        assert_eq!(one.sensitivity(&BitString::zeros(3)), 0);
    }

    #[test]
    fn certificate_stats_examples() {
        let conj = table(&FunctionSpec::conjunction(4, [1, 2]));
        let stats = conj.certificate_stats().unwrap();
        assert_eq!((stats.c, stats.c0, stats.c1), (2, 1, 2));

        let tribes = table(&FunctionSpec::tribes(2, 2));
        let stats = tribes.certificate_stats().unwrap();
        assert_eq!((stats.c0, stats.c1), (2, 2));

        let dict = table(&FunctionSpec::dictator(5, 1));
        assert_eq!(dict.certificate_stats().unwrap().c, 1);
    }

    #[test]
    fn monotone_and_generic_cert_paths_agree() {
        for packed in all_monotone_tables(4) {
            let t = Table::from_packed(4, packed);
            let fast = t.per_input_certificates_monotone();
            let slow = t.per_input_certificates_generic();
            assert_eq!(fast, slow, "table {packed:#06x}");
        }
    }

    #[test]
    fn subcube_certificate_stats() {
        let spec = FunctionSpec::subcube(8, [(1, true), (4, false), (6, true)]);
        let stats = table(&spec).certificate_stats().unwrap();
        assert_eq!(stats.c, 3);
        assert_eq!(stats.c1, 3);
        assert_eq!(stats.c0, 1);
    }

    #[test]
    fn critical_probability_examples() {
        let conj = table(&FunctionSpec::conjunction(2, [1, 2]));
        let p = conj.critical_probability(1e-12).unwrap();
        assert!((p - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
        let maj = table(&FunctionSpec::majority(3));
        assert!((maj.critical_probability(1e-12).unwrap() - 0.5).abs() < 1e-10);
        let dict = table(&FunctionSpec::dictator(6, 3));
        assert!((dict.critical_probability(1e-12).unwrap() - 0.5).abs() < 1e-10);
        let constant = table(&FunctionSpec::conjunction(3, []));
        assert!(matches!(
            constant.critical_probability(1e-9),
            Err(Error::ConstantFunction)
        ));
    }

    #[test]
    fn russo_margulis_examples() {
        let maj = table(&FunctionSpec::majority(3));
        assert!(maj.russo_margulis_residual(0.3, 1e-4).unwrap() <= 1e-6);
        let dict = table(&FunctionSpec::dictator(4, 1));
        assert!(dict.russo_margulis_residual(0.4, 1e-4).unwrap() <= 1e-9);
        let conj = table(&FunctionSpec::conjunction(2, [1, 2]));
        assert!(conj.russo_margulis_residual(0.5, 1e-4).unwrap() <= 1e-6);
        assert!(maj.russo_margulis_residual(0.3, 0.5).is_err());
    }

    #[test]
    fn monotone_enumeration_matches_dedekind_counts() {
        assert_eq!(monotone_table_count(0), 2);
        assert_eq!(monotone_table_count(1), 3);
        assert_eq!(monotone_table_count(2), 6);
        assert_eq!(monotone_table_count(3), 20);
        assert_eq!(monotone_table_count(4), 168);
        assert_eq!(monotone_table_count(5), 7581);
        for packed in all_monotone_tables(3) {
            assert!(Table::from_packed(3, packed).is_monotone());
        }
    }

    #[test]
    fn restriction_table_matches_definition() {
        let t = table(&FunctionSpec::majority(3));
        let r = t.restrict(3, true);
        for idx in 0..8u64 {
            let x = BitString::from_index_msb(idx, 3);
            let mut y = x.clone();
            y.set(3, true);
            assert_eq!(r.value(&x), t.value(&y));
        }
    }
}
