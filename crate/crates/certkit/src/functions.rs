//! Implicit descriptions of Boolean functions and their evaluators.
//!
//! A [`FunctionSpec`] is a serializable description of `f: {0,1}^n -> {0,1}`
//! from one of the stock families (conjunction, dictator, majority, tribes,
//! monotone DNF, explicit truth table, subcube indicator). Specs compile to
//! an [`Evaluator`] that answers single points and 64-sample blocks.
//!
//! The JSON form uses a `kind` tag and 1-based coordinates, e.g.
//! `{"kind":"conjunction","n":128,"vars":[3,17,42]}` or
//! `{"kind":"truth_table","n":3,"bits":"00010111"}` where `bits[i]` is the
//! value on the input whose integer encoding is `i` with coordinate 1 as
//! the most significant bit.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::bits::{words_for, BitString};
use crate::error::{Error, Result};

pub const TRUTH_TABLE_MAX_N: usize = 24;

/// Serializable description of a Boolean function.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    /// AND of the listed coordinates; empty `vars` is the constant 1.
    Conjunction { n: usize, vars: BTreeSet<u32> },
    /// `f(x) = x_i`.
    Dictator { n: usize, i: u32 },
    /// Majority over all `n` coordinates; `n` must be odd.
    Majority { n: usize },
    /// OR of `count` disjoint ANDs of `width` consecutive coordinates.
    Tribes { n: usize, width: usize, count: usize },
    /// OR of ANDs of positive literals; an empty term list is the constant 0.
    MonotoneDnf { n: usize, terms: Vec<BTreeSet<u32>> },
    /// Explicit truth table as a 01 string of length `2^n`, indexed with
    /// coordinate 1 as the most significant bit. Carries no monotonicity
    /// guarantee until checked.
    TruthTable { n: usize, bits: String },
    /// Indicator of the subcube fixing the given coordinates to the given
    /// bits (values 0 or 1).
    Subcube {
        n: usize,
        #[serde(with = "coord_keyed_map")]
        fixed: BTreeMap<u32, u8>,
    },
}

/// JSON objects carry string keys; this adapter maps them to coordinates.
mod coord_keyed_map {
    use std::collections::BTreeMap;

    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<u32, u8>,
        ser: S,
    ) -> Result<S::Ok, S::Error> {
        map.iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect::<BTreeMap<String, u8>>()
            .serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> Result<BTreeMap<u32, u8>, D::Error> {
        let raw = BTreeMap::<String, u8>::deserialize(de)?;
        raw.into_iter()
            .map(|(k, v)| {
                k.parse::<u32>()
                    .map(|k| (k, v))
                    .map_err(|_| D::Error::custom(format!("invalid coordinate key {k:?}")))
            })
            .collect()
    }
}

impl FunctionSpec {
    pub fn conjunction(n: usize, vars: impl IntoIterator<Item = u32>) -> Self {
        FunctionSpec::Conjunction { n, vars: vars.into_iter().collect() }
    }

    pub fn dictator(n: usize, i: u32) -> Self {
        FunctionSpec::Dictator { n, i }
    }

    pub fn majority(n: usize) -> Self {
        FunctionSpec::Majority { n }
    }

    pub fn tribes(width: usize, count: usize) -> Self {
        FunctionSpec::Tribes { n: width * count, width, count }
    }

    pub fn monotone_dnf(n: usize, terms: Vec<Vec<u32>>) -> Self {
        FunctionSpec::MonotoneDnf {
            n,
            terms: terms.into_iter().map(|t| t.into_iter().collect()).collect(),
        }
    }

    pub fn truth_table(n: usize, bits: impl Into<String>) -> Self {
        FunctionSpec::TruthTable { n, bits: bits.into() }
    }

    pub fn subcube(n: usize, fixed: impl IntoIterator<Item = (u32, bool)>) -> Self {
        FunctionSpec::Subcube {
            n,
            fixed: fixed.into_iter().map(|(i, b)| (i, b as u8)).collect(),
        }
    }

    pub fn dimension(&self) -> usize {
        match *self {
            FunctionSpec::Conjunction { n, .. }
            | FunctionSpec::Dictator { n, .. }
            | FunctionSpec::Majority { n }
            | FunctionSpec::Tribes { n, .. }
            | FunctionSpec::MonotoneDnf { n, .. }
            | FunctionSpec::TruthTable { n, .. }
            | FunctionSpec::Subcube { n, .. } => n,
        }
    }

    /// Whether this family is monotone by construction. Truth tables and
    /// subcubes fixing any coordinate to 0 are not.
    pub fn structurally_monotone(&self) -> bool {
        match self {
            FunctionSpec::Conjunction { .. }
            | FunctionSpec::Dictator { .. }
            | FunctionSpec::Majority { .. }
            | FunctionSpec::Tribes { .. }
            | FunctionSpec::MonotoneDnf { .. } => true,
            FunctionSpec::TruthTable { .. } => false,
            FunctionSpec::Subcube { fixed, .. } => fixed.values().all(|&b| b == 1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dimension();
        let coord_ok = |i: u32| i >= 1 && i as usize <= n;
        match self {
            FunctionSpec::Conjunction { vars, .. } => {
                if let Some(&bad) = vars.iter().find(|&&i| !coord_ok(i)) {
                    return Err(Error::InvalidSpec(format!(
                        "conjunction variable {bad} outside [1, {n}]"
                    )));
                }
            }
            FunctionSpec::Dictator { i, .. } => {
                if !coord_ok(*i) {
                    return Err(Error::InvalidSpec(format!(
                        "dictator coordinate {i} outside [1, {n}]"
                    )));
                }
            }
            FunctionSpec::Majority { n } => {
                if *n == 0 || n % 2 == 0 {
                    return Err(Error::InvalidSpec(format!(
                        "majority requires odd n, got {n}"
                    )));
                }
            }
            FunctionSpec::Tribes { n, width, count } => {
                if *width == 0 || *count == 0 || width * count != *n {
                    return Err(Error::InvalidSpec(format!(
                        "tribes requires width*count == n, got {width}*{count} != {n}"
                    )));
                }
            }
            FunctionSpec::MonotoneDnf { terms, .. } => {
                for term in terms {
                    if term.is_empty() {
                        return Err(Error::InvalidSpec(
                            "monotone_dnf term must be nonempty".into(),
                        ));
                    }
                    if let Some(&bad) = term.iter().find(|&&i| !coord_ok(i)) {
                        return Err(Error::InvalidSpec(format!(
                            "monotone_dnf literal {bad} outside [1, {n}]"
                        )));
                    }
                }
            }
            FunctionSpec::TruthTable { n, bits } => {
                if *n > TRUTH_TABLE_MAX_N {
                    return Err(Error::DimensionTooLarge { n: *n, max: TRUTH_TABLE_MAX_N });
                }
                if bits.len() != 1usize << n {
                    return Err(Error::InvalidSpec(format!(
                        "truth table for n={n} needs {} bits, got {}",
                        1usize << n,
                        bits.len()
                    )));
                }
                if let Some(bad) = bits.chars().find(|c| *c != '0' && *c != '1') {
                    return Err(Error::InvalidSpec(format!(
                        "truth table contains non-binary character {bad:?}"
                    )));
                }
            }
            FunctionSpec::Subcube { fixed, .. } => {
                for (&i, &b) in fixed {
                    if !coord_ok(i) {
                        return Err(Error::InvalidSpec(format!(
                            "subcube coordinate {i} outside [1, {n}]"
                        )));
                    }
                    if b > 1 {
                        return Err(Error::InvalidSpec(format!(
                            "subcube bit for coordinate {i} must be 0 or 1, got {b}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn compile(&self) -> Result<Evaluator> {
        self.validate()?;
        let n = self.dimension();
        let ev = match self {
            FunctionSpec::Conjunction { vars, .. } => Evaluator {
                n,
                kind: EvalKind::Conjunction { mask: Mask::from_coords(n, vars.iter().copied()) },
            },
            FunctionSpec::Dictator { i, .. } => Evaluator {
                n,
                kind: EvalKind::Dictator { coord0: (*i - 1) as usize },
            },
            FunctionSpec::Majority { n } => Evaluator {
                n: *n,
                kind: EvalKind::Majority { threshold: (*n as u32 + 1) / 2 },
            },
            FunctionSpec::Tribes { n, width, count } => {
                let terms = (0..*count)
                    .map(|t| {
                        let lo = (t * width + 1) as u32;
                        Mask::from_coords(*n, lo..lo + *width as u32)
                    })
                    .collect();
                Evaluator { n: *n, kind: EvalKind::Dnf { terms } }
            }
            FunctionSpec::MonotoneDnf { n, terms } => Evaluator {
                n: *n,
                kind: EvalKind::Dnf {
                    terms: terms
                        .iter()
                        .map(|t| Mask::from_coords(*n, t.iter().copied()))
                        .collect(),
                },
            },
            FunctionSpec::TruthTable { n, bits } => {
                let mut table = vec![0u64; words_for(1 << n)];
                for (idx, c) in bits.chars().enumerate() {
                    if c == '1' {
                        table[idx / 64] |= 1u64 << (idx % 64);
                    }
                }
                Evaluator { n: *n, kind: EvalKind::TruthTable { table } }
            }
            FunctionSpec::Subcube { n, fixed } => Evaluator {
                n: *n,
                kind: EvalKind::Subcube {
                    ones: Mask::from_coords(*n, fixed.iter().filter(|(_, &b)| b == 1).map(|(&i, _)| i)),
                    zeros: Mask::from_coords(*n, fixed.iter().filter(|(_, &b)| b == 0).map(|(&i, _)| i)),
                },
            },
        };
        Ok(ev)
    }
}

/// Coordinate-set mask packed like [`BitString`].
#[derive(Clone, Debug)]
pub(crate) struct Mask {
    words: Vec<u64>,
    coords: Vec<u32>,
}

impl Mask {
    fn from_coords(n: usize, coords: impl IntoIterator<Item = u32>) -> Self {
        let mut words = vec![0u64; words_for(n)];
        let mut list = Vec::new();
        for i in coords {
            let j = (i - 1) as usize;
            words[j / 64] |= 1u64 << (j % 64);
            list.push(i);
        }
        Mask { words, coords: list }
    }

    fn covers(&self, x: &BitString) -> bool {
        self.words
            .iter()
            .zip(x.words())
            .all(|(m, w)| m & !w == 0)
    }

    fn disjoint_from(&self, x: &BitString) -> bool {
        self.words.iter().zip(x.words()).all(|(m, w)| m & w == 0)
    }
}

/// Lane-parallel access to sampled coordinate planes.
///
/// `plane(c)` returns a word whose bit `j` is coordinate `c+1` of sample
/// `j` in the current 64-sample block. Implementations must return the
/// same word when the same coordinate is requested twice in a block.
pub trait PlaneAccess {
    fn dim(&self) -> usize;
    fn plane(&mut self, coord0: usize) -> u64;
}

#[derive(Clone, Debug)]
enum EvalKind {
    Conjunction { mask: Mask },
    Dictator { coord0: usize },
    Majority { threshold: u32 },
    Dnf { terms: Vec<Mask> },
    TruthTable { table: Vec<u64> },
    Subcube { ones: Mask, zeros: Mask },
}

/// Compiled evaluator for a [`FunctionSpec`].
#[derive(Clone, Debug)]
pub struct Evaluator {
    n: usize,
    kind: EvalKind,
}

impl Evaluator {
    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn eval(&self, x: &BitString) -> bool {
        debug_assert_eq!(x.len(), self.n);
        match &self.kind {
            EvalKind::Conjunction { mask } => mask.covers(x),
            EvalKind::Dictator { coord0 } => x.get(*coord0 as u32 + 1),
            EvalKind::Majority { threshold } => x.weight() >= *threshold,
            EvalKind::Dnf { terms } => terms.iter().any(|t| t.covers(x)),
            EvalKind::TruthTable { table } => {
                let idx = x.index_msb() as usize;
                (table[idx / 64] >> (idx % 64)) & 1 == 1
            }
            EvalKind::Subcube { ones, zeros } => ones.covers(x) && zeros.disjoint_from(x),
        }
    }

    /// Evaluate 64 samples presented as coordinate planes; bit `j` of the
    /// result is the value on sample `j`.
    pub fn eval_block(&self, planes: &mut dyn PlaneAccess) -> u64 {
        match &self.kind {
            EvalKind::Conjunction { mask } => {
                let mut acc = !0u64;
                for &i in &mask.coords {
                    acc &= planes.plane((i - 1) as usize);
                    if acc == 0 {
                        break;
                    }
                }
                acc
            }
            EvalKind::Dictator { coord0 } => planes.plane(*coord0),
            EvalKind::Dnf { terms } => {
                let mut out = 0u64;
                for term in terms {
                    let mut acc = !out; // lanes still undetermined
                    for &i in &term.coords {
                        acc &= planes.plane((i - 1) as usize);
                        if acc == 0 {
                            break;
                        }
                    }
                    out |= acc;
                    if out == !0u64 {
                        break;
                    }
                }
                out
            }
            EvalKind::Subcube { ones, zeros } => {
                let mut acc = !0u64;
                for &i in &ones.coords {
                    acc &= planes.plane((i - 1) as usize);
                    if acc == 0 {
                        break;
                    }
                }
                for &i in &zeros.coords {
                    acc &= !planes.plane((i - 1) as usize);
                    if acc == 0 {
                        break;
                    }
                }
                acc
            }
            EvalKind::Majority { .. } | EvalKind::TruthTable { .. } => {
                self.eval_block_by_transpose(planes)
            }
        }
    }

    /// Fallback block path: materialize every plane and evaluate lane by lane.
    fn eval_block_by_transpose(&self, planes: &mut dyn PlaneAccess) -> u64 {
        let n = self.n;
        let all: Vec<u64> = (0..n).map(|c| planes.plane(c)).collect();
        let mut out = 0u64;
        let mut x = BitString::zeros(n);
        for lane in 0..64u32 {
            for (c, &w) in all.iter().enumerate() {
                x.set(c as u32 + 1, (w >> lane) & 1 == 1);
            }
            if self.eval(&x) {
                out |= 1u64 << lane;
            }
        }
        out
    }
}

/// Plane view of fixed (restricted) coordinates layered over a source.
pub(crate) struct OverridePlanes<'a> {
    pub inner: &'a mut dyn PlaneAccess,
    pub fixed: &'a [u64],
    pub values: &'a [u64],
}

impl PlaneAccess for OverridePlanes<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn plane(&mut self, coord0: usize) -> u64 {
        let (w, b) = (coord0 / 64, coord0 % 64);
        if (self.fixed[w] >> b) & 1 == 1 {
            if (self.values[w] >> b) & 1 == 1 {
                !0
            } else {
                0
            }
        } else {
            self.inner.plane(coord0)
        }
    }
}

/// Planes read from an explicit list of already-materialized samples.
pub(crate) struct SamplePlanes<'a> {
    pub samples: &'a [BitString],
    pub n: usize,
}

impl PlaneAccess for SamplePlanes<'_> {
    fn dim(&self) -> usize {
        self.n
    }

    fn plane(&mut self, coord0: usize) -> u64 {
        let mut w = 0u64;
        for (lane, s) in self.samples.iter().enumerate() {
            if s.get(coord0 as u32 + 1) {
                w |= 1u64 << lane;
            }
        }
        w
    }
}

/// Mask selecting the low `lanes` bits of a block result.
pub(crate) fn lanes_mask(lanes: u32) -> u64 {
    if lanes >= 64 {
        !0
    } else {
        (1u64 << lanes) - 1
    }
}
