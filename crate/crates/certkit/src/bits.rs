//! Bit strings over `{0,1}^n` with 1-based coordinates.
//!
//! Coordinates are indexed `1..=n` to match the usual `[n]` convention.
//! Internally a string is packed into `u64` words, coordinate `i` at bit
//! `(i-1) % 64` of word `(i-1) / 64`.

use std::fmt;

/// A point of the hypercube `{0,1}^n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    n: usize,
    words: Vec<u64>,
}

pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

/// Mask of valid lane bits for the final word of an `n`-bit string.
pub(crate) fn tail_mask(n: usize) -> u64 {
    let r = n % 64;
    if r == 0 {
        !0
    } else {
        (1u64 << r) - 1
    }
}

impl BitString {
    /// The all-zeros string `0^n`.
    pub fn zeros(n: usize) -> Self {
        BitString { n, words: vec![0; words_for(n)] }
    }

    /// The all-ones string `1^n`.
    pub fn ones(n: usize) -> Self {
        let mut s = BitString { n, words: vec![!0u64; words_for(n)] };
        if let Some(last) = s.words.last_mut() {
            *last &= tail_mask(n);
        }
        s
    }

    /// The string with value `b` in every coordinate.
    pub fn constant(n: usize, b: bool) -> Self {
        if b {
            Self::ones(n)
        } else {
            Self::zeros(n)
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut s = Self::zeros(bits.len());
        for (j, &b) in bits.iter().enumerate() {
            if b {
                s.set(j as u32 + 1, true);
            }
        }
        s
    }

    /// Parse a `01` string; character `j` (0-based) is coordinate `j+1`.
    pub fn parse01(text: &str) -> Result<Self, String> {
        let mut s = Self::zeros(text.len());
        for (j, c) in text.chars().enumerate() {
            match c {
                '0' => {}
                '1' => s.set(j as u32 + 1, true),
                other => return Err(format!("invalid bit character {other:?}")),
            }
        }
        Ok(s)
    }

    /// Build the point whose truth-table index is `idx`, with coordinate 1
    /// as the most significant bit of the index.
    pub fn from_index_msb(idx: u64, n: usize) -> Self {
        let mut s = Self::zeros(n);
        for i in 1..=n as u32 {
            if (idx >> (n as u32 - i)) & 1 == 1 {
                s.set(i, true);
            }
        }
        s
    }

    /// Truth-table index of this point, coordinate 1 as the most significant bit.
    pub fn index_msb(&self) -> u64 {
        debug_assert!(self.n <= 63);
        let mut idx = 0u64;
        for i in 1..=self.n as u32 {
            idx = (idx << 1) | self.get(i) as u64;
        }
        idx
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: u32) -> bool {
        debug_assert!(i >= 1 && i as usize <= self.n);
        let j = (i - 1) as usize;
        (self.words[j / 64] >> (j % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: u32, b: bool) {
        debug_assert!(i >= 1 && i as usize <= self.n);
        let j = (i - 1) as usize;
        if b {
            self.words[j / 64] |= 1u64 << (j % 64);
        } else {
            self.words[j / 64] &= !(1u64 << (j % 64));
        }
    }

    /// The string with coordinate `i` flipped (`x` with an `⊕i`).
    pub fn flip(&self, i: u32) -> Self {
        let mut y = self.clone();
        let j = (i - 1) as usize;
        y.words[j / 64] ^= 1u64 << (j % 64);
        y
    }

    /// Number of coordinates set to 1.
    pub fn weight(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    /// Coordinatewise order: true iff `self <= other` in every coordinate.
    pub fn le(&self, other: &BitString) -> bool {
        debug_assert_eq!(self.n, other.n);
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = u32> + '_ {
        (1..=self.n as u32).filter(move |&i| self.get(i))
    }

    pub fn to_string01(&self) -> String {
        (1..=self.n as u32)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect()
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({})", self.to_string01())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string01())
    }
}

/// Iterator over all k-element subsets of `{1..=n}` in colexicographic order.
///
/// Colex order compares subsets by their largest differing element, so for
/// n=4, k=2 the order is {1,2}, {1,3}, {2,3}, {1,4}, {2,4}, {3,4}.
pub struct ColexSubsets {
    n: u32,
    cur: Vec<u32>,
    done: bool,
}

impl ColexSubsets {
    pub fn new(n: usize, k: usize) -> Self {
        let n = n as u32;
        if k as u32 > n {
            return ColexSubsets { n, cur: Vec::new(), done: true };
        }
        ColexSubsets {
            n,
            cur: (1..=k as u32).collect(),
            done: false,
        }
    }
}

impl Iterator for ColexSubsets {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let out = self.cur.clone();
        let k = self.cur.len();
        if k == 0 {
            self.done = true;
            return Some(out);
        }
        // Find the lowest position that can advance without colliding with
        // the next element (or n at the top), reset everything below it.
        let mut j = 0;
        loop {
            if j == k {
                self.done = true;
                break;
            }
            let limit = if j + 1 < k { self.cur[j + 1] - 1 } else { self.n };
            if self.cur[j] < limit {
                self.cur[j] += 1;
                for (r, slot) in self.cur.iter_mut().enumerate().take(j) {
                    *slot = r as u32 + 1;
                }
                break;
            }
            j += 1;
        }
        Some(out)
    }
}

/// Binomial coefficient in u128, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc.saturating_mul((n - j) as u128) / (j + 1) as u128;
    }
    acc
}
