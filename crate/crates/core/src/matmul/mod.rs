//! Boolean matrix multiplication by sequential column search, with exact
//! probe accounting, a word-packed naive oracle, and the witness codec that
//! shortens any instance containing a long all-zero search.

mod witness;

use std::collections::BTreeMap;
use std::fmt;

use rand::RngCore;
use serde::Serialize;
use thiserror::Error;

use crate::codes::{BitString, CodeError};
use crate::rng;

pub use witness::{
    find_witness, matmul_witness_decode, matmul_witness_encode, plant_instance, probe_budget, witness_length_bound,
    MatmulWitnessDescription, WITNESS_TAG_BITS,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatmulError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("expected {expected} bits, got {actual}")]
    BitCount { expected: usize, actual: usize },
    #[error("row {row} has {ones} ones; the witness needs {needed}")]
    InsufficientOnes { row: usize, ones: usize, needed: usize },
    #[error("probe {position} of the search finds a 1")]
    ProbeHitOne { position: usize },
    #[error("unrecognized witness tag")]
    BadTag,
    #[error("{0} trailing bits after the description")]
    TrailingBits(usize),
    #[error(transparent)]
    Code(#[from] CodeError),
}

/// Square boolean matrix, rows packed into 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BoolMatrix {
    n: usize,
    words_per_row: usize,
    words: Vec<u64>,
}

impl BoolMatrix {
    pub fn zeros(n: usize) -> Self {
        let words_per_row = n.div_ceil(64);
        Self { n, words_per_row, words: vec![0; n * words_per_row] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from `n` rows of `'0'`/`'1'` text.
    pub fn from_rows(rows: &[&str]) -> Result<Self, MatmulError> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            let bits: BitString = row.parse()?;
            if bits.len() != n {
                return Err(MatmulError::BitCount { expected: n, actual: bits.len() });
            }
            for (j, b) in bits.iter().enumerate() {
                m.set(i, j, b);
            }
        }
        Ok(m)
    }

    /// Row-major `n × n` matrix from the first `n²` bits of `bits`.
    pub fn from_bits(n: usize, bits: &[bool]) -> Result<Self, MatmulError> {
        if bits.len() != n * n {
            return Err(MatmulError::BitCount { expected: n * n, actual: bits.len() });
        }
        let mut m = Self::zeros(n);
        for (k, &b) in bits.iter().enumerate() {
            if b {
                m.set(k / n, k % n, true);
            }
        }
        Ok(m)
    }

    pub fn random<R: RngCore>(n: usize, rng: &mut R) -> Self {
        let mut m = Self::zeros(n);
        let tail = n % 64;
        for row in m.words.chunks_mut(m.words_per_row) {
            for w in row.iter_mut() {
                *w = rng.next_u64();
            }
            if tail != 0 {
                *row.last_mut().expect("n > 0") &= (1u64 << tail) - 1;
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.n && j < self.n);
        (self.words[i * self.words_per_row + j / 64] >> (j % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, bit: bool) {
        let w = &mut self.words[i * self.words_per_row + j / 64];
        if bit {
            *w |= 1 << (j % 64);
        } else {
            *w &= !(1 << (j % 64));
        }
    }

    fn row_words(&self, i: usize) -> &[u64] {
        &self.words[i * self.words_per_row..(i + 1) * self.words_per_row]
    }

    /// Column indices of the ones in row `i`, ascending.
    pub fn row_ones(&self, i: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for (w, &word) in self.row_words(i).iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                out.push(w * 64 + bits.trailing_zeros() as usize);
                bits &= bits - 1;
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in self.row_ones(i) {
                t.set(j, i, true);
            }
        }
        t
    }

    /// Row-major bits.
    pub fn to_bits(&self) -> BitString {
        let mut out = Vec::with_capacity(self.n * self.n);
        for i in 0..self.n {
            out.extend((0..self.n).map(|j| self.get(i, j)));
        }
        BitString::from_bits(out)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

impl fmt::Debug for BoolMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BoolMatrix({})", self.n)?;
        for i in 0..self.n {
            for j in 0..self.n {
                f.write_str(if self.get(i, j) { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// `A` then `B`, row-major: the `2n²`-bit string an instance is identified with.
pub fn pair_to_bits(a: &BoolMatrix, b: &BoolMatrix) -> BitString {
    a.to_bits().concat(&b.to_bits())
}

pub fn pair_from_bits(n: usize, bits: &BitString) -> Result<(BoolMatrix, BoolMatrix), MatmulError> {
    if bits.len() != 2 * n * n {
        return Err(MatmulError::BitCount { expected: 2 * n * n, actual: bits.len() });
    }
    let (a, b) = bits.as_slice().split_at(n * n);
    Ok((BoolMatrix::from_bits(n, a)?, BoolMatrix::from_bits(n, b)?))
}

/// Uniform instance for `(master_seed, trial)` at dimension `n`.
pub fn random_pair(n: usize, master_seed: u64, trial: u64) -> (BoolMatrix, BoolMatrix) {
    let mut r = rng::trial_stream(master_seed, rng::tag::MATMUL, n as u64, trial);
    let a = BoolMatrix::random(n, &mut r);
    let b = BoolMatrix::random(n, &mut r);
    (a, b)
}

fn check_dims(a: &BoolMatrix, b: &BoolMatrix) -> Result<usize, MatmulError> {
    if a.n != b.n {
        return Err(MatmulError::DimensionMismatch { left: a.n, right: b.n });
    }
    Ok(a.n)
}

/// `c_ij = OR_k (a_ik AND b_kj)`, one word-AND per 64 terms.
pub fn naive_multiply(a: &BoolMatrix, b: &BoolMatrix) -> Result<BoolMatrix, MatmulError> {
    let n = check_dims(a, b)?;
    let bt = b.transpose();
    let mut c = BoolMatrix::zeros(n);
    for i in 0..n {
        let row = a.row_words(i);
        for j in 0..n {
            let hit = row.iter().zip(bt.row_words(j)).any(|(x, y)| x & y != 0);
            c.set(i, j, hit);
        }
    }
    Ok(c)
}

/// Probe counts for every `(i, j)` search of one multiplication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiplyCounters {
    n: usize,
    depth: Vec<u32>,
    found: Vec<bool>,
    row_ones: Vec<usize>,
    row_probes: Vec<u64>,
    total_probes: u64,
}

impl MultiplyCounters {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Probes made by search `(i, j)`; `m_i` when no 1 was found, 0 for an all-zero row.
    pub fn search_depth(&self, i: usize, j: usize) -> u32 {
        self.depth[i * self.n + j]
    }

    /// Whether search `(i, j)` found a 1.
    pub fn resolved(&self, i: usize, j: usize) -> bool {
        self.found[i * self.n + j]
    }

    /// `m_i`, the number of ones in row `i` of `A`.
    pub fn row_ones(&self, i: usize) -> usize {
        self.row_ones[i]
    }

    pub fn row_probes(&self, i: usize) -> u64 {
        self.row_probes[i]
    }

    pub fn total_probes(&self) -> u64 {
        self.total_probes
    }

    pub fn max_depth(&self) -> u32 {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// Probes plus `n` per row for building the index lists.
    pub fn runtime_proxy(&self) -> u64 {
        self.total_probes + (self.n * self.n) as u64
    }
}

/// QuickMultiply: for each row `i` list the ones `j_1 < … < j_m` of `A`, then
/// for each column `j` scan `b_{j_1,j}, …, b_{j_m,j}` and stop at the first 1.
pub fn quick_multiply(a: &BoolMatrix, b: &BoolMatrix) -> Result<(BoolMatrix, MultiplyCounters), MatmulError> {
    let n = check_dims(a, b)?;
    let mut c = BoolMatrix::zeros(n);
    let mut counters = MultiplyCounters {
        n,
        depth: vec![0; n * n],
        found: vec![false; n * n],
        row_ones: vec![0; n],
        row_probes: vec![0; n],
        total_probes: 0,
    };
    for i in 0..n {
        let list = a.row_ones(i);
        counters.row_ones[i] = list.len();
        for j in 0..n {
            let mut probes = 0u32;
            let mut hit = false;
            for &k in &list {
                probes += 1;
                if b.get(k, j) {
                    hit = true;
                    break;
                }
            }
            c.set(i, j, hit);
            counters.depth[i * n + j] = probes;
            counters.found[i * n + j] = hit;
            counters.row_probes[i] += u64::from(probes);
        }
        counters.total_probes += counters.row_probes[i];
    }
    Ok((c, counters))
}

/// Depths at which the searches of one row resolved.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DepthHistogram {
    /// depth `k` → number of searches whose first 1 was probe `k`.
    pub resolved: BTreeMap<u32, u64>,
    /// Searches that exhausted the list without finding a 1.
    pub unresolved: u64,
}

impl DepthHistogram {
    pub fn count(&self, depth: u32) -> u64 {
        self.resolved.get(&depth).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.resolved.values().sum::<u64>() + self.unresolved
    }

    pub fn record(&mut self, depth: Option<u32>) {
        match depth {
            Some(d) => *self.resolved.entry(d).or_default() += 1,
            None => self.unresolved += 1,
        }
    }
}

pub fn search_depth_histogram(counters: &MultiplyCounters, i: usize) -> Result<DepthHistogram, MatmulError> {
    if i >= counters.n {
        return Err(MatmulError::IndexOutOfRange { index: i, n: counters.n });
    }
    let mut h = DepthHistogram::default();
    for j in 0..counters.n {
        h.record(counters.resolved(i, j).then(|| counters.search_depth(i, j)));
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Triple-loop product straight from the definition.
    fn definitional_product(a: &BoolMatrix, b: &BoolMatrix) -> BoolMatrix {
        let n = a.n();
        let mut c = BoolMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                c.set(i, j, (0..n).any(|k| a.get(i, k) && b.get(k, j)));
            }
        }
        c
    }

    #[test]
    fn naive_examples() {
        let swap = BoolMatrix::from_rows(&["01", "10"]).unwrap();
        assert_eq!(naive_multiply(&BoolMatrix::identity(2), &swap).unwrap(), swap);
        let (_, b) = random_pair(3, 1, 0);
        assert_eq!(naive_multiply(&BoolMatrix::zeros(3), &b).unwrap(), BoolMatrix::zeros(3));
        let ones = BoolMatrix::from_rows(&["11", "11"]).unwrap();
        let e = BoolMatrix::from_rows(&["10", "00"]).unwrap();
        assert_eq!(naive_multiply(&ones, &e).unwrap(), BoolMatrix::from_rows(&["10", "10"]).unwrap());
        assert_eq!(
            naive_multiply(&ones, &BoolMatrix::zeros(3)),
            Err(MatmulError::DimensionMismatch { left: 2, right: 3 })
        );
    }

    #[test]
    fn quick_all_ones() {
        let ones = BoolMatrix::from_rows(&["11", "11"]).unwrap();
        let (c, counters) = quick_multiply(&ones, &ones).unwrap();
        assert_eq!(c, ones);
        assert_eq!(counters.total_probes(), 4);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(counters.search_depth(i, j), 1);
            }
        }
    }

    #[test]
    fn quick_zero_row() {
        let a = BoolMatrix::from_rows(&["000", "101", "111"]).unwrap();
        let (_, b) = random_pair(3, 9, 0);
        let (c, counters) = quick_multiply(&a, &b).unwrap();
        for j in 0..3 {
            assert_eq!(counters.search_depth(0, j), 0);
            assert!(!c.get(0, j));
        }
    }

    #[test]
    fn quick_matches_oracles_random_64() {
        for trial in 0..5 {
            let (a, b) = random_pair(64, 2024, trial);
            let (c, _) = quick_multiply(&a, &b).unwrap();
            assert_eq!(c, naive_multiply(&a, &b).unwrap());
            assert_eq!(c, definitional_product(&a, &b));
        }
    }

    #[test]
    fn exhaustive_2x2() {
        for v in 0..1u32 << 8 {
            let bits: Vec<bool> = (0..8).map(|k| (v >> k) & 1 == 1).collect();
            let (a, b) = pair_from_bits(2, &BitString::from_bits(bits)).unwrap();
            let (c, _) = quick_multiply(&a, &b).unwrap();
            assert_eq!(c, definitional_product(&a, &b));
        }
    }

    #[test]
    fn probe_accounting() {
        let (a, b) = random_pair(40, 3, 1);
        let (_, counters) = quick_multiply(&a, &b).unwrap();
        let mut sum = 0;
        for i in 0..40 {
            let list = a.row_ones(i);
            for j in 0..40 {
                let d = counters.search_depth(i, j) as usize;
                assert!(d <= counters.row_ones(i));
                if counters.resolved(i, j) {
                    assert!(b.get(list[d - 1], j));
                    assert!(list[..d - 1].iter().all(|&k| !b.get(k, j)));
                } else {
                    assert_eq!(d, list.len());
                    assert!(list.iter().all(|&k| !b.get(k, j)));
                }
                sum += d as u64;
            }
        }
        assert_eq!(sum, counters.total_probes());
        let hist_mass: u64 = (0..40)
            .map(|i| {
                let h = search_depth_histogram(&counters, i).unwrap();
                assert_eq!(h.total(), 40);
                h.resolved.iter().map(|(k, c)| u64::from(*k) * c).sum::<u64>()
                    + h.unresolved * counters.row_ones(i) as u64
            })
            .sum();
        assert_eq!(hist_mass, counters.total_probes());
    }

    #[test]
    fn histogram_examples() {
        let ones = BoolMatrix::from_rows(&["1111", "1111", "1111", "1111"]).unwrap();
        let (_, counters) = quick_multiply(&ones, &ones).unwrap();
        let h = search_depth_histogram(&counters, 2).unwrap();
        assert_eq!(h.count(1), 4);
        assert_eq!(h.total(), 4);

        let a = BoolMatrix::from_rows(&["1010", "0000", "0000", "0000"]).unwrap();
        let b = BoolMatrix::from_rows(&["0111", "1111", "0111", "1111"]).unwrap();
        let (_, counters) = quick_multiply(&a, &b).unwrap();
        let h = search_depth_histogram(&counters, 0).unwrap();
        assert_eq!(h.unresolved, 1);
        assert_eq!(counters.search_depth(0, 0), 2);
        assert!(search_depth_histogram(&counters, 4).is_err());
    }

    #[test]
    fn first_probe_concentration_256() {
        let n = 256usize;
        let slack = 4.0 * ((n as f64) * (n as f64).log2()).sqrt();
        let (a, b) = random_pair(n, 11, 0);
        let (_, counters) = quick_multiply(&a, &b).unwrap();
        for i in (0..n).filter(|&i| counters.row_ones(i) > 0) {
            let c1 = search_depth_histogram(&counters, i).unwrap().count(1) as f64;
            assert!((c1 - n as f64 / 2.0).abs() <= slack, "row {i}: {c1}");
        }
    }

    #[test]
    fn bit_round_trip() {
        let (a, b) = random_pair(70, 5, 5);
        assert_eq!(pair_from_bits(70, &pair_to_bits(&a, &b)).unwrap(), (a, b));
    }
}
