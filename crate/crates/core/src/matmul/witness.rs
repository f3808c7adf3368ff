//! Shorter encoding of an instance whose search `(i, j)` sees `t` zeros in a row.
//!
//! Layout, with no delimiters between items:
//!
//! ```text
//! tag (8 bits) | E_2(i) | E_2(j) | A row-major | B row-major minus the t probed zeros
//! ```
//!
//! The tag is `1010` followed by `⌈log₂ n⌉ mod 16`. The decoder rebuilds
//! row `i` of `A` before it reaches `B`, so it knows which `t` bits of column
//! `j` to reinsert.

use crate::codes::{decode_from, encode_into, encoded_len, from_index, index_of, BitReader, BitString, CodeLevel};

use super::{quick_multiply, random_pair, BoolMatrix, MatmulError};

pub const WITNESS_TAG_BITS: usize = 8;
const TAG_MAGIC: u64 = 0b1010;

const E2: CodeLevel = CodeLevel::E2;

/// `t = ⌈4 log₂ n⌉ = ⌈log₂ n⁴⌉`, computed in integers.
pub fn probe_budget(n: usize) -> usize {
    let n4 = (n as u128).pow(4);
    if n4 <= 1 {
        0
    } else {
        ((n4 - 1).ilog2() + 1) as usize
    }
}

fn log_class(n: usize) -> u64 {
    if n <= 1 {
        0
    } else {
        u64::from((n - 1).ilog2() + 1) & 0xF
    }
}

/// A self-delimiting witness description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatmulWitnessDescription {
    pub bits: BitString,
    /// Bits of the instance left out.
    pub omitted: usize,
}

impl MatmulWitnessDescription {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Largest description the codec can emit at dimension `n`.
pub fn witness_length_bound(n: usize) -> usize {
    let widest_index =
        (0..n as u64).map(|i| encoded_len(E2, &from_index(i)).expect("E_2 has a finite length")).max().unwrap_or(0);
    WITNESS_TAG_BITS + 2 * widest_index + 2 * n * n - probe_budget(n)
}

/// Encodes `(A, B)` by dropping the first `t` probes of search `(i, j)`.
///
/// Refuses unless row `i` of `A` has at least `t` ones and the first `t`
/// probed bits of column `j` of `B` are all zero.
pub fn matmul_witness_encode(
    a: &BoolMatrix,
    b: &BoolMatrix,
    i: usize,
    j: usize,
) -> Result<MatmulWitnessDescription, MatmulError> {
    let n = a.n();
    if b.n() != n {
        return Err(MatmulError::DimensionMismatch { left: n, right: b.n() });
    }
    for index in [i, j] {
        if index >= n {
            return Err(MatmulError::IndexOutOfRange { index, n });
        }
    }
    let t = probe_budget(n);
    let list = a.row_ones(i);
    if let Some(k) = list.iter().take(t).position(|&k| b.get(k, j)) {
        return Err(MatmulError::ProbeHitOne { position: k + 1 });
    }
    if list.len() < t {
        return Err(MatmulError::InsufficientOnes { row: i, ones: list.len(), needed: t });
    }
    let probed = &list[..t];

    let mut bits = BitString::from_uint((TAG_MAGIC << 4) | log_class(n), WITNESS_TAG_BITS);
    encode_into(E2, &from_index(i as u64), &mut bits)?;
    encode_into(E2, &from_index(j as u64), &mut bits)?;
    bits.extend_from(&a.to_bits());
    for r in 0..n {
        for c in 0..n {
            if c == j && probed.binary_search(&r).is_ok() {
                continue;
            }
            bits.push(b.get(r, c));
        }
    }
    Ok(MatmulWitnessDescription { bits, omitted: t })
}

fn read_index(reader: &mut BitReader<'_>, n: usize) -> Result<usize, MatmulError> {
    let s = decode_from(E2, reader)?;
    let index = index_of(&s).map_or(usize::MAX, |v| v as usize);
    if index >= n {
        return Err(MatmulError::IndexOutOfRange { index, n });
    }
    Ok(index)
}

/// Inverse of [`matmul_witness_encode`].
pub fn matmul_witness_decode(d: &MatmulWitnessDescription, n: usize) -> Result<(BoolMatrix, BoolMatrix), MatmulError> {
    let mut reader = BitReader::new(&d.bits);
    let tag = reader.read_uint(WITNESS_TAG_BITS)?;
    if tag >> 4 != TAG_MAGIC {
        return Err(MatmulError::BadTag);
    }
    let tagged = (tag & 0xF) as usize;
    if tagged as u64 != log_class(n) {
        return Err(MatmulError::DimensionMismatch { left: tagged, right: log_class(n) as usize });
    }
    let i = read_index(&mut reader, n)?;
    let j = read_index(&mut reader, n)?;
    let t = probe_budget(n);
    let expected = 2 * n * n - t;
    if reader.remaining() > expected {
        return Err(MatmulError::TrailingBits(reader.remaining() - expected));
    }
    let a = BoolMatrix::from_bits(n, reader.read_bits(n * n)?.as_slice())?;
    let list = a.row_ones(i);
    if list.len() < t {
        return Err(MatmulError::InsufficientOnes { row: i, ones: list.len(), needed: t });
    }
    let probed = &list[..t];
    let mut b = BoolMatrix::zeros(n);
    for r in 0..n {
        for c in 0..n {
            if c == j && probed.binary_search(&r).is_ok() {
                continue;
            }
            b.set(r, c, reader.read_bit()?);
        }
    }
    Ok((a, b))
}

/// First `(i, j)` in row-major order whose first `t` probes are all zero.
pub fn find_witness(a: &BoolMatrix, b: &BoolMatrix) -> Result<Option<(usize, usize)>, MatmulError> {
    let (_, counters) = quick_multiply(a, b)?;
    let t = probe_budget(a.n()) as u32;
    for i in 0..a.n() {
        if (counters.row_ones(i) as u32) < t {
            continue;
        }
        for j in 0..a.n() {
            let depth = counters.search_depth(i, j);
            if depth > t || (!counters.resolved(i, j) && depth >= t) {
                return Ok(Some((i, j)));
            }
        }
    }
    Ok(None)
}

/// A uniform instance with row `i` of `A` set to ones and the first `t`
/// entries of column `j` of `B` cleared, so search `(i, j)` is a witness.
pub fn plant_instance(n: usize, master_seed: u64, trial: u64, i: usize, j: usize) -> (BoolMatrix, BoolMatrix) {
    let (mut a, mut b) = random_pair(n, master_seed, trial);
    for c in 0..n {
        a.set(i, c, true);
    }
    for r in 0..probe_budget(n).min(n) {
        b.set(r, j, false);
    }
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_values() {
        assert_eq!(probe_budget(1), 0);
        assert_eq!(probe_budget(2), 4);
        assert_eq!(probe_budget(3), 7); // log2 81 = 6.34
        assert_eq!(probe_budget(64), 24);
        assert_eq!(probe_budget(256), 32);
        assert_eq!(probe_budget(100), 27); // log2 1e8 = 26.58
    }

    #[test]
    fn planted_n64_is_short_and_round_trips() {
        let n = 64;
        let (a, b) = plant_instance(n, 1, 0, 0, 0);
        let d = matmul_witness_encode(&a, &b, 0, 0).unwrap();
        assert_eq!(d.omitted, 24);
        assert!(d.len() <= 2 * n * n - 24 + 16);
        assert!(d.len() < 2 * n * n - 6);
        assert_eq!(matmul_witness_decode(&d, n).unwrap(), (a, b));
    }

    #[test]
    fn refuses_probe_hit() {
        let n = 64;
        let (a, mut b) = plant_instance(n, 1, 0, 0, 0);
        b.set(2, 0, true);
        assert_eq!(matmul_witness_encode(&a, &b, 0, 0), Err(MatmulError::ProbeHitOne { position: 3 }));
    }

    #[test]
    fn refuses_short_row() {
        let a = BoolMatrix::zeros(8);
        let b = BoolMatrix::zeros(8);
        assert_eq!(
            matmul_witness_encode(&a, &b, 1, 1),
            Err(MatmulError::InsufficientOnes { row: 1, ones: 0, needed: 12 })
        );
    }

    #[test]
    fn decode_errors() {
        let n = 64;
        let (a, b) = plant_instance(n, 4, 0, 0, 0);
        let d = matmul_witness_encode(&a, &b, 0, 0).unwrap();
        let truncated = MatmulWitnessDescription { bits: d.bits.slice(0, d.len() - 5), omitted: d.omitted };
        assert!(matches!(
            matmul_witness_decode(&truncated, n),
            Err(MatmulError::Code(crate::codes::CodeError::Truncated { .. }))
        ));
        assert!(matches!(matmul_witness_decode(&d, 32), Err(MatmulError::DimensionMismatch { .. })));
        // Same log class, different size: caught by the payload length.
        assert!(matmul_witness_decode(&d, 63).is_err());
        let mut bad = d.clone();
        bad.bits.flip(0);
        assert_eq!(matmul_witness_decode(&bad, n), Err(MatmulError::BadTag));
    }

    #[test]
    fn arbitrary_position_round_trip() {
        let n = 40;
        let (a, b) = plant_instance(n, 8, 3, 17, 33);
        let d = matmul_witness_encode(&a, &b, 17, 33).unwrap();
        let e2 = |v: u64| encoded_len(E2, &from_index(v)).unwrap();
        assert_eq!(d.len(), WITNESS_TAG_BITS + e2(17) + e2(33) + 2 * n * n - d.omitted);
        assert_eq!(matmul_witness_decode(&d, n).unwrap(), (a.clone(), b.clone()));
        assert_eq!(find_witness(&a, &b).unwrap().map(|(i, _)| i), Some(17));
        assert!(d.len() <= witness_length_bound(n));
    }

    #[test]
    fn overhead_is_logarithmic() {
        for n in [16usize, 64, 256, 1024, 4096] {
            let l = n as f64;
            let extra = witness_length_bound(n) as f64 - (2 * n * n - probe_budget(n)) as f64;
            assert!(extra <= 2.0 * l.log2() + 2.0 * l.log2().log2() + 16.0, "n {n}: {extra}");
        }
    }

    #[test]
    fn origin_witness_beats_target() {
        // Witnesses need t <= n, which first holds at n = 16. At search (0, 0)
        // both indices cost one bit, so the length is 2n² − t + 10.
        assert!(probe_budget(8) > 8 && probe_budget(16) <= 16);
        for k in 4..=9 {
            let n = 1usize << k;
            let (a, b) = plant_instance(n, 1, 0, 0, 0);
            let d = matmul_witness_encode(&a, &b, 0, 0).unwrap();
            assert_eq!(d.len(), 2 * n * n - probe_budget(n) + 10);
            assert!((d.len() as f64) < 2.0 * (n * n) as f64 - k as f64, "n {n}");
        }
    }
}
