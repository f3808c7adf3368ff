//! Short description of an input pair `z = xy` with `⟨x, y⟩ = 0` relative to a
//! protocol: the transcript `C`, the index of `x` in the set `S` of Alice
//! inputs that reach `C` with output 0, and the coordinates of `y` in the null
//! space of the matrix whose rows are `S`.

use crate::codes::{BitReader, BitString};

use super::gf2::Gf2Matrix;
use super::tree::{enumerate_s_packed, ProtocolTree, Transcript};
use super::{inner_product_packed, CommError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IpDescription {
    pub bits: BitString,
    pub transcript_len: usize,
    /// `⌈log₂ |S|⌉`.
    pub index_width: usize,
    /// `|S|`.
    pub s_size: usize,
    pub rank: usize,
    /// `n − rank`.
    pub coord_width: usize,
}

impl IpDescription {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

pub fn ceil_log2(l: usize) -> usize {
    if l <= 1 {
        0
    } else {
        ((l - 1).ilog2() + 1) as usize
    }
}

fn split(z: &BitString, n: usize) -> Result<(u64, u64), CommError> {
    if z.len() != 2 * n {
        return Err(CommError::LengthMismatch { expected: 2 * n, actual: z.len() });
    }
    let (x, y) = z.split_at(n);
    Ok((x.to_uint().expect("n ≤ 64"), y.to_uint().expect("n ≤ 64")))
}

pub fn describe_z(p: &ProtocolTree, z: &BitString) -> Result<IpDescription, CommError> {
    let n = p.n();
    let (x, y) = split(z, n)?;
    if inner_product_packed(x, y) {
        return Err(CommError::InnerProductOne);
    }
    let (out, c) = p.run_packed(x, y);
    if out {
        return Err(CommError::ProtocolIncorrect);
    }
    let s = enumerate_s_packed(p, &c)?;
    let index = s.binary_search(&x).map_err(|_| CommError::ProtocolIncorrect)?;
    let m = Gf2Matrix::from_packed(n, s.clone())?;
    if !m.annihilates(y) {
        return Err(CommError::NotInNullSpace);
    }
    let ns = m.rank_nullspace();
    let index_width = ceil_log2(s.len());
    let coord_width = ns.dim();

    let mut bits = c.0.clone();
    bits.extend_from(&BitString::from_uint(index as u64, index_width));
    bits.extend_from(&BitString::from_uint(ns.coordinates(y), coord_width));
    Ok(IpDescription { bits, transcript_len: c.len(), index_width, s_size: s.len(), rank: ns.rank, coord_width })
}

pub fn reconstruct_z(p: &ProtocolTree, bits: &BitString, n: usize) -> Result<BitString, CommError> {
    if n != p.n() {
        return Err(CommError::LengthMismatch { expected: p.n(), actual: n });
    }
    let c_len = p.leaf_prefix_len(bits).ok_or(CommError::Truncated)?;
    let c = Transcript(bits.slice(0, c_len));
    let s = enumerate_s_packed(p, &c)?;
    if s.is_empty() {
        return Err(CommError::TranscriptNotRealized);
    }
    let m = Gf2Matrix::from_packed(n, s.clone())?;
    let ns = m.rank_nullspace();

    let rest = bits.slice(c_len, bits.len());
    let mut reader = BitReader::new(&rest);
    let index_width = ceil_log2(s.len());
    let expected = index_width + ns.dim();
    if reader.remaining() > expected {
        return Err(CommError::TrailingBits(reader.remaining() - expected));
    }
    let index = reader.read_uint(index_width).map_err(|_| CommError::Truncated)? as usize;
    let x = *s.get(index).ok_or(CommError::IndexOutOfRange { index, len: s.len() })?;
    let coords = reader.read_uint(ns.dim()).map_err(|_| CommError::Truncated)?;
    let y = ns.combine(coords);
    Ok(BitString::from_uint(x, n).concat(&BitString::from_uint(y, n)))
}

/// Flips `x_i` and `y_i` at the first index where they agree.
///
/// Such an index exists whenever `⟨x, y⟩ = 1`, because `y = x̄` forces the
/// inner product to 0. Applying the map twice restores the input.
pub fn flip_first_agreeing(z: &BitString) -> Result<BitString, CommError> {
    if z.len() % 2 == 1 {
        return Err(CommError::OddLength(z.len()));
    }
    let n = z.len() / 2;
    let i = (0..n).find(|&i| z.get(i) == z.get(n + i)).ok_or(CommError::NoAgreeingIndex)?;
    let mut out = z.clone();
    out.flip(i);
    out.flip(n + i);
    Ok(out)
}

/// Maps an input with `⟨x, y⟩ = 1` to one with `⟨x, y⟩ = 0` by flipping two bits.
pub fn flip_reduce(z: &BitString) -> Result<BitString, CommError> {
    if z.len() % 2 == 1 {
        return Err(CommError::OddLength(z.len()));
    }
    let (x, y) = z.split_at(z.len() / 2);
    if !super::inner_product(&x, &y)? {
        return Err(CommError::InnerProductZero);
    }
    flip_first_agreeing(z)
}
