use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::CodeError;

/// A finite binary string.
///
/// The derived `Ord` is plain lexicographic order (a proper prefix sorts
/// before its extensions); [`BitString::cmp_shortlex`] gives the
/// length-increasing lexicographic order used by the string/number bijection.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn with_capacity(capacity: usize) -> Self {
        Self(Vec::with_capacity(capacity))
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    /// `count` copies of `bit`.
    pub fn repeat(bit: bool, count: usize) -> Self {
        Self(vec![bit; count])
    }

    /// The low `width` bits of `value`, most significant first.
    pub fn from_uint(value: u64, width: usize) -> Self {
        assert!(width <= 64, "width {width} exceeds 64 bits");
        Self((0..width).rev().map(|k| (value >> k) & 1 == 1).collect())
    }

    /// Reads the string as a big-endian unsigned integer.
    ///
    /// Returns `None` when the string is longer than 64 bits.
    pub fn to_uint(&self) -> Option<u64> {
        if self.0.len() > 64 {
            return None;
        }
        Some(self.0.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b)))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<bool> {
        self.0.get(index).copied()
    }

    pub fn set(&mut self, index: usize, bit: bool) {
        self.0[index] = bit;
    }

    pub fn flip(&mut self, index: usize) {
        self.0[index] = !self.0[index];
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn pop(&mut self) -> Option<bool> {
        self.0.pop()
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = bool> + '_ {
        self.0.iter().copied()
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut out = Vec::with_capacity(self.len() + other.len());
        out.extend_from_slice(&self.0);
        out.extend_from_slice(&other.0);
        Self(out)
    }

    pub fn slice(&self, start: usize, end: usize) -> BitString {
        Self(self.0[start..end].to_vec())
    }

    pub fn split_at(&self, mid: usize) -> (BitString, BitString) {
        let (a, b) = self.0.split_at(mid);
        (Self(a.to_vec()), Self(b.to_vec()))
    }

    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Length-increasing lexicographic order.
    pub fn cmp_shortlex(&self, other: &BitString) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }

    /// All strings of exactly `len` bits in lexicographic order.
    pub fn all_of_length(len: usize) -> impl Iterator<Item = BitString> {
        assert!(len < 64, "enumeration of length {len} is infeasible");
        (0..1u64 << len).map(move |v| BitString::from_uint(v, len))
    }

    /// All strings of length at most `max_len` in length-increasing lexicographic order.
    pub fn all_up_to(max_len: usize) -> impl Iterator<Item = BitString> {
        (0..=max_len).flat_map(BitString::all_of_length)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "BitString(ε)")
        } else {
            write!(f, "BitString({self})")
        }
    }
}

impl FromStr for BitString {
    type Err = CodeError;

    /// Parses ASCII `0`/`1`; the empty string and `ε` both denote the empty word.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "ε" {
            return Ok(Self::new());
        }
        s.chars()
            .enumerate()
            .map(|(position, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(CodeError::InvalidSymbol { position, symbol: other }),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self)
    }
}

impl From<BitString> for String {
    fn from(value: BitString) -> Self {
        value.to_string()
    }
}

impl TryFrom<String> for BitString {
    type Error = CodeError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<Vec<bool>> for BitString {
    fn from(bits: Vec<bool>) -> Self {
        Self(bits)
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a BitString {
    type Item = bool;
    type IntoIter = std::iter::Copied<std::slice::Iter<'a, bool>>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter().copied()
    }
}

/// Sequential reader over a bit slice.
///
/// Decoders pull bits one at a time, so `position()` after a successful decode
/// is exactly the number of bits the decoder looked at.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bits: &'a BitString) -> Self {
        Self { bits: bits.as_slice(), pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }

    pub fn is_exhausted(&self) -> bool {
        self.pos == self.bits.len()
    }

    pub fn read_bit(&mut self) -> Result<bool, CodeError> {
        let bit = *self.bits.get(self.pos).ok_or(CodeError::Truncated { position: self.pos })?;
        self.pos += 1;
        Ok(bit)
    }

    pub fn read_bits(&mut self, count: usize) -> Result<BitString, CodeError> {
        if count > self.remaining() {
            return Err(CodeError::Truncated { position: self.bits.len() });
        }
        let out = BitString::from_bits(self.bits[self.pos..self.pos + count].to_vec());
        self.pos += count;
        Ok(out)
    }

    /// Reads `width` bits as a big-endian unsigned integer.
    pub fn read_uint(&mut self, width: usize) -> Result<u64, CodeError> {
        assert!(width <= 64);
        Ok(self.read_bits(width)?.to_uint().unwrap_or_default())
    }

    /// Everything not yet consumed.
    pub fn rest(self) -> BitString {
        BitString::from_bits(self.bits[self.pos..].to_vec())
    }
}
