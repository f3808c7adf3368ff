//! Strings as numbers, the self-delimiting code ladder `E_0 … E_3`, the
//! pairing function built on `E_2`, and prefix-set verification.
//!
//! Every decoder here is streaming: it consumes exactly one codeword from a
//! [`BitReader`] and leaves the rest of the stream untouched, which is what
//! lets multi-item descriptions be concatenated without delimiters.

mod bits;

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

pub use bits::{BitReader, BitString};

/// Longest unary codeword `encode(0, ·)` will materialize.
pub const MAX_UNARY_LEN: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("unsupported code level {0} (expected 0..=3)")]
    UnsupportedLevel(u8),
    #[error("stream ended at bit {position} before the codeword was complete")]
    Truncated { position: usize },
    #[error("invalid symbol {symbol:?} at position {position}")]
    InvalidSymbol { position: usize, symbol: char },
    #[error("value too large for a unary codeword")]
    TooLarge,
}

/// Index into the code ladder; only `E_0` through `E_3` exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CodeLevel(u8);

impl CodeLevel {
    pub const E0: CodeLevel = CodeLevel(0);
    pub const E1: CodeLevel = CodeLevel(1);
    pub const E2: CodeLevel = CodeLevel(2);
    pub const E3: CodeLevel = CodeLevel(3);
    pub const ALL: [CodeLevel; 4] = [Self::E0, Self::E1, Self::E2, Self::E3];

    pub fn new(level: u8) -> Result<Self, CodeError> {
        if level <= 3 {
            Ok(Self(level))
        } else {
            Err(CodeError::UnsupportedLevel(level))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    fn below(self) -> Option<CodeLevel> {
        self.0.checked_sub(1).map(CodeLevel)
    }
}

impl TryFrom<u8> for CodeLevel {
    type Error = CodeError;

    fn try_from(level: u8) -> Result<Self, Self::Error> {
        Self::new(level)
    }
}

/// Index of `x` in the length-increasing lexicographic enumeration
/// `(ε,0), (0,1), (1,2), (00,3), …`: read `1x` in binary and subtract one.
pub fn to_number(x: &BitString) -> BigUint {
    let mut n = BigUint::one();
    for bit in x {
        n <<= 1u32;
        if bit {
            n += 1u32;
        }
    }
    n - 1u32
}

/// Inverse of [`to_number`]: the binary expansion of `n + 1` without its leading one.
pub fn to_string(n: &BigUint) -> BitString {
    let m = n + 1u32;
    let width = m.bits() as usize - 1;
    (0..width).rev().map(|k| m.bit(k as u64)).collect()
}

/// [`to_number`] restricted to strings whose index fits in a `u64`.
pub fn index_of(x: &BitString) -> Option<u64> {
    if x.len() >= 64 {
        return None;
    }
    Some(((1u64 << x.len()) | x.to_uint()?) - 1)
}

/// [`to_string`] on machine integers.
pub fn from_index(n: u64) -> BitString {
    let m = u128::from(n) + 1;
    let width = 127 - m.leading_zeros() as usize;
    (0..width).rev().map(|k| (m >> k) & 1 == 1).collect()
}

/// The string naming the length of `x`.
fn length_string(x: &BitString) -> BitString {
    from_index(x.len() as u64)
}

/// `E_level(x)`. At level 0 the argument is read as a number through the bijection.
pub fn encode(level: CodeLevel, x: &BitString) -> Result<BitString, CodeError> {
    let mut out = BitString::new();
    encode_into(level, x, &mut out)?;
    Ok(out)
}

/// Appends `E_level(x)` to `out`.
pub fn encode_into(level: CodeLevel, x: &BitString, out: &mut BitString) -> Result<(), CodeError> {
    match level.below() {
        None => {
            let count = to_number(x).to_usize().filter(|&c| c <= MAX_UNARY_LEN).ok_or(CodeError::TooLarge)?;
            out.extend_from(&BitString::repeat(true, count));
            out.push(false);
        }
        Some(inner) => {
            encode_into(inner, &length_string(x), out)?;
            out.extend_from(x);
        }
    }
    Ok(())
}

/// `1^n 0`.
pub fn encode_unary(n: usize) -> BitString {
    let mut out = BitString::repeat(true, n);
    out.push(false);
    out
}

/// Decodes one `E_level` codeword from the front of `stream`, returning the
/// decoded string and the untouched remainder.
pub fn decode(level: CodeLevel, stream: &BitString) -> Result<(BitString, BitString), CodeError> {
    let mut reader = BitReader::new(stream);
    let x = decode_from(level, &mut reader)?;
    Ok((x, reader.rest()))
}

/// Streaming decoder: reads exactly one codeword and stops.
pub fn decode_from(level: CodeLevel, reader: &mut BitReader<'_>) -> Result<BitString, CodeError> {
    match level.below() {
        None => Ok(from_index(decode_unary(reader)? as u64)),
        Some(inner) => {
            let length = decode_from(inner, reader)?;
            // An index that does not fit in u64 can never be backed by enough bits.
            let n = index_of(&length)
                .and_then(|n| usize::try_from(n).ok())
                .ok_or(CodeError::Truncated { position: reader.position() + reader.remaining() })?;
            reader.read_bits(n)
        }
    }
}

/// Reads a `1^n 0` codeword and returns `n`.
pub fn decode_unary(reader: &mut BitReader<'_>) -> Result<usize, CodeError> {
    let mut ones = 0usize;
    while reader.read_bit()? {
        ones += 1;
    }
    Ok(ones)
}

/// `⟨x, y⟩ = E_2(x) y`.
pub fn pair(x: &BitString, y: &BitString) -> BitString {
    let mut out = BitString::with_capacity(x.len() + y.len() + 16);
    encode_into(CodeLevel::E2, x, &mut out).expect("E_2 never builds a long unary prefix");
    out.extend_from(y);
    out
}

pub fn unpair(z: &BitString) -> Result<(BitString, BitString), CodeError> {
    decode(CodeLevel::E2, z)
}

/// Exact codeword lengths, computed without building the codeword.
pub fn encoded_len(level: CodeLevel, x: &BitString) -> Option<usize> {
    match level.below() {
        None => to_number(x).to_usize().map(|n| n + 1),
        Some(inner) => Some(encoded_len(inner, &length_string(x))? + x.len()),
    }
}

/// Outcome of a prefix-freeness check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrefixVerdict {
    PrefixFree,
    /// `prefix` is a prefix of `word` (the two may be equal when the input repeats an entry).
    Violation {
        prefix: BitString,
        word: BitString,
    },
}

impl PrefixVerdict {
    pub fn is_prefix_free(&self) -> bool {
        matches!(self, PrefixVerdict::PrefixFree)
    }
}

/// Checks that no codeword is a prefix of another.
///
/// Repeated entries in the input count as a violation. In lexicographic order
/// a word that prefixes some later word also prefixes its immediate successor,
/// so only adjacent pairs need comparing.
pub fn is_prefix_free<'a, I>(code_words: I) -> PrefixVerdict
where
    I: IntoIterator<Item = &'a BitString>,
{
    let mut sorted: Vec<&BitString> = code_words.into_iter().collect();
    sorted.sort_unstable();
    for w in sorted.windows(2) {
        if w[0].is_prefix_of(w[1]) {
            return PrefixVerdict::Violation { prefix: w[0].clone(), word: w[1].clone() };
        }
    }
    PrefixVerdict::PrefixFree
}

/// Image of `E_level` over every string of length at most `max_len`.
pub fn code_image(level: CodeLevel, max_len: usize) -> Result<BTreeSet<BitString>, CodeError> {
    BitString::all_up_to(max_len).map(|x| encode(level, &x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;
    use proptest::prelude::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn lvl(i: u8) -> CodeLevel {
        CodeLevel::new(i).unwrap()
    }

    /// Independent route to the bijection: walk the shortlex enumeration.
    fn shortlex_table(max_len: usize) -> Vec<BitString> {
        let mut all: Vec<BitString> =
            (0..=max_len).flat_map(|len| (0..1u64 << len).map(move |v| BitString::from_uint(v, len))).collect();
        all.sort_by(|a, b| a.cmp_shortlex(b));
        all
    }

    #[test]
    fn bijection_examples() {
        assert_eq!(to_number(&bs("11")), BigUint::from(6u32));
        assert_eq!(to_string(&BigUint::zero()), BitString::new());
        assert_eq!(to_string(&BigUint::from(7u32)), bs("000"));
        assert_eq!(to_string(&BigUint::from(3u32)), bs("00"));
        let pairs = [("", 0u64), ("0", 1), ("1", 2), ("00", 3), ("01", 4), ("10", 5), ("11", 6)];
        for (s, n) in pairs {
            assert_eq!(index_of(&bs(s)), Some(n));
            assert_eq!(from_index(n), bs(s));
        }
    }

    #[test]
    fn bijection_matches_enumeration() {
        for (n, x) in shortlex_table(10).iter().enumerate() {
            assert_eq!(from_index(n as u64), *x);
            assert_eq!(to_number(x), BigUint::from(n));
            assert_eq!(to_string(&BigUint::from(n)), *x);
        }
    }

    #[test]
    fn bijection_round_trip_below_2_pow_20() {
        let mut prev = BitString::new();
        for n in 0..1u64 << 20 {
            let x = from_index(n);
            assert_eq!(index_of(&x), Some(n));
            if n > 0 {
                assert_eq!(prev.cmp_shortlex(&x), std::cmp::Ordering::Less);
            }
            prev = x;
        }
        assert_eq!(from_index(u64::MAX).len(), 64);
    }

    #[test]
    fn level_bounds() {
        assert!(CodeLevel::new(3).is_ok());
        assert_eq!(CodeLevel::new(4), Err(CodeError::UnsupportedLevel(4)));
    }

    #[test]
    fn encode_examples() {
        assert_eq!(encode(lvl(0), &from_index(3)).unwrap(), bs("1110"));
        assert_eq!(encode(lvl(1), &BitString::new()).unwrap(), bs("0"));
        assert_eq!(encode(lvl(2), &bs("01")).unwrap(), bs("10101"));
        assert_eq!(encode(lvl(1), &bs("01")).unwrap(), bs("11001"));
        assert_eq!(encode(lvl(2), &bs("1")).unwrap(), bs("1001"));
        assert_eq!(encode_unary(3), bs("1110"));
    }

    #[test]
    fn decode_examples() {
        assert_eq!(decode(lvl(1), &bs("11001111")).unwrap(), (bs("01"), bs("111")));
        assert_eq!(decode(lvl(0), &bs("0")).unwrap(), (BitString::new(), BitString::new()));
        assert_eq!(decode(lvl(2), &bs("10101")).unwrap(), (bs("01"), BitString::new()));
    }

    #[test]
    fn decode_reports_failing_position() {
        assert_eq!(decode(lvl(0), &bs("111")), Err(CodeError::Truncated { position: 3 }));
        assert_eq!(decode(lvl(1), &bs("1100")), Err(CodeError::Truncated { position: 4 }));
        assert_eq!(decode(lvl(2), &BitString::new()), Err(CodeError::Truncated { position: 0 }));
        assert!(unpair(&bs("11")).is_err());
    }

    #[test]
    fn decoder_stops_at_codeword_end() {
        for level in CodeLevel::ALL {
            for x in BitString::all_up_to(6) {
                let mut stream = encode(level, &x).unwrap();
                let len = stream.len();
                stream.extend_from(&bs("1111111"));
                let mut reader = BitReader::new(&stream);
                assert_eq!(decode_from(level, &mut reader).unwrap(), x);
                assert_eq!(reader.position(), len);
            }
        }
    }

    #[test]
    fn exact_length_identities() {
        for x in BitString::all_up_to(12) {
            let ll = length_string(&x).len();
            assert_eq!(encode(lvl(1), &x).unwrap().len(), 2 * x.len() + 1);
            assert_eq!(encode(lvl(2), &x).unwrap().len(), x.len() + 2 * ll + 1);
            for level in CodeLevel::ALL {
                assert_eq!(encoded_len(level, &x), Some(encode(level, &x).unwrap().len()));
            }
        }
    }

    #[test]
    fn e3_length_bound() {
        // The real-valued bound ignores the floors in l(str(m)) = ⌊log₂(m+1)⌋;
        // the integer lengths exceed it at l = 2, 3, 7, ... by at most 2.
        let excess = |len: usize| {
            let x = BitString::repeat(false, len);
            let l = len as f64;
            encoded_len(lvl(3), &x).unwrap() as f64 - (l + l.log2() + 2.0 * l.log2().log2() + 1.0)
        };
        assert!(excess(2) > 0.0);
        let mut lens: Vec<usize> = (2..=5000).collect();
        lens.extend((13..=24).flat_map(|k| [(1usize << k) - 1, 1 << k, (1 << k) + 1]));
        for len in lens {
            let x = BitString::repeat(false, len);
            let ll = from_index(len as u64).len();
            let lll = from_index(ll as u64).len();
            assert_eq!(encoded_len(lvl(3), &x), Some(len + ll + 2 * lll + 1));
            assert!(excess(len) <= 2.0 + 1e-9, "len {len}");
        }
    }

    #[test]
    fn pairing_examples() {
        assert_eq!(pair(&bs("1"), &bs("01")), bs("100101"));
        assert_eq!(unpair(&pair(&BitString::new(), &BitString::new())).unwrap(), (BitString::new(), BitString::new()));
        assert_ne!(pair(&bs("01"), &bs("1")), pair(&bs("1"), &bs("01")));
        let (x, y) = (bs("0110"), bs("101"));
        let z = pair(&x, &y);
        assert_eq!(z.len(), y.len() + x.len() + 2 * length_string(&x).len() + 1);
    }

    #[test]
    fn pairing_injective_up_to_8() {
        let all: Vec<BitString> = BitString::all_up_to(8).collect();
        let mut seen = std::collections::HashSet::new();
        for x in &all {
            for y in &all {
                assert!(seen.insert(pair(x, y)));
            }
        }
        assert_eq!(seen.len(), 511 * 511);
    }

    #[test]
    fn prefix_free_examples() {
        let set = [bs("0"), bs("10"), bs("11")];
        assert!(is_prefix_free(&set).is_prefix_free());
        let bad = [bs("10"), bs("1")];
        assert_eq!(is_prefix_free(&bad), PrefixVerdict::Violation { prefix: bs("1"), word: bs("10") });
        let image = code_image(lvl(2), 8).unwrap();
        assert_eq!(image.len(), 511);
        assert!(is_prefix_free(&image).is_prefix_free());
    }

    #[test]
    fn unary_level_rejects_huge_numbers() {
        assert_eq!(encode(lvl(0), &BitString::repeat(true, 40)), Err(CodeError::TooLarge));
    }

    fn arb_bits(max: usize) -> impl Strategy<Value = BitString> {
        proptest::collection::vec(any::<bool>(), 0..=max).prop_map(BitString::from_bits)
    }

    proptest! {
        #[test]
        fn round_trip_with_suffix(level in 0u8..4, x in arb_bits(16), r in arb_bits(24)) {
            let level = lvl(level);
            let stream = encode(level, &x).unwrap().concat(&r);
            prop_assert_eq!(decode(level, &stream).unwrap(), (x, r));
        }

        #[test]
        fn unpair_inverts_pair(x in arb_bits(16), y in arb_bits(16)) {
            prop_assert_eq!(unpair(&pair(&x, &y)).unwrap(), (x, y));
        }
    }
}
