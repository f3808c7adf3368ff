//! Two-party protocols for the inner product over GF(2), the description
//! codec built from a protocol transcript, and private-coin protocol families.

mod describe;
mod gf2;
mod randomized;
mod tree;

use num_rational::Ratio;
use rand::RngCore;
use serde::Serialize;
use thiserror::Error;

use crate::codes::BitString;
use crate::rng::{tag, trial_stream};

pub use describe::{ceil_log2, describe_z, flip_first_agreeing, flip_reduce, reconstruct_z, IpDescription};
pub use gf2::{Gf2Matrix, NullSpace};
pub use randomized::{
    best_coin_sequence, constant_family, error_count, random_family, run_randomized, trivial_family,
    xor_corrupt_family, CoinParameterizedProtocol, CoinReport, MAX_COIN_LEN, MAX_COIN_SCAN_N,
};
pub use tree::{
    build_constant_protocol, build_trivial_ip_protocol, enumerate_s, enumerate_s_packed, run_protocol, BitFn, NodeSpec,
    ProtocolTree, Speaker, Transcript, MAX_ENUMERATE_N, MAX_TREE_DEPTH,
};

/// Largest `n` for which [`average_cost`] enumerates all input pairs.
pub const MAX_EXHAUSTIVE_COST_N: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommError {
    #[error("size {n} exceeds the limit {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("expected {expected} bits, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("function does not take {0}-bit inputs")]
    FunctionShape(usize),
    #[error("protocol tree deeper than {0}")]
    TreeTooDeep(usize),
    #[error("inner product is 1; apply flip_reduce first")]
    InnerProductOne,
    #[error("inner product is already 0")]
    InnerProductZero,
    #[error("protocol output disagrees with the inner product")]
    ProtocolIncorrect,
    #[error("y is not orthogonal to every member of S")]
    NotInNullSpace,
    #[error("transcript is not realized with output 0")]
    TranscriptNotRealized,
    #[error("index {index} outside a set of size {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("description ends early")]
    Truncated,
    #[error("{0} bits after the description")]
    TrailingBits(usize),
    #[error("odd length {0}")]
    OddLength(usize),
    #[error("x and y disagree at every position")]
    NoAgreeingIndex,
    #[error("expected {expected} coin bits, got {actual}")]
    CoinLength { expected: usize, actual: usize },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

pub fn inner_product_packed(x: u64, y: u64) -> bool {
    (x & y).count_ones() & 1 == 1
}

/// `Σ x_i y_i mod 2`.
pub fn inner_product(x: &BitString, y: &BitString) -> Result<bool, CommError> {
    if x.len() != y.len() {
        return Err(CommError::LengthMismatch { expected: x.len(), actual: y.len() });
    }
    Ok(x.iter().zip(y.iter()).filter(|&(a, b)| a && b).count() % 2 == 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostMode {
    Exhaustive,
    Sampled { trials: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostReport {
    pub n: usize,
    pub samples: u64,
    pub mean: f64,
    /// Exact mean, exhaustive mode only.
    #[serde(skip)]
    pub exact_mean: Option<Ratio<u64>>,
    /// Standard error of the mean, sampled mode only.
    pub std_error: Option<f64>,
    /// Fraction of inputs on which the output equals the inner product.
    pub correct_fraction: f64,
}

/// Mean transcript length under uniform inputs.
pub fn average_cost(p: &ProtocolTree, mode: CostMode) -> Result<CostReport, CommError> {
    let n = p.n();
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    match mode {
        CostMode::Exhaustive => {
            if n > MAX_EXHAUSTIVE_COST_N {
                return Err(CommError::TooLarge { n, limit: MAX_EXHAUSTIVE_COST_N });
            }
            let size = 1u64 << n;
            let (mut bits, mut correct) = (0u64, 0u64);
            for x in 0..size {
                for y in 0..size {
                    let (out, c) = p.run_packed(x, y);
                    bits += c.len() as u64;
                    correct += u64::from(out == inner_product_packed(x, y));
                }
            }
            let samples = size * size;
            let exact = Ratio::new(bits, samples);
            Ok(CostReport {
                n,
                samples,
                mean: bits as f64 / samples as f64,
                exact_mean: Some(exact),
                std_error: None,
                correct_fraction: correct as f64 / samples as f64,
            })
        }
        CostMode::Sampled { trials, seed } => {
            let (mut sum, mut sum_sq, mut correct) = (0f64, 0f64, 0u64);
            for t in 0..trials {
                let mut rng = trial_stream(seed, tag::COMMSIM, n as u64, t);
                let x = rng.next_u64() & mask;
                let y = rng.next_u64() & mask;
                let (out, c) = p.run_packed(x, y);
                let len = c.len() as f64;
                sum += len;
                sum_sq += len * len;
                correct += u64::from(out == inner_product_packed(x, y));
            }
            let count = trials as f64;
            let mean = sum / count;
            let std_error = (trials > 1).then(|| {
                let var = ((sum_sq - count * mean * mean) / (count - 1.0)).max(0.0);
                (var / count).sqrt()
            });
            Ok(CostReport {
                n,
                samples: trials,
                mean,
                exact_mean: None,
                std_error,
                correct_fraction: correct as f64 / count,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn inner_product_examples() {
        assert!(!inner_product(&bs("0000"), &bs("1011")).unwrap());
        assert!(inner_product(&bs("10"), &bs("11")).unwrap());
        assert!(!inner_product(&bs("11"), &bs("11")).unwrap());
        assert!(inner_product(&bs("1"), &bs("11")).is_err());
    }

    #[test]
    fn trivial_cost_is_n() {
        for n in 1..=8 {
            let r = average_cost(&build_trivial_ip_protocol(n).unwrap(), CostMode::Exhaustive).unwrap();
            assert_eq!(r.exact_mean, Some(Ratio::from_integer(n as u64)));
            assert_eq!(r.correct_fraction, 1.0);
        }
    }

    #[test]
    fn constant_protocol_cost() {
        let r = average_cost(&build_constant_protocol(4, false).unwrap(), CostMode::Exhaustive).unwrap();
        assert_eq!(r.mean, 0.0);
        assert!(r.correct_fraction < 1.0);
    }

    #[test]
    fn sampled_agrees_with_exhaustive() {
        // A protocol whose cost varies: Bob sends bits until he sends a 1.
        let n = 8;
        let p = ProtocolTree::build(n, |path| {
            if path.len() < n && !path.iter().any(|b| b) {
                NodeSpec::Speak(Speaker::Bob, BitFn::input_bit(n, path.len()))
            } else {
                NodeSpec::Leaf(BitFn::constant(false))
            }
        })
        .unwrap();
        let exact = average_cost(&p, CostMode::Exhaustive).unwrap().mean;
        let sampled = average_cost(&p, CostMode::Sampled { trials: 20_000, seed: 5 }).unwrap();
        assert!((sampled.mean - exact).abs() <= 3.0 * sampled.std_error.unwrap());
    }

    #[test]
    fn exhaustive_refuses_large() {
        let p = build_trivial_ip_protocol(11).unwrap();
        assert!(matches!(average_cost(&p, CostMode::Exhaustive), Err(CommError::TooLarge { .. })));
    }
}
