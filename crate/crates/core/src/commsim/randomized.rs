use std::sync::Arc;

use num_rational::Ratio;
use rand::{Rng, RngCore};
use rayon::prelude::*;

use crate::codes::BitString;
use crate::rng::{tag, trial_stream};

use super::tree::{
    build_constant_protocol, build_trivial_ip_protocol, BitFn, NodeSpec, ProtocolTree, Speaker, Transcript,
};
use super::{inner_product_packed, CommError};

/// Largest total coin length [`best_coin_sequence`] scans.
pub const MAX_COIN_LEN: usize = 16;
/// Largest `n` [`best_coin_sequence`] scans.
pub const MAX_COIN_SCAN_N: usize = 6;

type Builder = dyn Fn(&BitString) -> Result<ProtocolTree, CommError> + Send + Sync;

/// A family of deterministic protocols indexed by the coin string
/// `R = R_Alice ++ R_Bob`. Builders must let each party's messages depend only
/// on its own coins.
#[derive(Clone)]
pub struct CoinParameterizedProtocol {
    pub n: usize,
    pub alice_coins: usize,
    pub bob_coins: usize,
    /// Declared error tolerance.
    pub epsilon: f64,
    build: Arc<Builder>,
}

impl std::fmt::Debug for CoinParameterizedProtocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoinParameterizedProtocol")
            .field("n", &self.n)
            .field("alice_coins", &self.alice_coins)
            .field("bob_coins", &self.bob_coins)
            .field("epsilon", &self.epsilon)
            .finish_non_exhaustive()
    }
}

impl CoinParameterizedProtocol {
    pub fn new(
        n: usize,
        alice_coins: usize,
        bob_coins: usize,
        epsilon: f64,
        build: impl Fn(&BitString) -> Result<ProtocolTree, CommError> + Send + Sync + 'static,
    ) -> Self {
        Self { n, alice_coins, bob_coins, epsilon, build: Arc::new(build) }
    }

    pub fn coin_len(&self) -> usize {
        self.alice_coins + self.bob_coins
    }

    /// The deterministic protocol obtained by fixing `r`.
    pub fn fix(&self, r: &BitString) -> Result<ProtocolTree, CommError> {
        if r.len() != self.coin_len() {
            return Err(CommError::CoinLength { expected: self.coin_len(), actual: r.len() });
        }
        (self.build)(r)
    }
}

pub fn run_randomized(
    f: &CoinParameterizedProtocol,
    x: &BitString,
    y: &BitString,
    r: &BitString,
) -> Result<(bool, Transcript), CommError> {
    super::tree::run_protocol(&f.fix(r)?, x, y)
}

/// Inputs `(x, y)` on which the protocol fixed by `r` disagrees with the inner product.
pub fn error_count(f: &CoinParameterizedProtocol, r: &BitString) -> Result<u64, CommError> {
    let p = f.fix(r)?;
    let size = 1u64 << f.n;
    let mut wrong = 0;
    for x in 0..size {
        for y in 0..size {
            if p.run_packed(x, y).0 != inner_product_packed(x, y) {
                wrong += 1;
            }
        }
    }
    Ok(wrong)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoinReport {
    /// Smallest `R` (in numeric order) with the least error.
    pub best_coins: BitString,
    pub best_error: Ratio<u64>,
    pub mean_error: Ratio<u64>,
    pub worst_error: Ratio<u64>,
    /// `best_error ≤ mean_error`.
    pub pigeonhole_holds: bool,
}

/// Scans every coin string; the result does not depend on `workers`.
pub fn best_coin_sequence(f: &CoinParameterizedProtocol, workers: usize) -> Result<CoinReport, CommError> {
    let k = f.coin_len();
    if k > MAX_COIN_LEN {
        return Err(CommError::TooLarge { n: k, limit: MAX_COIN_LEN });
    }
    if f.n == 0 || f.n > MAX_COIN_SCAN_N {
        return Err(CommError::TooLarge { n: f.n, limit: MAX_COIN_SCAN_N });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CommError::ThreadPool(e.to_string()))?;
    let errors: Vec<u64> = pool.install(|| {
        (0..1u64 << k).into_par_iter().map(|r| error_count(f, &BitString::from_uint(r, k))).collect::<Result<_, _>>()
    })?;
    let inputs = 1u64 << (2 * f.n);
    let (best_r, &best) = errors.iter().enumerate().min_by_key(|&(r, &e)| (e, r)).expect("at least one coin string");
    let worst = *errors.iter().max().expect("at least one coin string");
    let total: u64 = errors.iter().sum();
    let best_error = Ratio::new(best, inputs);
    let mean_error = Ratio::new(total, inputs << k);
    Ok(CoinReport {
        best_coins: BitString::from_uint(best_r as u64, k),
        best_error,
        mean_error,
        worst_error: Ratio::new(worst, inputs),
        pigeonhole_holds: best_error <= mean_error,
    })
}

/// The trivial protocol for every coin string.
pub fn trivial_family(n: usize, coins: usize) -> CoinParameterizedProtocol {
    CoinParameterizedProtocol::new(n, 0, coins, 0.0, move |_| build_trivial_ip_protocol(n))
}

/// Always outputs `bit`, ignoring the coins.
pub fn constant_family(n: usize, bit: bool, coins: usize) -> CoinParameterizedProtocol {
    CoinParameterizedProtocol::new(n, 0, coins, 0.5, move |_| build_constant_protocol(n, bit))
}

/// The trivial protocol, except Bob's first message is `y_1 ⊕ r_Bob,1`.
pub fn xor_corrupt_family(n: usize) -> CoinParameterizedProtocol {
    CoinParameterizedProtocol::new(n, 1, 1, 0.25, move |r| {
        let corrupt = r.get(1) == Some(true);
        ProtocolTree::build(n, |path| {
            if path.len() < n {
                let mut send = BitFn::input_bit(n, path.len());
                if path.is_empty() {
                    send = BitFn::Affine { mask: 1 << (n - 1), constant: corrupt };
                }
                NodeSpec::Speak(Speaker::Bob, send)
            } else {
                NodeSpec::Leaf(BitFn::Affine { mask: path.to_uint().expect("n ≤ 64"), constant: false })
            }
        })
    })
}

fn random_table<R: RngCore>(n: usize, rng: &mut R) -> BitFn {
    let words = (1usize << n).div_ceil(64);
    let keep = if n >= 6 { u64::MAX } else { (1u64 << (1 << n)) - 1 };
    BitFn::Table((0..words).map(|_| rng.next_u64() & keep).collect())
}

/// For each coin string, an independent random protocol tree of depth `depth`
/// with random speakers, message tables and output tables.
pub fn random_family(
    n: usize,
    alice_coins: usize,
    bob_coins: usize,
    depth: usize,
    seed: u64,
) -> CoinParameterizedProtocol {
    CoinParameterizedProtocol::new(n, alice_coins, bob_coins, 0.5, move |r| {
        let index = r.to_uint().unwrap_or(0);
        let mut rng = trial_stream(seed, tag::COMMSIM, n as u64, index);
        ProtocolTree::build(n, |path| {
            if path.len() < depth {
                let speaker = if rng.random::<bool>() { Speaker::Alice } else { Speaker::Bob };
                NodeSpec::Speak(speaker, random_table(n, &mut rng))
            } else {
                NodeSpec::Leaf(random_table(n, &mut rng))
            }
        })
    })
}
