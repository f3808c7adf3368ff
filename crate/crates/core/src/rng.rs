//! Deterministic random streams.
//!
//! All randomness in the crate is ChaCha8 from `rand_chacha`: the master seed
//! is expanded with `SeedableRng::seed_from_u64` and the stream id selects
//! ChaCha's 64-bit stream counter. Bits are taken from `next_u64` least
//! significant bit first. Both steps are specified by the algorithms
//! themselves, so output is identical on every platform.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codes::BitString;

pub type StreamRng = ChaCha8Rng;

/// Experiment tags occupying the top byte of a trial stream id.
pub mod tag {
    pub const MATMUL: u8 = 1;
    pub const MAJORITY: u8 = 2;
    pub const DESCSYS: u8 = 3;
    pub const COMMSIM: u8 = 4;
    pub const CODES: u8 = 5;
}

pub fn stream(master_seed: u64, stream_id: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream_id);
    rng
}

/// Packs `(tag, size, trial)` into a stream id: tag in bits 56..64, the low
/// 24 bits of size in 32..56, the low 32 bits of the trial index in 0..32.
pub fn trial_stream_id(tag: u8, size: u64, trial: u64) -> u64 {
    (u64::from(tag) << 56) | ((size & 0xFF_FFFF) << 32) | (trial & 0xFFFF_FFFF)
}

pub fn trial_stream(master_seed: u64, tag: u8, size: u64, trial: u64) -> StreamRng {
    stream(master_seed, trial_stream_id(tag, size, trial))
}

/// Fills `out` with `count` fresh bits from `rng`.
pub fn fill_bits<R: RngCore>(rng: &mut R, count: usize, out: &mut Vec<bool>) {
    out.reserve(count);
    let mut left = count;
    while left > 0 {
        let word = rng.next_u64();
        let take = left.min(64);
        out.extend((0..take).map(|k| (word >> k) & 1 == 1));
        left -= take;
    }
}

pub fn random_bits<R: RngCore>(rng: &mut R, count: usize) -> BitString {
    let mut out = Vec::with_capacity(count);
    fill_bits(rng, count, &mut out);
    BitString::from_bits(out)
}

/// `count` bits from stream `stream_id` of `master_seed`.
pub fn seeded_bits(master_seed: u64, stream_id: u64, count: usize) -> BitString {
    random_bits(&mut stream(master_seed, stream_id), count)
}
