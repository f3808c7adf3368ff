//! Fixed inputs shared by the benchmarks in `benches/`.

use incomp::codes::BitString;
use incomp::commsim::{flip_reduce, Gf2Matrix};
use incomp::harness::seeded_bits;
use incomp::rng::stream;

/// Master seed for every benchmark input.
pub const SEED: u64 = 0xBE7C;

/// `count` uniform strings of length `len`.
pub fn strings(len: usize, count: u64) -> Vec<BitString> {
    (0..count).map(|i| seeded_bits(SEED, i, len)).collect()
}

/// A uniform `rows × cols` matrix over GF(2).
pub fn gf2_matrix(rows: usize, cols: usize) -> Gf2Matrix {
    Gf2Matrix::random(rows, cols, &mut stream(SEED, (rows * 64 + cols) as u64)).expect("cols <= 64")
}

/// A uniform input pair `z = xy` of length `2n` with inner product 0.
pub fn zero_product_input(n: usize) -> BitString {
    let z = seeded_bits(SEED, n as u64, 2 * n);
    flip_reduce(&z).unwrap_or(z)
}
