use rand::RngCore;

use crate::codes::BitString;

use super::CommError;

/// A matrix over GF(2) with at most 64 columns. Column `k` of a row is bit
/// `cols − 1 − k` of its word, so rows read like bit strings.
#[derive(Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    cols: usize,
    rows: Vec<u64>,
}

/// Rank and a null-space basis from reduced row echelon form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NullSpace {
    pub cols: usize,
    pub rank: usize,
    /// One vector per free column, in column order.
    pub basis: Vec<u64>,
    pub free_columns: Vec<usize>,
}

fn col_mask(cols: usize, k: usize) -> u64 {
    1 << (cols - 1 - k)
}

fn parity(v: u64) -> bool {
    v.count_ones() & 1 == 1
}

impl Gf2Matrix {
    pub fn new(cols: usize) -> Result<Self, CommError> {
        if cols == 0 || cols > 64 {
            return Err(CommError::TooLarge { n: cols, limit: 64 });
        }
        Ok(Self { cols, rows: Vec::new() })
    }

    pub fn from_packed(cols: usize, rows: Vec<u64>) -> Result<Self, CommError> {
        let mut m = Self::new(cols)?;
        for r in rows {
            m.push_row(r)?;
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[BitString]) -> Result<Self, CommError> {
        let cols = rows.first().map_or(0, BitString::len);
        let mut m = Self::new(cols)?;
        for r in rows {
            if r.len() != cols {
                return Err(CommError::LengthMismatch { expected: cols, actual: r.len() });
            }
            m.rows.push(r.to_uint().expect("cols ≤ 64"));
        }
        Ok(m)
    }

    pub fn random<R: RngCore>(rows: usize, cols: usize, rng: &mut R) -> Result<Self, CommError> {
        let mut m = Self::new(cols)?;
        let keep = if cols == 64 { u64::MAX } else { (1 << cols) - 1 };
        m.rows = (0..rows).map(|_| rng.next_u64() & keep).collect();
        Ok(m)
    }

    pub fn push_row(&mut self, row: u64) -> Result<(), CommError> {
        if self.cols < 64 && row >> self.cols != 0 {
            return Err(CommError::LengthMismatch { expected: self.cols, actual: 64 - row.leading_zeros() as usize });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    /// True iff `M v = 0`.
    pub fn annihilates(&self, v: u64) -> bool {
        self.rows.iter().all(|&r| !parity(r & v))
    }

    pub fn rank_nullspace(&self) -> NullSpace {
        let mut rows = self.rows.clone();
        let mut pivots: Vec<usize> = Vec::new();
        for k in 0..self.cols {
            let r = pivots.len();
            let mask = col_mask(self.cols, k);
            let Some(p) = (r..rows.len()).find(|&i| rows[i] & mask != 0) else {
                continue;
            };
            rows.swap(r, p);
            let pivot_row = rows[r];
            for (i, row) in rows.iter_mut().enumerate() {
                if i != r && *row & mask != 0 {
                    *row ^= pivot_row;
                }
            }
            pivots.push(k);
        }
        let rank = pivots.len();
        let free_columns: Vec<usize> = (0..self.cols).filter(|k| !pivots.contains(k)).collect();
        let basis = free_columns
            .iter()
            .map(|&f| {
                let fm = col_mask(self.cols, f);
                pivots
                    .iter()
                    .zip(&rows)
                    .filter(|(_, &row)| row & fm != 0)
                    .fold(fm, |v, (&p, _)| v | col_mask(self.cols, p))
            })
            .collect::<Vec<_>>();
        assert_eq!(rank + basis.len(), self.cols, "rank–nullity");
        NullSpace { cols: self.cols, rank, basis, free_columns }
    }
}

impl std::fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let rows: Vec<String> = self.rows.iter().map(|&r| BitString::from_uint(r, self.cols).to_string()).collect();
        f.debug_struct("Gf2Matrix").field("cols", &self.cols).field("rows", &rows).finish()
    }
}

impl NullSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Coordinates of a null-space vector: its bits at the free columns.
    pub fn coordinates(&self, v: u64) -> u64 {
        self.free_columns.iter().fold(0, |acc, &f| (acc << 1) | u64::from(v & col_mask(self.cols, f) != 0))
    }

    /// The vector with the given coordinates (first coordinate most significant).
    pub fn combine(&self, coords: u64) -> u64 {
        let d = self.dim();
        self.basis.iter().enumerate().filter(|(i, _)| coords >> (d - 1 - i) & 1 == 1).fold(0, |v, (_, &b)| v ^ b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    /// Brute force: count null vectors, check 2^dim of them.
    fn check(m: &Gf2Matrix) {
        let ns = m.rank_nullspace();
        assert_eq!(ns.rank + ns.dim(), m.cols());
        for &b in &ns.basis {
            assert!(m.annihilates(b));
        }
        if m.cols() <= 12 {
            let null: Vec<u64> = (0..1u64 << m.cols()).filter(|&v| m.annihilates(v)).collect();
            assert_eq!(null.len(), 1 << ns.dim(), "{m:?}");
            for &v in &null {
                assert_eq!(ns.combine(ns.coordinates(v)), v);
            }
        }
    }

    #[test]
    fn examples() {
        let m = Gf2Matrix::from_rows(&[bs("00"), bs("11")]).unwrap();
        let ns = m.rank_nullspace();
        assert_eq!((ns.rank, ns.basis.clone()), (1, vec![0b11]));
        let id = Gf2Matrix::from_packed(5, (0..5).map(|k| 1 << k).collect()).unwrap();
        let ns = id.rank_nullspace();
        assert_eq!((ns.rank, ns.dim()), (5, 0));
        let empty = Gf2Matrix::new(3).unwrap().rank_nullspace();
        assert_eq!((empty.rank, empty.dim()), (0, 3));
    }

    #[test]
    fn exhaustive_small() {
        for rows in 1..=3 {
            for cols in 1..=3 {
                for bits in 0..1u64 << (rows * cols) {
                    let packed = (0..rows).map(|r| (bits >> (r * cols)) & ((1 << cols) - 1)).collect();
                    check(&Gf2Matrix::from_packed(cols, packed).unwrap());
                }
            }
        }
    }

    #[test]
    fn random_matrices() {
        let mut rng = stream(11, 0);
        for t in 0..300 {
            let cols = 1 + t % 16;
            let rows = t % 20;
            check(&Gf2Matrix::random(rows, cols, &mut rng).unwrap());
        }
        check(&Gf2Matrix::random(70, 64, &mut rng).unwrap());
        check(&Gf2Matrix::random(10, 64, &mut rng).unwrap());
    }

    #[test]
    fn rejects_wide_rows() {
        let mut m = Gf2Matrix::new(3).unwrap();
        assert!(m.push_row(0b1000).is_err());
        assert!(Gf2Matrix::new(65).is_err());
    }
}
