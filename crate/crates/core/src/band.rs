//! Banded LU with partial pivoting, plus a bordered solver for a banded
//! matrix augmented by one dense column and one dense row.
//!
//! Storage follows the LAPACK band convention: a matrix with `kl`
//! subdiagonals and `ku` superdiagonals lives in a `(2*kl + ku + 1) x n`
//! array, column-major, with entry `(i, j)` at band row `kl + ku + i - j`.
//! The extra `kl` rows at the top hold the superdiagonal fill-in that row
//! pivoting creates.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Self { n, kl, ku, ldab, data: vec![0.0; ldab * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && j < self.n);
        debug_assert!(i + self.ku + self.kl >= j && j + self.kl >= i, "({i},{j}) out of band");
        j * self.ldab + (self.kl + self.ku + i - j)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.idx(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let idx = self.idx(i, j);
        self.data[idx] = value;
    }

    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let idx = self.idx(i, j);
        self.data[idx] += value;
    }

    /// In-place LU factorization with partial pivoting.
    #[allow(clippy::needless_range_loop)]
    pub fn factor(mut self) -> Result<BandLu> {
        let (n, kl, ku, ldab) = (self.n, self.kl, self.ku, self.ldab);
        let kv = kl + ku; // superdiagonals in U after fill-in
        let mut ipiv = vec![0usize; n];
        for j in 0..n {
            let last_row = (j + kl).min(n - 1);
            // Pivot search in column j.
            let mut piv = j;
            let mut best = self.data[self.idx(j, j)].abs();
            for i in (j + 1)..=last_row {
                let v = self.data[self.idx(i, j)].abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best == 0.0 {
                return Err(Error::SingularMatrix { column: j });
            }
            ipiv[j] = piv;
            let last_col = (j + kv).min(n - 1);
            if piv != j {
                for c in j..=last_col {
                    let a = c * ldab + (kv + j - c);
                    let b = c * ldab + (kv + piv - c);
                    self.data.swap(a, b);
                }
            }
            let diag = self.data[self.idx(j, j)];
            for i in (j + 1)..=last_row {
                let idx = self.idx(i, j);
                self.data[idx] /= diag;
            }
            for c in (j + 1)..=last_col {
                let ujc = self.data[self.idx(j, c)];
                if ujc != 0.0 {
                    for i in (j + 1)..=last_row {
                        let lij = self.data[self.idx(i, j)];
                        let idx = self.idx(i, c);
                        self.data[idx] -= lij * ujc;
                    }
                }
            }
        }
        Ok(BandLu { mat: self, ipiv })
    }
}

/// Factored form; solves by forward and backward substitution within the
/// band.
#[derive(Debug, Clone)]
pub struct BandLu {
    mat: BandMatrix,
    ipiv: Vec<usize>,
}

impl BandLu {
    #[allow(clippy::needless_range_loop)]
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, kl, ku) = (self.mat.n, self.mat.kl, self.mat.ku);
        debug_assert_eq!(b.len(), n);
        let kv = kl + ku;
        // L solve with the recorded row interchanges.
        for j in 0..n {
            let piv = self.ipiv[j];
            if piv != j {
                b.swap(j, piv);
            }
            let bj = b[j];
            if bj != 0.0 {
                let last = (j + kl).min(n - 1);
                for i in (j + 1)..=last {
                    b[i] -= self.mat.data[self.mat.idx(i, j)] * bj;
                }
            }
        }
        // U solve.
        for j in (0..n).rev() {
            b[j] /= self.mat.data[self.mat.idx(j, j)];
            let bj = b[j];
            if bj != 0.0 {
                let first = j.saturating_sub(kv);
                for i in first..j {
                    b[i] -= self.mat.data[self.mat.idx(i, j)] * bj;
                }
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// A banded matrix bordered by one dense column, one dense row, and a
/// corner scalar:
///
/// ```text
/// [ A   c ] [x]   [b]
/// [ r'  d ] [t] = [s]
/// ```
#[derive(Debug, Clone)]
pub struct BorderedBanded {
    pub band: BandMatrix,
    pub col: Vec<f64>,
    pub row: Vec<f64>,
    pub corner: f64,
}

#[derive(Debug)]
pub struct BorderedFactor {
    lu: BandLu,
    z: Vec<f64>,
    row: Vec<f64>,
    denom: f64,
}

impl BorderedBanded {
    /// Block elimination: factor A, precompute `z = A^{-1} c` and the Schur
    /// complement `d - r' z`.
    pub fn factor(self) -> Result<BorderedFactor> {
        let n = self.band.n();
        debug_assert_eq!(self.col.len(), n);
        debug_assert_eq!(self.row.len(), n);
        let lu = self.band.factor()?;
        let z = lu.solve(&self.col);
        let denom = self.corner - dot(&self.row, &z);
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::SingularMatrix { column: n });
        }
        Ok(BorderedFactor { lu, z, row: self.row, denom })
    }
}

impl BorderedFactor {
    /// Solves the bordered system for right-hand side `(b, s)`, returning
    /// `(x, t)`.
    pub fn solve(&self, b: &[f64], s: f64) -> (Vec<f64>, f64) {
        let mut y = self.lu.solve(b);
        let t = (s - dot(&self.row, &y)) / self.denom;
        for (yi, zi) in y.iter_mut().zip(&self.z) {
            *yi -= zi * t;
        }
        (y, t)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
