//! Cholesky factorization and the SPD operations built on it.

use crate::error::{Error, Result};
use crate::numerics::matrix::Matrix;

/// Diagonal shift used by [`Cholesky::with_jitter`] on the retry.
pub const JITTER: f64 = 1e-8;

/// Lower-triangular factor `L` with `L Lᵀ = A`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Factors `a` after symmetrizing it.
    pub fn new(a: &Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        let n = a.rows();
        let a = a.symmetrized();
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: j, value: d });
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Cholesky { l })
    }

    /// Factors `a`; on failure retries once with `a + JITTER·I`.
    ///
    /// The boolean is true when the retry was needed.
    pub fn with_jitter(a: &Matrix) -> Result<(Self, bool)> {
        match Self::new(a) {
            Ok(c) => Ok((c, false)),
            Err(Error::NotPositiveDefinite { .. }) => {
                let mut shifted = a.clone();
                shifted.add_diag(JITTER);
                Self::new(&shifted).map(|c| (c, true))
            }
            Err(e) => Err(e),
        }
    }

    pub fn l(&self) -> &Matrix {
        &self.l
    }

    pub fn into_l(self) -> Matrix {
        self.l
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    /// Solves `L y = b` in place.
    pub fn forward(&self, b: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let row = self.l.row(i);
            let mut s = b[i];
            for k in 0..i {
                s -= row[k] * b[k];
            }
            b[i] = s / row[i];
        }
    }

    /// Solves `Lᵀ x = y` in place.
    pub fn backward(&self, y: &mut [f64]) {
        let n = self.dim();
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= self.l[(k, i)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: b.len(),
            });
        }
        let mut x = b.to_vec();
        self.forward(&mut x);
        self.backward(&mut x);
        Ok(x)
    }

    pub fn log_det(&self) -> f64 {
        2.0 * self.l.diag().iter().map(|d| d.ln()).sum::<f64>()
    }

    /// `A⁻¹`, symmetrized.
    pub fn inverse(&self) -> Matrix {
        let n = self.dim();
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|x| *x = 0.0);
            e[j] = 1.0;
            self.forward(&mut e);
            self.backward(&mut e);
            for i in 0..n {
                inv[(i, j)] = e[i];
            }
        }
        inv.symmetrized()
    }

    /// `L z`, mapping a standard-normal draw to one with covariance `A`.
    pub fn mul_l(&self, z: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let row = self.l.row(i);
                (0..=i).map(|k| row[k] * z[k]).sum()
            })
            .collect()
    }
}

/// Lower-triangular Cholesky factor of an SPD matrix.
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    Cholesky::new(a).map(Cholesky::into_l)
}

/// Solves `a x = b` for SPD `a`.
pub fn solve_spd(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    Cholesky::new(a)?.solve(b)
}

/// `ln |a|` for SPD `a`, as `2 Σ ln L_ii`.
pub fn log_det_spd(a: &Matrix) -> Result<f64> {
    Ok(Cholesky::new(a)?.log_det())
}

pub fn inverse_spd(a: &Matrix) -> Result<Matrix> {
    Ok(Cholesky::new(a)?.inverse())
}
