//! Dense Cholesky kernels shared by the samplers.
//!
//! The parent blocks and active-set Gram matrices handled here are small
//! (a handful of rows), so a plain column Cholesky with a scale-relative
//! pivot check is all that is needed.

use nalgebra::{DMatrix, DVector};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Default relative pivot tolerance: a pivot must exceed `PIVOT_EPS * max_i a_ii`.
pub const PIVOT_EPS: f64 = 1e-12;

/// Lower Cholesky factor `R` with `A = R Rᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    factor: Matrix,
}

/// Index and value of the first pivot that fell below tolerance.
#[derive(Debug, Clone, Copy)]
pub struct PivotFailure {
    pub index: usize,
    pub pivot: f64,
}

impl Cholesky {
    pub fn new(a: &Matrix) -> Result<Self, PivotFailure> {
        Self::with_tolerance(a, PIVOT_EPS)
    }

    pub fn with_tolerance(a: &Matrix, rel_eps: f64) -> Result<Self, PivotFailure> {
        let n = a.nrows();
        debug_assert_eq!(n, a.ncols());
        let max_diag = (0..n).map(|i| a[(i, i)].abs()).fold(0.0_f64, f64::max);
        let tol = rel_eps * max_diag;
        let mut r = Matrix::zeros(n, n);
        for j in 0..n {
            let mut pivot = a[(j, j)];
            for k in 0..j {
                pivot -= r[(j, k)] * r[(j, k)];
            }
            if !(pivot > tol) {
                return Err(PivotFailure { index: j, pivot });
            }
            let rjj = pivot.sqrt();
            r[(j, j)] = rjj;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= r[(i, k)] * r[(j, k)];
                }
                r[(i, j)] = s / rjj;
            }
        }
        Ok(Cholesky { factor: r })
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    pub fn factor(&self) -> &Matrix {
        &self.factor
    }

    /// Solves `R x = b`.
    pub fn solve_lower(&self, b: &[f64]) -> Vector {
        let r = &self.factor;
        let n = r.nrows();
        let mut x = Vector::from_column_slice(b);
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= r[(i, k)] * x[k];
            }
            x[i] = s / r[(i, i)];
        }
        x
    }

    /// Solves `Rᵀ x = b`.
    pub fn solve_upper(&self, b: &[f64]) -> Vector {
        let r = &self.factor;
        let n = r.nrows();
        let mut x = Vector::from_column_slice(b);
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= r[(k, i)] * x[k];
            }
            x[i] = s / r[(i, i)];
        }
        x
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vector {
        let y = self.solve_lower(b);
        self.solve_upper(y.as_slice())
    }

    pub fn log_det(&self) -> f64 {
        (0..self.dim()).map(|i| self.factor[(i, i)].ln()).sum::<f64>() * 2.0
    }
}

/// Extracts `A[idx, idx]`.
pub fn principal_submatrix(a: &Matrix, idx: &[usize]) -> Matrix {
    Matrix::from_fn(idx.len(), idx.len(), |r, c| a[(idx[r], idx[c])])
}

pub fn is_symmetric(a: &Matrix, tol: f64) -> bool {
    if a.nrows() != a.ncols() {
        return false;
    }
    let scale = a.amax().max(1.0);
    for j in 0..a.ncols() {
        for i in (j + 1)..a.nrows() {
            if (a[(i, j)] - a[(j, i)]).abs() > tol * scale {
                return false;
            }
        }
    }
    true
}
