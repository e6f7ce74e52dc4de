use faer::linalg::solvers::Solve as _;
use faer::sparse::linalg::solvers::{Llt, Lu};
use faer::{Mat, Side};
use nalgebra::DVector;

use super::{relative_residual, LinalgError, SparseMatrix, SOLVE_TOL};

/// Result of a direct solve together with its recomputed relative residual.
#[derive(Debug, Clone)]
pub struct Solve {
    pub x: DVector<f64>,
    pub residual: f64,
}

const REFINEMENT_STEPS: usize = 3;

fn to_col(b: &DVector<f64>) -> Mat<f64> {
    Mat::from_fn(b.len(), 1, |i, _| b[i])
}

fn from_col(m: &Mat<f64>) -> DVector<f64> {
    DVector::from_iterator(m.nrows(), (0..m.nrows()).map(|i| m[(i, 0)]))
}

/// Sparse LU factorization with partial pivoting of a symmetric (possibly
/// indefinite) matrix, reusable across right-hand sides.
pub struct SymmetricIndefiniteFactor {
    matrix: SparseMatrix,
    lu: Option<Lu<usize, f64>>,
}

impl std::fmt::Debug for SymmetricIndefiniteFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymmetricIndefiniteFactor")
            .field("n", &self.matrix.nrows())
            .field("nnz", &self.matrix.nnz())
            .finish()
    }
}

impl SymmetricIndefiniteFactor {
    pub fn new(a: &SparseMatrix) -> Result<Self, LinalgError> {
        if a.nrows() != a.ncols() {
            return Err(LinalgError::DimensionMismatch {
                expected: a.nrows(),
                actual: a.ncols(),
            });
        }
        let asym = a.asymmetry().unwrap_or(0.0);
        if asym > 1e-12 * a.max_abs().max(f64::MIN_POSITIVE) {
            return Err(LinalgError::NotSymmetric { asymmetry: asym });
        }
        let lu = if a.nrows() == 0 {
            None
        } else {
            Some(
                a.to_faer()
                    .sp_lu()
                    .map_err(|_| LinalgError::SingularSystem { residual: f64::INFINITY })?,
            )
        };
        Ok(Self {
            matrix: a.clone(),
            lu,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    fn raw_solve(&self, b: &DVector<f64>) -> DVector<f64> {
        match &self.lu {
            Some(lu) => from_col(&lu.solve(to_col(b))),
            None => DVector::zeros(0),
        }
    }

    /// Solves `A x = b` with a few steps of iterative refinement and verifies
    /// the relative residual against [`SOLVE_TOL`].
    pub fn solve(&self, b: &DVector<f64>) -> Result<Solve, LinalgError> {
        self.solve_with_tol(b, SOLVE_TOL)
    }

    pub fn solve_with_tol(&self, b: &DVector<f64>, tol: f64) -> Result<Solve, LinalgError> {
        if b.len() != self.dim() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim(),
                actual: b.len(),
            });
        }
        if b.iter().all(|&v| v == 0.0) {
            return Ok(Solve {
                x: DVector::zeros(b.len()),
                residual: 0.0,
            });
        }
        let mut x = self.raw_solve(b);
        if !x.iter().all(|v| v.is_finite()) {
            return Err(LinalgError::SingularSystem { residual: f64::INFINITY });
        }
        let mut residual = relative_residual(&self.matrix, &x, b);
        for _ in 0..REFINEMENT_STEPS {
            if residual <= 1e-3 * tol {
                break;
            }
            let r = b - self.matrix.mul_vec(&x);
            let candidate = &x + self.raw_solve(&r);
            let res = relative_residual(&self.matrix, &candidate, b);
            if res.is_nan() || res >= residual {
                break;
            }
            x = candidate;
            residual = res;
        }
        if residual > tol {
            return Err(LinalgError::SingularSystem { residual });
        }
        Ok(Solve { x, residual })
    }
}

/// One-shot symmetric indefinite solve.
pub fn solve_symmetric_indefinite(a: &SparseMatrix, b: &DVector<f64>) -> Result<Solve, LinalgError> {
    SymmetricIndefiniteFactor::new(a)?.solve(b)
}

/// Sparse Cholesky factorization of a symmetric positive-definite matrix.
pub struct SpdFactor {
    n: usize,
    llt: Option<Llt<usize, f64>>,
}

impl std::fmt::Debug for SpdFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpdFactor").field("n", &self.n).finish()
    }
}

impl SpdFactor {
    pub fn new(a: &SparseMatrix) -> Result<Self, LinalgError> {
        if a.nrows() != a.ncols() {
            return Err(LinalgError::DimensionMismatch {
                expected: a.nrows(),
                actual: a.ncols(),
            });
        }
        let llt = if a.nrows() == 0 {
            None
        } else {
            Some(
                a.to_faer()
                    .sp_cholesky(Side::Lower)
                    .map_err(|_| LinalgError::NotPositiveDefinite)?,
            )
        };
        Ok(Self { n: a.nrows(), llt })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        assert_eq!(b.len(), self.n, "right-hand side length");
        match &self.llt {
            Some(llt) => from_col(&llt.solve(to_col(b))),
            None => DVector::zeros(0),
        }
    }
}
