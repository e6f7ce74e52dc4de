//! Linear-algebra kernel sized for desk-scale meshes.
//!
//! Sparse storage and products are implemented here; sparse LU/Cholesky
//! factorizations and the dense SVD / symmetric eigensolvers are delegated
//! to `faer`. Dense matrices are exchanged as `nalgebra` types.

mod dense;
mod factor;
mod iterative;
mod sparse;

pub use dense::{generalized_symmetric_eig, nullspace, GeneralizedEigen};
pub use factor::{solve_symmetric_indefinite, Solve, SpdFactor, SymmetricIndefiniteFactor};
pub use iterative::{smallest_magnitude_eig, sparse_nullspace, spectral_norm_estimate};
pub use sparse::SparseMatrix;

use nalgebra::{DMatrix, DVector};

/// Dense matrix type used throughout the crate.
pub type DenseMatrix = DMatrix<f64>;

/// Relative residual required of every direct solve.
pub const SOLVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("entry ({row}, {col}) out of range for a {nrows}x{ncols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("singular system (achieved relative residual {residual:e})")]
    SingularSystem { residual: f64 },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),
}

/// Euclidean relative residual `‖Ax − b‖ / ‖b‖` (absolute when `b = 0`).
pub fn relative_residual(a: &SparseMatrix, x: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let r = a.mul_vec(x) - b;
    let bn = b.norm();
    if bn > 0.0 {
        r.norm() / bn
    } else {
        r.norm()
    }
}

pub(crate) fn to_faer(m: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub(crate) fn from_faer(m: faer::MatRef<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}
