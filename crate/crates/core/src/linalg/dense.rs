use faer::Side;
use nalgebra::{DMatrix, DVector};

use super::{from_faer, to_faer, LinalgError, SparseMatrix};

/// Orthonormal basis of the numerical nullspace
/// `{ x : ‖Ax‖ ≤ tol_rel · σ_max · ‖x‖ }`, by singular-value thresholding.
pub fn nullspace(a: &DMatrix<f64>, tol_rel: f64) -> Vec<DVector<f64>> {
    assert!(tol_rel > 0.0, "tolerance must be positive");
    let (m, n) = a.shape();
    if n == 0 {
        return Vec::new();
    }
    if m == 0 {
        return (0..n).map(|i| DVector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 })).collect();
    }
    let fa = to_faer(a);
    let svd = if m >= n { fa.thin_svd() } else { fa.svd() }.expect("SVD converges on finite input");
    let s = svd.S().column_vector();
    let v = svd.V();
    let sigma_max = s[0];
    let threshold = tol_rel * sigma_max;
    (0..n)
        .filter(|&j| j >= s.nrows() || s[j] <= threshold)
        .map(|j| DVector::from_fn(n, |i, _| v[(i, j)]))
        .collect()
}

/// All eigenpairs of a symmetric-definite pencil.
#[derive(Debug, Clone)]
pub struct GeneralizedEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// B-orthonormal eigenvectors, one per column.
    pub vectors: DMatrix<f64>,
}

/// Solves `A x = λ B x` densely by Cholesky reduction to a standard
/// symmetric eigenproblem.
pub fn generalized_symmetric_eig(a: &SparseMatrix, b: &SparseMatrix) -> Result<GeneralizedEigen, LinalgError> {
    if a.nrows() != a.ncols() || b.nrows() != b.ncols() || a.nrows() != b.nrows() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.nrows(),
            actual: b.nrows(),
        });
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(GeneralizedEigen {
            values: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
        });
    }
    let fb = to_faer(&b.to_dense());
    let llt = fb.llt(Side::Lower).map_err(|_| LinalgError::NotPositiveDefinite)?;
    let l = llt.L();

    let mut y = to_faer(&a.to_dense());
    l.solve_lower_triangular_in_place(y.as_mut());
    let mut c = y.transpose().to_owned();
    l.solve_lower_triangular_in_place(c.as_mut());
    // symmetrize against rounding
    let c = faer::Mat::from_fn(n, n, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));

    let evd = c
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| LinalgError::NoConvergence(format!("{e:?}")))?;
    let values: Vec<f64> = (0..n).map(|i| evd.S().column_vector()[i]).collect();
    let mut x = evd.U().to_owned();
    l.transpose().solve_upper_triangular_in_place(x.as_mut());
    Ok(GeneralizedEigen {
        values,
        vectors: from_faer(x.as_ref()),
    })
}
