use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{from_faer, to_faer, LinalgError, SparseMatrix, SpdFactor, SymmetricIndefiniteFactor};

fn start_block(n: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(n, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// Estimate of `σ_max(A)` by power iteration on `AᵀA`, to about 1e-8 relative.
pub fn spectral_norm_estimate(a: &SparseMatrix) -> f64 {
    let n = a.ncols();
    if n == 0 || a.nnz() == 0 {
        return 0.0;
    }
    let mut x = start_block(n, 1, 0x5eed).column(0).into_owned();
    x /= x.norm();
    let mut sigma = 0.0;
    for _ in 0..200 {
        let y = a.tr_mul_vec(&a.mul_vec(&x));
        let norm = y.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm.sqrt();
        x = y / norm;
        if (next - sigma).abs() <= 1e-8 * next {
            return next;
        }
        sigma = next;
    }
    sigma
}

/// Orthonormal basis of `{ x : ‖Ax‖ ≤ tol_rel · σ_max · ‖x‖ }` for a sparse
/// `A` whose nullspace is small.
///
/// Runs block inverse iteration on `AᵀA + δI` (sparse Cholesky) and decides
/// the rank with the singular values of `A` restricted to the converged block,
/// so the acceptance test is the same singular-value threshold as the dense
/// [`nullspace`](super::nullspace).
pub fn sparse_nullspace(a: &SparseMatrix, tol_rel: f64) -> Result<Vec<DVector<f64>>, LinalgError> {
    assert!(tol_rel > 0.0, "tolerance must be positive");
    let n = a.ncols();
    if n == 0 {
        return Ok(Vec::new());
    }
    let sigma_max = spectral_norm_estimate(a);
    if sigma_max == 0.0 {
        return Ok((0..n)
            .map(|i| DVector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 }))
            .collect());
    }
    let threshold = tol_rel * sigma_max;
    let shift = 1e-10 * sigma_max * sigma_max;
    let normal = a.transpose().matmul(a).add_scaled(shift, &SparseMatrix::identity(n));
    let factor = SpdFactor::new(&normal)?;

    let mut block = 4.min(n);
    loop {
        let mut x = start_block(n, block, block as u64);
        let mut accepted = Vec::new();
        let mut converged = false;
        for _ in 0..30 {
            for j in 0..block {
                let col = x.column(j).into_owned();
                x.set_column(j, &factor.solve(&col));
            }
            x = x.qr().q();

            // Rayleigh–Ritz with respect to ‖A·‖ on the current block
            let ax = to_faer(&a.mul_dense(&x));
            let svd = ax.svd().map_err(|e| LinalgError::NoConvergence(format!("{e:?}")))?;
            let s = svd.S().column_vector();
            let candidates = &x * from_faer(svd.V());
            accepted.clear();
            let mut smallest_rejected = f64::INFINITY;
            for i in 0..block {
                // a wide block has trailing singular values equal to zero
                let sigma = if i < s.nrows() { s[i] } else { 0.0 };
                if sigma <= threshold {
                    accepted.push(candidates.column(i).into_owned());
                } else {
                    smallest_rejected = smallest_rejected.min(sigma);
                }
            }
            // rejected directions must be clearly separated from the threshold
            if smallest_rejected > 1e3 * threshold {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(LinalgError::NoConvergence(
                "nullspace block iteration did not separate the spectrum".into(),
            ));
        }
        if accepted.len() < block || block == n {
            return Ok(accepted);
        }
        block = (2 * block).min(n);
    }
}

const LANCZOS_TOL: f64 = 1e-10;

/// Smallest `|λ|` of `A x = λ B x` for symmetric nonsingular `A` and SPD `B`,
/// by shift-invert Lanczos on `A⁻¹B` in the `B` inner product.
pub fn smallest_magnitude_eig(a: &SparseMatrix, b: &SparseMatrix) -> Result<f64, LinalgError> {
    let n = a.nrows();
    if b.nrows() != n || a.ncols() != n || b.ncols() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            actual: b.nrows(),
        });
    }
    if n == 0 {
        return Err(LinalgError::DimensionMismatch { expected: 1, actual: 0 });
    }
    let factor = SymmetricIndefiniteFactor::new(a)?;
    let b_norm = |v: &DVector<f64>| v.dot(&b.mul_vec(v));

    let mut v = start_block(n, 1, 0x1a2c).column(0).into_owned();
    let nv = b_norm(&v);
    if nv.is_nan() || nv <= 0.0 {
        return Err(LinalgError::NotPositiveDefinite);
    }
    v /= nv.sqrt();

    let max_iter = n.min(400);
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut b_basis: Vec<DVector<f64>> = Vec::new();
    let mut alphas = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    for j in 0..max_iter {
        let bv = b.mul_vec(&v);
        let mut w = factor.solve(&bv)?.x;
        let alpha = w.dot(&bv);
        w -= alpha * &v;
        if let (Some(prev), Some(&beta)) = (basis.last(), betas.last()) {
            w -= beta * prev;
        }
        basis.push(v.clone());
        b_basis.push(bv);
        for _ in 0..2 {
            for (q, bq) in basis.iter().zip(&b_basis) {
                let c = w.dot(bq);
                w -= c * q;
            }
        }
        alphas.push(alpha);
        let beta = b_norm(&w).max(0.0).sqrt();

        let m = j + 1;
        let t = DMatrix::from_fn(m, m, |r, c| {
            if r == c {
                alphas[r]
            } else if r + 1 == c {
                betas[r]
            } else if c + 1 == r {
                betas[c]
            } else {
                0.0
            }
        });
        let eig = t.symmetric_eigen();
        let (idx, theta) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
            .expect("tridiagonal matrix is nonempty");
        let ritz_residual = (beta * eig.eigenvectors[(m - 1, idx)]).abs();
        let exhausted = beta <= 1e-14 * theta.abs() || m == n;
        if (m >= 3 && ritz_residual <= LANCZOS_TOL * theta.abs()) || exhausted {
            return Ok(1.0 / theta.abs());
        }
        betas.push(beta);
        v = w / beta;
    }
    Err(LinalgError::NoConvergence(format!(
        "Lanczos did not converge in {max_iter} iterations"
    )))
}
