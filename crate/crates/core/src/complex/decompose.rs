use nalgebra::DVector;

use super::{Cochain, ComplexError, GradedComplex, HarmonicBasis};
use crate::linalg::{SparseMatrix, SymmetricIndefiniteFactor};

/// The components of `x = x_𝔅 + x_𝔥 + x_𝔅*`.
#[derive(Debug, Clone)]
pub struct HodgeParts {
    /// Exact part, in the range of `D`.
    pub b_part: Cochain,
    /// Harmonic part.
    pub h_part: Cochain,
    /// Coexact part, M-orthogonal to the kernel of `D`.
    pub bstar_part: Cochain,
    /// Relative residual of the underlying saddle solve.
    pub residual: f64,
}

/// The symmetric saddle matrix `[MD + DᵀM, MH; HᵀM, 0]`.
pub fn dirac_saddle_matrix(complex: &GradedComplex, harmonic: &HarmonicBasis) -> SparseMatrix {
    let md = complex.m().matmul(complex.d());
    let a = md.add_scaled(1.0, &md.transpose());
    let mh = SparseMatrix::from_dense(&complex.m().mul_dense(harmonic.matrix()));
    let hm = mh.transpose();
    SparseMatrix::block(
        &[complex.total_dim(), harmonic.total()],
        &[complex.total_dim(), harmonic.total()],
        &[(0, 0, &a), (0, 1, &mh), (1, 0, &hm)],
    )
}

/// Discrete Hodge decomposition of `x`.
///
/// Solving the Dirac problem `D u + d* u + H p = x` with `u ⟂ 𝔥` splits `x`
/// directly: `D u` is the exact part, `H p` the harmonic part, and the
/// remainder `d* u` the coexact part.
pub fn hodge_decompose(complex: &GradedComplex, harmonic: &HarmonicBasis, x: &Cochain) -> Result<HodgeParts, ComplexError> {
    if x.dims() != complex.dims() {
        return Err(ComplexError::DimensionMismatch {
            expected: complex.dims(),
            actual: x.dims(),
        });
    }
    let n = complex.total_dim();
    let factor = SymmetricIndefiniteFactor::new(&dirac_saddle_matrix(complex, harmonic))?;
    let mut rhs = DVector::zeros(n + harmonic.total());
    rhs.rows_mut(0, n).copy_from(&complex.apply_m(x));
    let sol = factor.solve(&rhs)?;
    let u = complex.cochain(sol.x.rows(0, n).into_owned());
    let p = sol.x.rows(n, harmonic.total()).into_owned();
    let b_part = complex.apply_d(&u);
    let h_part = harmonic.cochain(&p);
    let bstar_part = &(x - &b_part) - &h_part;
    Ok(HodgeParts {
        b_part,
        h_part,
        bstar_part,
        residual: sol.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::tests::random_cochain;
    use crate::complex::{BoundaryCondition, DEFAULT_RANK_TOL};
    use crate::mesh::{generate_mesh, Domain};
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(domain: Domain, n: usize, bc: BoundaryCondition) -> (GradedComplex, HarmonicBasis) {
        let c = GradedComplex::build(&generate_mesh(domain, n), bc).unwrap();
        let h = c.harmonic_basis(DEFAULT_RANK_TOL).unwrap();
        (c, h)
    }

    #[test]
    fn harmonic_input_is_purely_harmonic() {
        let (c, h) = setup(Domain::Annulus, 2, BoundaryCondition::Natural);
        for i in 0..h.total() {
            let q = h.vector(i);
            let parts = hodge_decompose(&c, &h, &q).unwrap();
            assert!(c.norm_w(&parts.b_part) < 1e-10);
            assert!(c.norm_w(&parts.bstar_part) < 1e-10);
            assert!(c.norm_w(&(&parts.h_part - &q)) < 1e-10);
        }
    }

    #[test]
    fn exact_input_is_purely_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (c, h) = setup(Domain::Disk, 3, BoundaryCondition::Essential);
        let x = c.apply_d(&random_cochain(&c, &mut rng));
        let parts = hodge_decompose(&c, &h, &x).unwrap();
        let scale = c.norm_w(&x);
        assert!(c.norm_w(&(&parts.b_part - &x)) < 1e-10 * scale);
        assert!(c.norm_w(&parts.h_part) < 1e-10 * scale);
        assert!(c.norm_w(&parts.bstar_part) < 1e-10 * scale);
    }

    /// M-orthogonal projector onto the column space of `b`.
    fn projector(b: &DMatrix<f64>, m: &DMatrix<f64>) -> DMatrix<f64> {
        if b.ncols() == 0 {
            return DMatrix::zeros(m.nrows(), m.nrows());
        }
        let gram = b.transpose() * m * b;
        b * gram.try_inverse().unwrap() * b.transpose() * m
    }

    /// Orthonormal eigenvectors of a symmetric PSD matrix with eigenvalue
    /// above (`above = true`) or below the relative threshold.
    fn eigen_basis(s: &DMatrix<f64>, tol: f64, above: bool) -> DMatrix<f64> {
        let e = s.clone().symmetric_eigen();
        let lmax = e.eigenvalues.amax();
        let cols: Vec<_> = (0..e.eigenvalues.len())
            .filter(|&i| (e.eigenvalues[i] > tol * lmax) == above)
            .map(|i| e.eigenvectors.column(i).into_owned())
            .collect();
        if cols.is_empty() {
            DMatrix::zeros(s.nrows(), 0)
        } else {
            DMatrix::from_columns(&cols)
        }
    }

    #[test]
    fn matches_dense_projector_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for bc in [BoundaryCondition::Natural, BoundaryCondition::Essential] {
            let (c, h) = setup(Domain::Square, 2, bc);
            let (d, m) = (c.d().to_dense(), c.m().to_dense());
            // range(D) = range(D Dᵀ) and 𝔥 = ker(DᵀD + M D Dᵀ M), by symmetric eigensolves
            let p_b = projector(&eigen_basis(&(&d * d.transpose()), 1e-12, true), &m);
            let normal = d.transpose() * &d + &m * &d * d.transpose() * &m;
            let p_h = projector(&eigen_basis(&normal, 1e-12, false), &m);
            for _ in 0..10 {
                let x = random_cochain(&c, &mut rng);
                let parts = hodge_decompose(&c, &h, &x).unwrap();
                let scale = x.coefficient_norm();
                assert!((parts.b_part.values() - &p_b * x.values()).amax() < 1e-10 * scale);
                assert!((parts.h_part.values() - &p_h * x.values()).amax() < 1e-10 * scale);
                let sum = &(&parts.b_part + &parts.h_part) + &parts.bstar_part;
                assert!((sum.values() - x.values()).norm() <= 1e-12 * scale);
                let nx = c.norm_w(&x).powi(2);
                assert!(c.inner(&parts.b_part, &parts.h_part).abs() < 1e-10 * nx);
                assert!(c.inner(&parts.b_part, &parts.bstar_part).abs() < 1e-10 * nx);
                assert!(c.inner(&parts.h_part, &parts.bstar_part).abs() < 1e-10 * nx);
            }
        }
    }

    #[test]
    fn decomposition_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (c, h) = setup(Domain::Annulus, 2, BoundaryCondition::Essential);
        let x = random_cochain(&c, &mut rng);
        let parts = hodge_decompose(&c, &h, &x).unwrap();
        let scale = c.norm_w(&x);
        let again = hodge_decompose(&c, &h, &parts.bstar_part).unwrap();
        assert!(c.norm_w(&(&again.bstar_part - &parts.bstar_part)) < 1e-10 * scale);
        assert!(c.norm_w(&again.b_part) < 1e-10 * scale && c.norm_w(&again.h_part) < 1e-10 * scale);
        let again = hodge_decompose(&c, &h, &parts.b_part).unwrap();
        assert!(c.norm_w(&(&again.b_part - &parts.b_part)) < 1e-10 * scale);
    }
}
