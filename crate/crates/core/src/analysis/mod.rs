//! Norms, stability constants and approximation errors.

mod convergence;

use nalgebra::DVector;
use thiserror::Error;

use crate::complex::{dirac_saddle_matrix, Cochain, ComplexError, GradedComplex, HarmonicBasis};
use crate::linalg::{generalized_symmetric_eig, smallest_magnitude_eig, LinalgError, SparseMatrix, SpdFactor};
use crate::mesh::{Domain, DomainTag};
use crate::solvers::SolverError;
use crate::whitney::{self, AnalyticForm, BoundaryCondition, GradedForm, LocalGeometry, QuadratureRule, WhitneyError};

pub use convergence::{convergence_study, ConvergenceLevel, ConvergenceReport, ManufacturedProblem, CSV_HEADER};

/// Above this many unknowns the inf-sup eigenproblem is solved by
/// shift-invert Lanczos instead of a dense eigensolver.
pub const DENSE_EIGEN_LIMIT: usize = 1200;

/// Relative eigenvalue threshold separating `ker D` from its complement.
pub const KERNEL_EIGEN_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Whitney(#[from] WhitneyError),
    #[error("solver failure: {0}")]
    Linalg(#[from] LinalgError),
    #[error("the orthogonal complement of ker d is empty")]
    EmptyComplement,
    #[error("problem {problem} is not defined on {domain:?} with {bc} boundary conditions")]
    UnsupportedProblem { problem: String, domain: Domain, bc: BoundaryCondition },
    #[error("a convergence study needs at least 2 levels, got {0}")]
    TooFewLevels(usize),
}

/// `(‖x‖_W, ‖x‖_V)` with `‖x‖²_V = ‖x‖²_W + ‖Dx‖²_W`.
pub fn norms(complex: &GradedComplex, x: &Cochain) -> (f64, f64) {
    (complex.norm_w(x), complex.norm_v(x))
}

/// Discrete Poincaré constant: the maximum of `‖v‖_V / ‖Dv‖_W` over the
/// M-orthogonal complement of `ker D`, equal to `√(1 + 1/λ_min)` where
/// `λ_min` is the smallest nonzero eigenvalue of `DᵀMD` against `M`.
pub fn poincare_constant(complex: &GradedComplex) -> Result<f64, AnalysisError> {
    let mut lambda_min = f64::INFINITY;
    for k in 0..2 {
        if complex.dims()[k] == 0 || complex.dims()[k + 1] == 0 {
            continue;
        }
        let d = complex.d_block(k);
        let stiffness = d.transpose().matmul(&complex.m_block(k + 1).matmul(d));
        let eig = generalized_symmetric_eig(&stiffness, complex.m_block(k))?;
        let top = eig.values.last().copied().unwrap_or(0.0);
        if let Some(&lambda) = eig.values.iter().find(|&&v| v > KERNEL_EIGEN_TOL * top) {
            lambda_min = lambda_min.min(lambda);
        }
    }
    if !lambda_min.is_finite() {
        return Err(AnalysisError::EmptyComplement);
    }
    Ok((1.0 + 1.0 / lambda_min).sqrt())
}

/// The `V × 𝔥` Gram matrix `blockdiag(M + DᵀMD, HᵀMH)`.
pub fn product_norm_matrix(complex: &GradedComplex, harmonic: &HarmonicBasis) -> SparseMatrix {
    let (d, m) = (complex.d(), complex.m());
    let v_gram = m.add_scaled(1.0, &d.transpose().matmul(&m.matmul(d)));
    let h = harmonic.matrix();
    let h_gram = SparseMatrix::from_dense(&(h.transpose() * m.mul_dense(h)));
    let n = complex.total_dim();
    SparseMatrix::block(
        &[n, harmonic.total()],
        &[n, harmonic.total()],
        &[(0, 0, &v_gram), (1, 1, &h_gram)],
    )
}

/// Discrete inf-sup constant: the smallest `|λ|` of `G x = λ N x` with `G`
/// the Dirac saddle matrix and `N` from [`product_norm_matrix`].
pub fn infsup_constant(complex: &GradedComplex, harmonic: &HarmonicBasis) -> Result<f64, AnalysisError> {
    let g = dirac_saddle_matrix(complex, harmonic);
    let n = product_norm_matrix(complex, harmonic);
    if g.nrows() <= DENSE_EIGEN_LIMIT {
        let eig = generalized_symmetric_eig(&g, &n)?;
        Ok(eig.values.iter().fold(f64::INFINITY, |acc, v| acc.min(v.abs())))
    } else {
        Ok(smallest_magnitude_eig(&g, &n)?)
    }
}

/// Poincaré and inf-sup constants of one complex.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityConstants {
    pub c_p: f64,
    pub gamma_h: f64,
    pub tag: DomainTag,
    pub bc: BoundaryCondition,
    pub dims: [usize; 3],
    /// Maximum edge length.
    pub h: f64,
}

impl StabilityConstants {
    pub fn compute(complex: &GradedComplex, harmonic: &HarmonicBasis) -> Result<Self, AnalysisError> {
        Ok(Self {
            c_p: poincare_constant(complex)?,
            gamma_h: infsup_constant(complex, harmonic)?,
            tag: complex.mesh().tag(),
            bc: complex.bc(),
            dims: complex.dims(),
            h: complex.mesh().h(),
        })
    }

    /// `γ_h c_P²`, recorded for comparison with the inf-sup proof.
    pub fn proof_ratio(&self) -> f64 {
        self.gamma_h * self.c_p * self.c_p
    }
}

/// `∫ |w_k − field_k|²` summed over degrees, where the field is the Whitney
/// interpolant of `x` and missing components of `exact` count as zero.
pub fn squared_field_error(
    complex: &GradedComplex,
    x: &Cochain,
    exact: &GradedForm,
    rule: &QuadratureRule,
) -> Result<f64, AnalysisError> {
    let mut total = 0.0;
    for k in 0..3 {
        let full = complex.extend_component(x, k);
        total += component_error(complex, k, &full, exact.component(k), rule)?;
    }
    Ok(total)
}

fn component_error(
    complex: &GradedComplex,
    k: usize,
    full: &DVector<f64>,
    exact: Option<&AnalyticForm>,
    rule: &QuadratureRule,
) -> Result<f64, AnalysisError> {
    if exact.is_none() && full.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let mesh = complex.mesh();
    let mut total = 0.0;
    for t in 0..mesh.count(2) {
        let geom = LocalGeometry::new(mesh, t)?;
        for (bary, &w) in rule.points.iter().zip(&rule.weights) {
            let field = whitney::evaluate_local(&geom, k, full, t, bary);
            let target = match exact {
                Some(f) => {
                    let [x, y] = geom.point(bary);
                    f.eval(x, y)
                }
                None => [0.0, 0.0],
            };
            let (a, b) = (target[0] - field[0], target[1] - field[1]);
            total += w * geom.area * (a * a + b * b);
        }
    }
    Ok(total)
}

/// `E(w) = ‖w − P_h w‖`, with `P_h` the L² projection onto the Whitney
/// space of degree `w.degree()`, computed with [`QuadratureRule::fine`].
pub fn best_approx_error(complex: &GradedComplex, w: &AnalyticForm) -> Result<f64, AnalysisError> {
    best_approx_error_with(complex, w, &QuadratureRule::fine())
}

/// [`best_approx_error`] with an explicit quadrature rule.
pub fn best_approx_error_with(complex: &GradedComplex, w: &AnalyticForm, rule: &QuadratureRule) -> Result<f64, AnalysisError> {
    let k = w.degree();
    let load = whitney::load_vector_with(complex.mesh(), k, w, complex.bc(), rule)?;
    let coefficients = SpdFactor::new(complex.m_block(k))?.solve(&load);
    let full = complex.dofs().extend(k, &coefficients);
    Ok(component_error(complex, k, &full, Some(w), rule)?.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::DEFAULT_RANK_TOL;
    use crate::mesh::{generate_mesh, SimplicialMesh};
    use crate::solvers::{solve_dirac, DiracSource};
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn setup(domain: Domain, n: usize, bc: BoundaryCondition) -> (GradedComplex, HarmonicBasis) {
        let c = GradedComplex::build(&generate_mesh(domain, n), bc).unwrap();
        let h = c.harmonic_basis(DEFAULT_RANK_TOL).unwrap();
        (c, h)
    }

    fn triangle() -> SimplicialMesh {
        SimplicialMesh::from_triangles(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], [[0, 1, 2]], DomainTag::External).unwrap()
    }

    #[test]
    fn norms_basic_properties() {
        let (c, h) = setup(Domain::Disk, 3, BoundaryCondition::Natural);
        assert_eq!(norms(&c, &c.zero_cochain()), (0.0, 0.0));
        let q = h.vector(0);
        let (w, v) = norms(&c, &q);
        assert!((w - v).abs() < 1e-12 && (w - 1.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let x = c.cochain(DVector::from_fn(c.total_dim(), |_, _| rng.random_range(-1.0..1.0)));
            let (w, v) = norms(&c, &x);
            assert!(v >= w && v >= c.norm_w(&c.apply_d(&x)));
        }
    }

    /// Dense oracle: restrict the pencil to an explicit basis `Z = M⁻¹Dᵀ` of
    /// the complement of the kernel and take the smallest eigenvalue.
    fn restricted_lambda_min(c: &GradedComplex, k: usize) -> f64 {
        let d = c.d_block(k).to_dense();
        let m0 = c.m_block(k).to_dense();
        let m1 = c.m_block(k + 1).to_dense();
        let z_full = m0.clone().try_inverse().unwrap() * d.transpose();
        // drop dependent columns with a pivoted Gram–Schmidt in the M inner product
        let mut cols: Vec<DVector<f64>> = Vec::new();
        for j in 0..z_full.ncols() {
            let mut v = z_full.column(j).into_owned();
            for q in &cols {
                let c = q.dot(&(&m0 * &v));
                v -= c * q;
            }
            let n = v.dot(&(&m0 * &v)).sqrt();
            if n > 1e-9 * z_full.column(j).norm() {
                cols.push(v / n);
            }
        }
        let z = DMatrix::from_columns(&cols);
        // Z is M-orthonormal, so the restricted pencil is standard
        let a = z.transpose() * d.transpose() * m1 * d * &z;
        a.symmetric_eigen().eigenvalues.min()
    }

    #[test]
    fn poincare_matches_dense_oracle() {
        let c = GradedComplex::build(&triangle(), BoundaryCondition::Natural).unwrap();
        let l = restricted_lambda_min(&c, 0).min(restricted_lambda_min(&c, 1));
        let cp = poincare_constant(&c).unwrap();
        assert!((cp - (1.0 + 1.0 / l).sqrt()).abs() < 1e-10);
        assert!(cp >= 1.0);

        let (c, _) = setup(Domain::Annulus, 2, BoundaryCondition::Essential);
        let l = restricted_lambda_min(&c, 0).min(restricted_lambda_min(&c, 1));
        assert!((poincare_constant(&c).unwrap() - (1.0 + 1.0 / l).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn poincare_empty_complement() {
        let c = GradedComplex::build(&triangle(), BoundaryCondition::Essential).unwrap();
        assert!(matches!(poincare_constant(&c), Err(AnalysisError::EmptyComplement)));
    }

    #[test]
    fn poincare_bounded_under_refinement() {
        let values: Vec<f64> = [4, 8, 16]
            .iter()
            .map(|&n| poincare_constant(&setup(Domain::Square, n, BoundaryCondition::Natural).0).unwrap())
            .collect();
        for w in values.windows(2) {
            assert!(w[0] >= 1.0 && w[1] / w[0] <= 1.1, "{values:?}");
        }
    }

    #[test]
    fn infsup_dense_and_lanczos_agree() {
        let (c, h) = setup(Domain::Square, 4, BoundaryCondition::Natural);
        let g = dirac_saddle_matrix(&c, &h);
        let n = product_norm_matrix(&c, &h);
        let dense = infsup_constant(&c, &h).unwrap();
        let lanczos = smallest_magnitude_eig(&g, &n).unwrap();
        assert!((dense - lanczos).abs() < 1e-8 * dense, "{dense} {lanczos}");
        assert!(dense > 0.0);
    }

    #[test]
    fn infsup_positive_everywhere() {
        for domain in [Domain::Square, Domain::Disk, Domain::Annulus] {
            for bc in [BoundaryCondition::Natural, BoundaryCondition::Essential] {
                let (c, h) = setup(domain, 3, bc);
                let s = StabilityConstants::compute(&c, &h).unwrap();
                assert!(s.gamma_h > 0.0 && s.c_p >= 1.0, "{domain:?} {bc}");
                assert!(s.proof_ratio().is_finite());
            }
        }
    }

    #[test]
    fn amplification_bounded_by_infsup() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let (c, h) = setup(Domain::Annulus, 3, BoundaryCondition::Natural);
        let gamma = infsup_constant(&c, &h).unwrap();
        for _ in 0..10 {
            let f = c.cochain(DVector::from_fn(c.total_dim(), |_, _| rng.random_range(-1.0..1.0)));
            let f = &f * (1.0 / c.norm_w(&f));
            let sol = solve_dirac(&c, &h, &DiracSource::Cochain(f)).unwrap();
            let size = (c.norm_v(&sol.u).powi(2) + sol.p.norm_squared()).sqrt();
            assert!(size <= 1.0 / gamma * (1.0 + 1e-9));
        }
    }

    #[test]
    fn best_approx_reproduces_whitney_fields_and_constants() {
        let (c, _) = setup(Domain::Disk, 3, BoundaryCondition::Natural);
        assert!(best_approx_error(&c, &AnalyticForm::zero_form(|_, _| 2.5)).unwrap() < 1e-12);
        assert!(best_approx_error(&c, &AnalyticForm::one_form(|_, _| [1.0, -2.0])).unwrap() < 1e-12);
        assert!(best_approx_error(&c, &AnalyticForm::two_form(|_, _| 0.7)).unwrap() < 1e-12);
        // an affine 0-form lies in the Whitney space
        assert!(best_approx_error(&c, &AnalyticForm::zero_form(|x, y| 1.0 + 2.0 * x - y)).unwrap() < 1e-10);
        // rotation field (−y, x) is a lowest-order Whitney 1-form
        assert!(best_approx_error(&c, &AnalyticForm::one_form(|x, y| [-y, x])).unwrap() < 1e-10);
    }

    #[test]
    fn best_approx_rate_for_zero_forms() {
        let w = AnalyticForm::zero_form(|x, y| (PI * x).sin() * (PI * y).sin());
        let errs: Vec<(f64, f64)> = [8, 16, 32]
            .iter()
            .map(|&n| {
                let c = GradedComplex::build(&generate_mesh(Domain::Square, n), BoundaryCondition::Natural).unwrap();
                (c.mesh().h(), best_approx_error(&c, &w).unwrap())
            })
            .collect();
        let rate = (errs[1].1 / errs[2].1).ln() / (errs[1].0 / errs[2].0).ln();
        assert!((1.8..=2.2).contains(&rate), "{rate}");
    }

    #[test]
    fn field_error_of_interpolant_is_small() {
        let (c, _) = setup(Domain::Square, 4, BoundaryCondition::Natural);
        let form = GradedForm::zero().with_one(AnalyticForm::one_form(|x, y| [1.0 + y, 2.0 - x]));
        let x = c.interpolate(&form).unwrap();
        assert!(squared_field_error(&c, &x, &form, &QuadratureRule::fine()).unwrap() < 1e-24);
        assert!(squared_field_error(&c, &c.zero_cochain(), &GradedForm::zero(), &QuadratureRule::fine()).unwrap() == 0.0);
    }
}
