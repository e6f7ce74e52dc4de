//! The discrete Hodge–Dirac and Hodge–Laplace mixed problems.
//!
//! Dirac: find `u ∈ V_h`, `p ∈ 𝔥_h` with
//!
//! ```text
//! ⟨du, v⟩ + ⟨u, dv⟩ + ⟨p, v⟩ = ⟨f, v⟩   for all v ∈ V_h
//! ⟨u, q⟩                    = 0        for all q ∈ 𝔥_h
//! ```
//!
//! Laplace: find `σ`, `u`, `p` with `⟨σ, τ⟩ − ⟨u, dτ⟩ = 0`,
//! `⟨dσ, v⟩ + ⟨du, dv⟩ + ⟨p, v⟩ = ⟨f, v⟩` and `⟨u, q⟩ = 0`.
//!
//! Harmonic parts are stored as coefficients in the [`HarmonicBasis`].

use nalgebra::DVector;
use thiserror::Error;

use crate::complex::{dirac_saddle_matrix, Cochain, ComplexError, GradedComplex, HarmonicBasis};
use crate::linalg::{LinalgError, SparseMatrix, SymmetricIndefiniteFactor};
use crate::whitney::{GradedForm, QuadratureRule};

/// Default bound on recomputed relative residuals.
pub const DEFAULT_SOLVER_TOL: f64 = 1e-9;

/// Bound on the harmonic coefficients of the second Dirac solve in
/// [`solve_laplace_via_dirac`], relative to `‖w‖`.
pub const HARMONIC_LEAK_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error("solver failure: {0}")]
    SolverFailure(#[from] LinalgError),
    #[error("residual {residual:e} exceeds tolerance {tol:e}")]
    ResidualTooLarge { residual: f64, tol: f64 },
    #[error("harmonic basis does not belong to this complex")]
    BasisMismatch,
    #[error("second Dirac solve produced a harmonic part of size {norm:e}")]
    HarmonicLeak { norm: f64 },
    #[error("source has length {actual}, expected {expected}")]
    SourceLength { expected: usize, actual: usize },
}

/// Right-hand side of a mixed problem.
#[derive(Debug, Clone)]
pub enum DiracSource {
    /// `f` given as a cochain; the load is `M f`.
    Cochain(Cochain),
    /// A precomputed load vector `(⟨f, φᵢ⟩)ᵢ`.
    Load(DVector<f64>),
    /// A smooth graded form, integrated with the degree-4 rule.
    Analytic(GradedForm),
}

impl DiracSource {
    pub fn cochain(f: &Cochain) -> Self {
        DiracSource::Cochain(f.clone())
    }

    /// Load vector of `form` on `complex`.
    pub fn analytic(complex: &GradedComplex, form: &GradedForm) -> Result<Self, SolverError> {
        Ok(DiracSource::Load(complex.load(form, &QuadratureRule::degree4())?))
    }

    /// The load vector `(⟨f, φᵢ⟩)ᵢ`.
    pub fn load(&self, complex: &GradedComplex) -> Result<DVector<f64>, SolverError> {
        let load = match self {
            DiracSource::Cochain(f) => {
                if f.dims() != complex.dims() {
                    return Err(ComplexError::DimensionMismatch {
                        expected: complex.dims(),
                        actual: f.dims(),
                    }
                    .into());
                }
                complex.apply_m(f)
            }
            DiracSource::Load(b) => b.clone(),
            DiracSource::Analytic(form) => complex.load(form, &QuadratureRule::degree4())?,
        };
        if load.len() != complex.total_dim() {
            return Err(SolverError::SourceLength {
                expected: complex.total_dim(),
                actual: load.len(),
            });
        }
        Ok(load)
    }
}

/// An assembled symmetric indefinite system with its block layout.
#[derive(Debug, Clone)]
pub struct SaddleSystem {
    pub matrix: SparseMatrix,
    pub rhs: DVector<f64>,
    /// Size of the cochain block(s).
    pub u_size: usize,
    /// Size of the harmonic block.
    pub p_size: usize,
}

/// The Dirac saddle system `[MD + DᵀM, MH; HᵀM, 0] [u; p] = [b; 0]`.
pub fn assemble_dirac_system(
    complex: &GradedComplex,
    harmonic: &HarmonicBasis,
    source: &DiracSource,
) -> Result<SaddleSystem, SolverError> {
    check_basis(complex, harmonic)?;
    let n = complex.total_dim();
    let mut rhs = DVector::zeros(n + harmonic.total());
    rhs.rows_mut(0, n).copy_from(&source.load(complex)?);
    Ok(SaddleSystem {
        matrix: dirac_saddle_matrix(complex, harmonic),
        rhs,
        u_size: n,
        p_size: harmonic.total(),
    })
}

/// The symmetric three-field Laplace matrix
/// `[−M, DᵀM, 0; MD, DᵀMD, MH; 0, HᵀM, 0]` acting on `[σ; u; p]`.
pub fn laplace_matrix(complex: &GradedComplex, harmonic: &HarmonicBasis) -> SparseMatrix {
    let (d, m) = (complex.d(), complex.m());
    let md = m.matmul(d);
    let dtm = md.transpose();
    let dtmd = dtm.matmul(d);
    let neg_m = m.scaled(-1.0);
    let mh = SparseMatrix::from_dense(&m.mul_dense(harmonic.matrix()));
    let hm = mh.transpose();
    let n = complex.total_dim();
    SparseMatrix::block(
        &[n, n, harmonic.total()],
        &[n, n, harmonic.total()],
        &[(0, 0, &neg_m), (0, 1, &dtm), (1, 0, &md), (1, 1, &dtmd), (1, 2, &mh), (2, 1, &hm)],
    )
}

fn check_basis(complex: &GradedComplex, harmonic: &HarmonicBasis) -> Result<(), SolverError> {
    if harmonic.matrix().nrows() != complex.total_dim() {
        return Err(SolverError::BasisMismatch);
    }
    Ok(())
}

/// Largest per-equation residual `‖rᵢ‖ / ‖b‖` of a block system.
fn block_residual(matrix: &SparseMatrix, x: &DVector<f64>, rhs: &DVector<f64>, sizes: &[usize]) -> f64 {
    let r = matrix.mul_vec(x) - rhs;
    let scale = rhs.norm();
    if scale == 0.0 {
        return if r.norm() == 0.0 { 0.0 } else { f64::INFINITY };
    }
    let mut start = 0;
    let mut worst: f64 = 0.0;
    for &s in sizes {
        worst = worst.max(r.rows(start, s).norm() / scale);
        start += s;
    }
    worst
}

/// Solution `(u_h, p_h)` of the discrete Dirac problem.
#[derive(Debug, Clone)]
pub struct DiracSolution {
    pub u: Cochain,
    /// Coefficients of `p_h` in the harmonic basis.
    pub p: DVector<f64>,
    /// Largest relative residual of the two equations.
    pub residual: f64,
}

impl DiracSolution {
    /// `p_h` as a cochain.
    pub fn p_cochain(&self, harmonic: &HarmonicBasis) -> Cochain {
        harmonic.cochain(&self.p)
    }
}

/// Factorized Dirac saddle matrix, reusable across right-hand sides.
#[derive(Debug)]
pub struct DiracSolver<'a> {
    complex: &'a GradedComplex,
    harmonic: &'a HarmonicBasis,
    factor: SymmetricIndefiniteFactor,
    tol: f64,
}

impl<'a> DiracSolver<'a> {
    pub fn new(complex: &'a GradedComplex, harmonic: &'a HarmonicBasis) -> Result<Self, SolverError> {
        check_basis(complex, harmonic)?;
        let factor = SymmetricIndefiniteFactor::new(&dirac_saddle_matrix(complex, harmonic))?;
        Ok(Self {
            complex,
            harmonic,
            factor,
            tol: DEFAULT_SOLVER_TOL,
        })
    }

    /// Overrides the residual tolerance.
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn matrix(&self) -> &SparseMatrix {
        self.factor.matrix()
    }

    pub fn solve(&self, source: &DiracSource) -> Result<DiracSolution, SolverError> {
        self.solve_load(&source.load(self.complex)?)
    }

    /// Solves with a precomputed load vector.
    pub fn solve_load(&self, load: &DVector<f64>) -> Result<DiracSolution, SolverError> {
        let n = self.complex.total_dim();
        let h = self.harmonic.total();
        let mut rhs = DVector::zeros(n + h);
        rhs.rows_mut(0, n).copy_from(load);
        let sol = self.factor.solve_with_tol(&rhs, self.tol)?;
        let residual = block_residual(self.factor.matrix(), &sol.x, &rhs, &[n, h]);
        if residual > self.tol {
            return Err(SolverError::ResidualTooLarge { residual, tol: self.tol });
        }
        Ok(DiracSolution {
            u: self.complex.cochain(sol.x.rows(0, n).into_owned()),
            p: sol.x.rows(n, h).into_owned(),
            residual,
        })
    }

    /// Residual of an arbitrary candidate `(u, p)` for `source`.
    pub fn residual(&self, candidate: &DiracSolution, source: &DiracSource) -> Result<f64, SolverError> {
        dirac_residual(self.complex, self.harmonic, candidate, source)
    }
}

/// Largest relative residual of `(u, p)` in the two Dirac equations.
pub fn dirac_residual(
    complex: &GradedComplex,
    harmonic: &HarmonicBasis,
    candidate: &DiracSolution,
    source: &DiracSource,
) -> Result<f64, SolverError> {
    let system = assemble_dirac_system(complex, harmonic, source)?;
    let x = DVector::from_iterator(
        system.u_size + system.p_size,
        candidate.u.values().iter().chain(candidate.p.iter()).copied(),
    );
    Ok(block_residual(&system.matrix, &x, &system.rhs, &[system.u_size, system.p_size]))
}

/// One-shot Dirac solve.
pub fn solve_dirac(complex: &GradedComplex, harmonic: &HarmonicBasis, source: &DiracSource) -> Result<DiracSolution, SolverError> {
    DiracSolver::new(complex, harmonic)?.solve(source)
}

/// Solution `(σ_h, u_h, p_h)` of the discrete Laplace problem.
#[derive(Debug, Clone)]
pub struct LaplaceSolution {
    pub sigma: Cochain,
    pub u: Cochain,
    /// Coefficients of `p_h` in the harmonic basis.
    pub p: DVector<f64>,
    /// Largest relative residual of the three equations.
    pub residual: f64,
}

/// Largest relative residual of `(σ, u, p)` in the three Laplace equations.
pub fn laplace_residual(
    complex: &GradedComplex,
    harmonic: &HarmonicBasis,
    candidate: &LaplaceSolution,
    source: &DiracSource,
) -> Result<f64, SolverError> {
    check_basis(complex, harmonic)?;
    let n = complex.total_dim();
    let h = harmonic.total();
    let mut rhs = DVector::zeros(2 * n + h);
    rhs.rows_mut(n, n).copy_from(&source.load(complex)?);
    let x = DVector::from_iterator(
        2 * n + h,
        candidate
            .sigma
            .values()
            .iter()
            .chain(candidate.u.values().iter())
            .chain(candidate.p.iter())
            .copied(),
    );
    Ok(block_residual(&laplace_matrix(complex, harmonic), &x, &rhs, &[n, n, h]))
}

/// Factorized three-field Laplace matrix.
#[derive(Debug)]
pub struct LaplaceSolver<'a> {
    complex: &'a GradedComplex,
    harmonic: &'a HarmonicBasis,
    factor: SymmetricIndefiniteFactor,
    tol: f64,
}

impl<'a> LaplaceSolver<'a> {
    pub fn new(complex: &'a GradedComplex, harmonic: &'a HarmonicBasis) -> Result<Self, SolverError> {
        check_basis(complex, harmonic)?;
        let factor = SymmetricIndefiniteFactor::new(&laplace_matrix(complex, harmonic))?;
        Ok(Self {
            complex,
            harmonic,
            factor,
            tol: DEFAULT_SOLVER_TOL,
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn matrix(&self) -> &SparseMatrix {
        self.factor.matrix()
    }

    pub fn solve(&self, source: &DiracSource) -> Result<LaplaceSolution, SolverError> {
        let n = self.complex.total_dim();
        let h = self.harmonic.total();
        let mut rhs = DVector::zeros(2 * n + h);
        rhs.rows_mut(n, n).copy_from(&source.load(self.complex)?);
        let sol = self.factor.solve_with_tol(&rhs, self.tol)?;
        let residual = block_residual(self.factor.matrix(), &sol.x, &rhs, &[n, n, h]);
        if residual > self.tol {
            return Err(SolverError::ResidualTooLarge { residual, tol: self.tol });
        }
        Ok(LaplaceSolution {
            sigma: self.complex.cochain(sol.x.rows(0, n).into_owned()),
            u: self.complex.cochain(sol.x.rows(n, n).into_owned()),
            p: sol.x.rows(2 * n, h).into_owned(),
            residual,
        })
    }
}

/// Direct solve of the three-field Laplace system.
pub fn solve_laplace_mixed(
    complex: &GradedComplex,
    harmonic: &HarmonicBasis,
    source: &DiracSource,
) -> Result<LaplaceSolution, SolverError> {
    LaplaceSolver::new(complex, harmonic)?.solve(source)
}

/// Laplace solution from two Dirac solves: `(w, p)` solves the Dirac problem
/// for `f`, `(u, 0)` solves it for `w`, and `σ = w − D u`.
pub fn solve_laplace_via_dirac(
    complex: &GradedComplex,
    harmonic: &HarmonicBasis,
    source: &DiracSource,
) -> Result<LaplaceSolution, SolverError> {
    let solver = DiracSolver::new(complex, harmonic)?;
    laplace_via_dirac_with(&solver, complex, harmonic, source)
}

/// [`solve_laplace_via_dirac`] with an existing factorization.
pub fn laplace_via_dirac_with(
    solver: &DiracSolver<'_>,
    complex: &GradedComplex,
    harmonic: &HarmonicBasis,
    source: &DiracSource,
) -> Result<LaplaceSolution, SolverError> {
    let first = solver.solve(source)?;
    let w = first.u;
    let second = solver.solve(&DiracSource::Cochain(w.clone()))?;
    let leak = second.p.norm();
    if leak > HARMONIC_LEAK_TOL * complex.norm_w(&w) {
        return Err(SolverError::HarmonicLeak { norm: leak });
    }
    let u = second.u;
    let sigma = &w - &complex.apply_d(&u);
    let mut sol = LaplaceSolution {
        sigma,
        u,
        p: first.p,
        residual: 0.0,
    };
    sol.residual = laplace_residual(complex, harmonic, &sol, source)?;
    Ok(sol)
}

/// The Dirac solution `(σ + D u, p)` built from a Laplace solution. Its
/// `residual` field carries over the Laplace residual; use
/// [`dirac_residual`] to measure it against a source.
pub fn dirac_from_laplace(complex: &GradedComplex, sol: &LaplaceSolution) -> DiracSolution {
    DiracSolution {
        u: &sol.sigma + &complex.apply_d(&sol.u),
        p: sol.p.clone(),
        residual: sol.residual,
    }
}
