//! Discrete Hodge–Dirac problems on two-dimensional simplicial meshes.
//!
//! The crate builds the graded de Rham complex of lowest-order Whitney
//! forms on a triangulated planar domain and treats it as a single Hilbert
//! space `W` with a nilpotent operator `d` (the coboundary) and its
//! mass-matrix adjoint `d*`. On top of that it provides:
//!
//! * the harmonic space `ker d ∩ ker d*` and the discrete Hodge decomposition,
//! * the mixed Hodge–Dirac problem `D u + p = f` with `D = d + d*`,
//! * the mixed Hodge–Laplace problem, solved directly or by two Dirac solves,
//! * an analysis harness measuring Poincaré and inf-sup constants and
//!   convergence rates against manufactured solutions.
//!
//! The nilpotent-operator vocabulary maps onto the familiar Hilbert-complex
//! one as follows:
//!
//! | nilpotent operator on `W`          | Hilbert complex                       |
//! |------------------------------------|---------------------------------------|
//! | `W`, `V = D(d)`                    | `⊕ₖ Wᵏ`, `⊕ₖ Vᵏ`                      |
//! | `d` with `d² = 0`                  | `dᵏ: Vᵏ → Vᵏ⁺¹`                       |
//! | `𝔅 = R(d)`, `𝔷 = N(d)`, `𝔥`        | `⊕ₖ 𝔅ᵏ`, `⊕ₖ 𝔷ᵏ`, `⊕ₖ 𝔥ᵏ`            |
//! | closed range                       | closed complex                        |
//! | Fredholm                           | Fredholm complex                      |
//! | diffuse Fredholm                   | complex with the compactness property |
//!
//! ```no_run
//! use hodgedirac::prelude::*;
//!
//! let mesh = generate_mesh(Domain::Disk, 8);
//! let complex = GradedComplex::build(&mesh, BoundaryCondition::Natural).unwrap();
//! let harmonic = complex.harmonic_basis(DEFAULT_RANK_TOL).unwrap();
//! let solver = DiracSolver::new(&complex, &harmonic).unwrap();
//! let source = GradedForm::zero()
//!     .with_two(AnalyticForm::two_form(|x, y| x * y));
//! let solution = solver.solve(&DiracSource::Analytic(source)).unwrap();
//! println!("residual {:e}", solution.residual);
//! ```

pub mod analysis;
pub mod cli;
pub mod complex;
pub mod expr;
pub mod linalg;
pub mod mesh;
pub mod solvers;
pub mod whitney;

pub mod prelude {
    pub use crate::analysis::{
        best_approx_error, convergence_study, infsup_constant, norms, poincare_constant,
        ConvergenceReport, ManufacturedProblem, StabilityConstants,
    };
    pub use crate::complex::{
        hodge_decompose, BoundaryCondition, Cochain, GradedComplex, HarmonicBasis, HodgeParts,
        DEFAULT_RANK_TOL,
    };
    pub use crate::linalg::{DenseMatrix, SparseMatrix};
    pub use crate::mesh::{generate_mesh, Domain, SimplicialMesh};
    pub use crate::solvers::{
        dirac_from_laplace, solve_dirac, solve_laplace_mixed, solve_laplace_via_dirac,
        DiracSolution, DiracSolver, DiracSource, LaplaceSolution, LaplaceSolver,
    };
    pub use crate::whitney::{AnalyticForm, GradedForm};
}
