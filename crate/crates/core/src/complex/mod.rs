//! The discrete graded complex `(W_h, d)`.
//!
//! `W_h` carries the inner product `⟨x, y⟩ = xᵀ M y`, `d` is the block
//! coboundary matrix `D`, and the adjoint of `d` in that inner product is
//! `d* = M⁻¹ Dᵀ M`. The domain `V_h` of `d` is all of `W_h`, normed by
//! `xᵀ (M + DᵀMD) x`.

mod cochain;
mod decompose;
mod harmonic;

use std::sync::Arc;

use nalgebra::DVector;
use thiserror::Error;

use crate::linalg::{LinalgError, SparseMatrix, SpdFactor};
use crate::mesh::{MeshError, SimplicialMesh};
use crate::whitney::{self, DofMap, GradedForm, QuadratureRule, WhitneyError};

pub use crate::whitney::BoundaryCondition;
pub use cochain::Cochain;
pub use decompose::{dirac_saddle_matrix, hodge_decompose, HodgeParts};
pub use harmonic::{expected_harmonic_dims, HarmonicBasis, DENSE_NULLSPACE_LIMIT};

/// Relative singular-value threshold for harmonic detection.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ComplexError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Whitney(#[from] WhitneyError),
    #[error("solver failure: {0}")]
    SolverFailure(#[from] LinalgError),
    #[error("harmonic space of degree {degree} has dimension {found}, expected {expected}")]
    HarmonicDimension { degree: usize, expected: usize, found: usize },
    #[error("cochain has dimensions {actual:?}, complex has {expected:?}")]
    DimensionMismatch { expected: [usize; 3], actual: [usize; 3] },
}

/// Block operators of the discrete complex on a mesh.
#[derive(Debug, Clone)]
pub struct GradedComplex {
    mesh: Arc<SimplicialMesh>,
    bc: BoundaryCondition,
    dofs: DofMap,
    dims: [usize; 3],
    d_blocks: [SparseMatrix; 2],
    m_blocks: [SparseMatrix; 3],
    d: SparseMatrix,
    m: SparseMatrix,
    mass: Arc<SpdFactor>,
}

impl GradedComplex {
    pub fn build(mesh: &SimplicialMesh, bc: BoundaryCondition) -> Result<Self, ComplexError> {
        Self::from_shared(Arc::new(mesh.clone()), bc)
    }

    pub fn from_shared(mesh: Arc<SimplicialMesh>, bc: BoundaryCondition) -> Result<Self, ComplexError> {
        let dofs = DofMap::new(&mesh, bc);
        let dims = [dofs.len(0), dofs.len(1), dofs.len(2)];
        let d_blocks = [0, 1].map(|k| {
            mesh.coboundary(k)
                .map(|inc| inc.matrix.select(dofs.kept(k + 1), dofs.kept(k)))
        });
        let [d0, d1] = d_blocks;
        let d_blocks = [d0?, d1?];
        let m_blocks = [
            whitney::assemble_mass(&mesh, 0, bc)?,
            whitney::assemble_mass(&mesh, 1, bc)?,
            whitney::assemble_mass(&mesh, 2, bc)?,
        ];
        let d = SparseMatrix::block(&dims, &dims, &[(1, 0, &d_blocks[0]), (2, 1, &d_blocks[1])]);
        let m = SparseMatrix::block(
            &dims,
            &dims,
            &[(0, 0, &m_blocks[0]), (1, 1, &m_blocks[1]), (2, 2, &m_blocks[2])],
        );
        let mass = Arc::new(SpdFactor::new(&m)?);
        Ok(Self {
            mesh,
            bc,
            dofs,
            dims,
            d_blocks,
            m_blocks,
            d,
            m,
            mass,
        })
    }

    pub fn mesh(&self) -> &SimplicialMesh {
        &self.mesh
    }

    pub fn shared_mesh(&self) -> Arc<SimplicialMesh> {
        Arc::clone(&self.mesh)
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn dofs(&self) -> &DofMap {
        &self.dofs
    }

    /// DOF counts `(n₀, n₁, n₂)`.
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    /// Offset of the degree-`k` block in a graded vector.
    pub fn offset(&self, k: usize) -> usize {
        self.dims[..k].iter().sum()
    }

    /// The full block coboundary `D`.
    pub fn d(&self) -> &SparseMatrix {
        &self.d
    }

    /// The block-diagonal mass matrix `M`.
    pub fn m(&self) -> &SparseMatrix {
        &self.m
    }

    /// `D_k`, mapping degree `k` to degree `k + 1`, for `k ∈ {0, 1}`.
    pub fn d_block(&self, k: usize) -> &SparseMatrix {
        &self.d_blocks[k]
    }

    pub fn m_block(&self, k: usize) -> &SparseMatrix {
        &self.m_blocks[k]
    }

    pub fn zero_cochain(&self) -> Cochain {
        Cochain::zeros(self.dims)
    }

    pub fn cochain(&self, values: DVector<f64>) -> Cochain {
        Cochain::new(self.dims, values)
    }

    fn check(&self, x: &Cochain) -> Result<(), ComplexError> {
        if x.dims() != self.dims {
            return Err(ComplexError::DimensionMismatch {
                expected: self.dims,
                actual: x.dims(),
            });
        }
        Ok(())
    }

    pub fn apply_d(&self, x: &Cochain) -> Cochain {
        self.cochain(self.d.mul_vec(x.values()))
    }

    pub fn apply_m(&self, x: &Cochain) -> DVector<f64> {
        self.m.mul_vec(x.values())
    }

    /// `M⁻¹ r` for a dual vector `r`.
    pub fn solve_mass(&self, r: &DVector<f64>) -> Cochain {
        self.cochain(self.mass.solve(r))
    }

    /// The W-inner product `xᵀ M y`.
    pub fn inner(&self, x: &Cochain, y: &Cochain) -> f64 {
        x.values().dot(&self.m.mul_vec(y.values()))
    }

    pub fn norm_w(&self, x: &Cochain) -> f64 {
        self.inner(x, x).max(0.0).sqrt()
    }

    pub fn norm_v(&self, x: &Cochain) -> f64 {
        let dx = self.apply_d(x);
        (self.inner(x, x) + self.inner(&dx, &dx)).max(0.0).sqrt()
    }

    /// `d* x = M⁻¹ Dᵀ M x`.
    pub fn apply_codifferential(&self, x: &Cochain) -> Cochain {
        self.solve_mass(&self.d.tr_mul_vec(&self.apply_m(x)))
    }

    /// The discrete Hodge–Dirac operator `D_h u = D u + M⁻¹ Dᵀ M u`.
    pub fn apply_dirac(&self, u: &Cochain) -> Result<Cochain, ComplexError> {
        self.check(u)?;
        Ok(&self.apply_d(u) + &self.apply_codifferential(u))
    }

    /// Cochain of de Rham DOFs of a graded form.
    pub fn interpolate(&self, form: &GradedForm) -> Result<Cochain, ComplexError> {
        let mut parts = [0, 1, 2].map(|k| DVector::zeros(self.dims[k]));
        for (k, part) in parts.iter_mut().enumerate() {
            if let Some(f) = form.component(k) {
                *part = whitney::de_rham_map(&self.mesh, f, self.bc)?;
            }
        }
        Ok(Cochain::from_components(parts))
    }

    /// Graded load vector `⟨f, φᵢ⟩` of a graded form.
    pub fn load(&self, form: &GradedForm, rule: &QuadratureRule) -> Result<DVector<f64>, ComplexError> {
        let mut parts = [0, 1, 2].map(|k| DVector::zeros(self.dims[k]));
        for (k, part) in parts.iter_mut().enumerate() {
            if let Some(f) = form.component(k) {
                *part = whitney::load_vector_with(&self.mesh, k, f, self.bc, rule)?;
            }
        }
        Ok(Cochain::from_components(parts).into_values())
    }

    /// Full-length coefficient vector of degree `k`, zero on eliminated DOFs.
    pub fn extend_component(&self, x: &Cochain, k: usize) -> DVector<f64> {
        self.dofs.extend(k, &x.component(k).into_owned())
    }
}

/// Free function form of [`GradedComplex::build`].
pub fn build_complex(mesh: &SimplicialMesh, bc: BoundaryCondition) -> Result<GradedComplex, ComplexError> {
    GradedComplex::build(mesh, bc)
}

/// Free function form of [`GradedComplex::apply_dirac`].
pub fn apply_dirac(complex: &GradedComplex, u: &Cochain) -> Result<Cochain, ComplexError> {
    complex.apply_dirac(u)
}
