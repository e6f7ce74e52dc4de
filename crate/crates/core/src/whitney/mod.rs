//! Lowest-order Whitney forms on triangulations.
//!
//! Basis conventions, for a triangle with vertices `i < j < k`:
//!
//! * degree 0: the hat functions `λᵢ`;
//! * degree 1: `W_(a,b) = λ_a dλ_b − λ_b dλ_a` for each edge `a < b`;
//! * degree 2: `φ_T = 2 dλᵢ ∧ dλⱼ`, a constant density of magnitude `1/|T|`
//!   whose sign follows the orientation of `(i, j, k)`.
//!
//! The degrees of freedom are vertex values, oriented edge integrals and
//! oriented triangle integrals, so both coboundary blocks are the integer
//! incidence matrices.

mod assembly;
mod forms;
mod quadrature;

use thiserror::Error;

use crate::mesh::{MeshError, SimplicialMesh};

pub use assembly::{
    assemble_mass, assemble_mass_full, de_rham_map, de_rham_map_full, evaluate_local, load_vector,
    load_vector_full, load_vector_with, sample_field, FieldSamples, LocalGeometry,
};
pub use forms::{AnalyticForm, GradedForm};
pub use quadrature::{EdgeRule, QuadratureRule};

#[derive(Debug, Error)]
pub enum WhitneyError {
    #[error("triangle {index} is degenerate (area {area:e})")]
    DegenerateTriangle { index: usize, area: f64 },
    #[error("expected a form of degree {expected}, got degree {actual}")]
    DegreeMismatch { expected: usize, actual: usize },
    #[error("invalid degree {0}")]
    InvalidDegree(usize),
    #[error("coefficient vector has length {actual}, expected {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Boundary conditions of the discrete complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    /// The full complex; no constraint on boundary traces.
    Natural,
    /// Vanishing traces: boundary vertex and edge DOFs are eliminated.
    Essential,
}

impl std::fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BoundaryCondition::Natural => "natural",
            BoundaryCondition::Essential => "essential",
        })
    }
}

/// Correspondence between the simplices of a mesh and the retained DOFs of
/// each degree.
#[derive(Debug, Clone)]
pub struct DofMap {
    kept: [Vec<usize>; 3],
    local: [Vec<Option<usize>>; 3],
}

impl DofMap {
    pub fn new(mesh: &SimplicialMesh, bc: BoundaryCondition) -> Self {
        let build = |k: usize| -> (Vec<usize>, Vec<Option<usize>>) {
            let n = mesh.count(k);
            let removed = match (bc, k) {
                (BoundaryCondition::Essential, 0 | 1) => mesh.boundary_simplices(k).expect("degree is 0 or 1"),
                _ => Vec::new(),
            };
            let mut is_removed = vec![false; n];
            removed.iter().for_each(|&i| is_removed[i] = true);
            let kept: Vec<usize> = (0..n).filter(|&i| !is_removed[i]).collect();
            let mut local = vec![None; n];
            for (l, &g) in kept.iter().enumerate() {
                local[g] = Some(l);
            }
            (kept, local)
        };
        let (k0, l0) = build(0);
        let (k1, l1) = build(1);
        let (k2, l2) = build(2);
        Self {
            kept: [k0, k1, k2],
            local: [l0, l1, l2],
        }
    }

    /// Number of retained DOFs of degree `k`.
    pub fn len(&self, k: usize) -> usize {
        self.kept[k].len()
    }

    pub fn is_empty(&self, k: usize) -> bool {
        self.kept[k].is_empty()
    }

    /// Simplex indices of the retained DOFs of degree `k`, ascending.
    pub fn kept(&self, k: usize) -> &[usize] {
        &self.kept[k]
    }

    pub fn local(&self, k: usize, simplex: usize) -> Option<usize> {
        self.local[k][simplex]
    }

    /// Restricts a full coefficient vector to the retained DOFs.
    pub fn restrict(&self, k: usize, full: &nalgebra::DVector<f64>) -> nalgebra::DVector<f64> {
        nalgebra::DVector::from_iterator(self.len(k), self.kept[k].iter().map(|&g| full[g]))
    }

    /// Extends retained DOFs by zero to a full coefficient vector.
    pub fn extend(&self, k: usize, values: &nalgebra::DVector<f64>) -> nalgebra::DVector<f64> {
        let mut full = nalgebra::DVector::zeros(self.local[k].len());
        for (&g, &v) in self.kept[k].iter().zip(values.iter()) {
            full[g] = v;
        }
        full
    }
}
