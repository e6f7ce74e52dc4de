use nalgebra::{DMatrix, DVector};

use super::{Cochain, ComplexError, GradedComplex};
use crate::linalg::{nullspace, sparse_nullspace, LinalgError, SparseMatrix};
use crate::mesh::DomainTag;
use crate::whitney::BoundaryCondition;

/// Above this many DOFs in one degree the nullspace is found iteratively
/// instead of by a dense SVD.
pub const DENSE_NULLSPACE_LIMIT: usize = 300;

/// Harmonic dimensions of a built-in domain: Betti numbers for the natural
/// complex and their Poincaré–Lefschetz duals for the essential one.
pub fn expected_harmonic_dims(tag: DomainTag, bc: BoundaryCondition) -> Option<[usize; 3]> {
    let betti = match tag {
        DomainTag::Square | DomainTag::Disk => [1, 0, 0],
        DomainTag::Annulus => [1, 1, 0],
        DomainTag::External => return None,
    };
    Some(match bc {
        BoundaryCondition::Natural => betti,
        BoundaryCondition::Essential => [betti[2], betti[1], betti[0]],
    })
}

/// An M-orthonormal basis of `ker D ∩ ker D*`, grouped by degree.
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    dims: [usize; 3],
    complex_dims: [usize; 3],
    /// Columns are harmonic cochains, degree 0 first.
    matrix: DMatrix<f64>,
}

fn m_orthonormalize(q: Vec<DVector<f64>>, m: &SparseMatrix) -> Result<Vec<DVector<f64>>, LinalgError> {
    if q.is_empty() {
        return Ok(q);
    }
    let q = DMatrix::from_columns(&q);
    let gram = q.transpose() * m.mul_dense(&q);
    let gram = 0.5 * (&gram + gram.transpose());
    let chol = gram.cholesky().ok_or(LinalgError::NotPositiveDefinite)?;
    // Q L⁻ᵀ, computed as (L⁻¹ Qᵀ)ᵀ
    let lt_inv_qt = chol.l().solve_lower_triangular(&q.transpose()).ok_or(LinalgError::NotPositiveDefinite)?;
    let basis = lt_inv_qt.transpose();
    Ok(basis.column_iter().map(|c| c.into_owned()).collect())
}

fn stacked_operator(complex: &GradedComplex, k: usize) -> SparseMatrix {
    let n = complex.dims()[k];
    let normalize = |a: SparseMatrix| {
        let s = a.max_abs();
        if s > 0.0 {
            a.scaled(1.0 / s)
        } else {
            a
        }
    };
    let mut rows = Vec::new();
    if k < 2 {
        rows.push(normalize(complex.d_block(k).clone()));
    }
    if k > 0 {
        rows.push(normalize(complex.d_block(k - 1).transpose().matmul(complex.m_block(k))));
    }
    let sizes: Vec<usize> = rows.iter().map(SparseMatrix::nrows).collect();
    let blocks: Vec<(usize, usize, &SparseMatrix)> = rows.iter().enumerate().map(|(i, r)| (i, 0, r)).collect();
    SparseMatrix::block(&sizes, &[n], &blocks)
}

impl HarmonicBasis {
    /// Computes the harmonic space degree by degree as the nullspace of
    /// `[D_k ; D_{k−1}ᵀ M_k]`, then verifies its dimensions against the
    /// topology of built-in domains.
    pub fn compute(complex: &GradedComplex, tol_rel: f64) -> Result<Self, ComplexError> {
        let cd = complex.dims();
        let mut columns = Vec::new();
        let mut dims = [0; 3];
        for k in 0..3 {
            if cd[k] == 0 {
                continue;
            }
            let a = stacked_operator(complex, k);
            let null = if cd[k] <= DENSE_NULLSPACE_LIMIT {
                nullspace(&a.to_dense(), tol_rel)
            } else {
                sparse_nullspace(&a, tol_rel)?
            };
            let basis = m_orthonormalize(null, complex.m_block(k))?;
            dims[k] = basis.len();
            let offset = complex.offset(k);
            for v in basis {
                let mut full = DVector::zeros(complex.total_dim());
                full.rows_mut(offset, cd[k]).copy_from(&v);
                columns.push(full);
            }
        }
        if let Some(expected) = expected_harmonic_dims(complex.mesh().tag(), complex.bc()) {
            for degree in 0..3 {
                if dims[degree] != expected[degree] {
                    return Err(ComplexError::HarmonicDimension {
                        degree,
                        expected: expected[degree],
                        found: dims[degree],
                    });
                }
            }
        }
        let matrix = if columns.is_empty() {
            DMatrix::zeros(complex.total_dim(), 0)
        } else {
            DMatrix::from_columns(&columns)
        };
        Ok(Self {
            dims,
            complex_dims: cd,
            matrix,
        })
    }

    /// Harmonic dimensions `(h₀, h₁, h₂)`.
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn total(&self) -> usize {
        self.matrix.ncols()
    }

    /// The basis matrix `H`, one harmonic cochain per column.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn vector(&self, i: usize) -> Cochain {
        Cochain::new(self.complex_dims, self.matrix.column(i).into_owned())
    }

    /// Basis vectors of degree `k`.
    pub fn vectors(&self, k: usize) -> Vec<Cochain> {
        let start: usize = self.dims[..k].iter().sum();
        (start..start + self.dims[k]).map(|i| self.vector(i)).collect()
    }

    /// Coefficients `Hᵀ M x` of the M-orthogonal projection onto the span.
    pub fn coefficients(&self, complex: &GradedComplex, x: &Cochain) -> DVector<f64> {
        self.matrix.tr_mul(&complex.apply_m(x))
    }

    /// The cochain `H p`.
    pub fn cochain(&self, p: &DVector<f64>) -> Cochain {
        Cochain::new(self.complex_dims, &self.matrix * p)
    }

    /// M-orthogonal projection onto the harmonic space.
    pub fn project(&self, complex: &GradedComplex, x: &Cochain) -> Cochain {
        self.cochain(&self.coefficients(complex, x))
    }
}

impl GradedComplex {
    /// See [`HarmonicBasis::compute`].
    pub fn harmonic_basis(&self, tol_rel: f64) -> Result<HarmonicBasis, ComplexError> {
        HarmonicBasis::compute(self, tol_rel)
    }
}
