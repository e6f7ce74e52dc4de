//! Oriented triangulations of planar domains and their incidence matrices.
//!
//! Every simplex is stored as a strictly increasing vertex tuple, which fixes
//! its orientation; the simplex tables are sorted lexicographically and the
//! table position is the cochain DOF index.

mod generate;
mod io;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::linalg::SparseMatrix;

pub use generate::generate_mesh;

/// Domains with a built-in generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    /// The unit square `[0,1]²`.
    Square,
    /// The unit disk, triangulated by concentric rings.
    Disk,
    /// The annulus with radii 0.5 and 1.
    Annulus,
}

/// Provenance of a mesh: a built-in domain or an externally supplied file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainTag {
    Square,
    Disk,
    Annulus,
    External,
}

impl From<Domain> for DomainTag {
    fn from(d: Domain) -> Self {
        match d {
            Domain::Square => DomainTag::Square,
            Domain::Disk => DomainTag::Disk,
            Domain::Annulus => DomainTag::Annulus,
        }
    }
}

impl DomainTag {
    pub fn domain(self) -> Option<Domain> {
        match self {
            DomainTag::Square => Some(Domain::Square),
            DomainTag::Disk => Some(Domain::Disk),
            DomainTag::Annulus => Some(Domain::Annulus),
            DomainTag::External => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("vertex index {index} out of range ({count} vertices)")]
    VertexOutOfRange { index: usize, count: usize },
    #[error("vertex {index} has a non-finite coordinate")]
    NonFiniteVertex { index: usize },
    #[error("{kind} {index} is not strictly increasing")]
    NotIncreasing { kind: &'static str, index: usize },
    #[error("{kind} table is not sorted or contains duplicates at position {index}")]
    UnsortedTable { kind: &'static str, index: usize },
    #[error("edge ({0}, {1}) of a triangle is missing from the edge table")]
    MissingEdge(usize, usize),
    #[error("edge {index} does not belong to any triangle")]
    DanglingEdge { index: usize },
    #[error("vertex {index} does not belong to any triangle")]
    IsolatedVertex { index: usize },
    #[error("edge {index} bounds {count} triangles")]
    NonManifold { index: usize, count: usize },
    #[error("triangle {index} is degenerate (area {area:e})")]
    DegenerateTriangle { index: usize, area: f64 },
    #[error("mesh has no triangles")]
    Empty,
    #[error("invalid degree {0}")]
    InvalidDegree(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Triangles with area below this are rejected.
pub const MIN_TRIANGLE_AREA: f64 = 1e-14;

/// An oriented two-dimensional simplicial complex.
#[derive(Debug, Clone)]
pub struct SimplicialMesh {
    vertices: Vec<[f64; 2]>,
    edges: Vec<[usize; 2]>,
    triangles: Vec<[usize; 3]>,
    tag: DomainTag,
    /// Edge indices of each triangle `(i,j,k)`, ordered `(j,k), (i,k), (i,j)`.
    triangle_edges: Vec<[usize; 3]>,
}

fn check_sorted<const N: usize>(kind: &'static str, table: &[[usize; N]]) -> Result<(), MeshError> {
    for (index, s) in table.iter().enumerate() {
        if s.windows(2).any(|w| w[0] >= w[1]) {
            return Err(MeshError::NotIncreasing { kind, index });
        }
    }
    for (index, w) in table.windows(2).enumerate() {
        if w[0] >= w[1] {
            return Err(MeshError::UnsortedTable { kind, index: index + 1 });
        }
    }
    Ok(())
}

impl SimplicialMesh {
    /// Builds a mesh from vertex coordinates and triangles given in any
    /// vertex order; the edge table is derived.
    pub fn from_triangles(
        vertices: Vec<[f64; 2]>,
        triangles: impl IntoIterator<Item = [usize; 3]>,
        tag: DomainTag,
    ) -> Result<Self, MeshError> {
        let mut tris: Vec<[usize; 3]> = triangles
            .into_iter()
            .map(|mut t| {
                t.sort_unstable();
                t
            })
            .collect();
        tris.sort_unstable();
        let mut edges = BTreeSet::new();
        for t in &tris {
            edges.insert([t[0], t[1]]);
            edges.insert([t[0], t[2]]);
            edges.insert([t[1], t[2]]);
        }
        Self::from_tables(vertices, edges.into_iter().collect(), tris, tag)
    }

    /// Builds a mesh from complete simplex tables and validates it.
    pub fn from_tables(
        vertices: Vec<[f64; 2]>,
        edges: Vec<[usize; 2]>,
        triangles: Vec<[usize; 3]>,
        tag: DomainTag,
    ) -> Result<Self, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::Empty);
        }
        let nv = vertices.len();
        for (index, v) in vertices.iter().enumerate() {
            if !v.iter().all(|c| c.is_finite()) {
                return Err(MeshError::NonFiniteVertex { index });
            }
        }
        for &index in edges.iter().flatten().chain(triangles.iter().flatten()) {
            if index >= nv {
                return Err(MeshError::VertexOutOfRange { index, count: nv });
            }
        }
        check_sorted("edge", &edges)?;
        check_sorted("triangle", &triangles)?;

        let lookup = |a: usize, b: usize| edges.binary_search(&[a, b]).map_err(|_| MeshError::MissingEdge(a, b));
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        let mut edge_count = vec![0usize; edges.len()];
        let mut vertex_used = vec![false; nv];
        for &[i, j, k] in &triangles {
            let te = [lookup(j, k)?, lookup(i, k)?, lookup(i, j)?];
            for &e in &te {
                edge_count[e] += 1;
            }
            for v in [i, j, k] {
                vertex_used[v] = true;
            }
            triangle_edges.push(te);
        }
        for (index, &count) in edge_count.iter().enumerate() {
            if count == 0 {
                return Err(MeshError::DanglingEdge { index });
            }
            if count > 2 {
                return Err(MeshError::NonManifold { index, count });
            }
        }
        if let Some(index) = vertex_used.iter().position(|&u| !u) {
            return Err(MeshError::IsolatedVertex { index });
        }
        let mesh = Self {
            vertices,
            edges,
            triangles,
            tag,
            triangle_edges,
        };
        for index in 0..mesh.triangles.len() {
            let area = mesh.area(index);
            if area.is_nan() || area < MIN_TRIANGLE_AREA {
                return Err(MeshError::DegenerateTriangle { index, area });
            }
        }
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn tag(&self) -> DomainTag {
        self.tag
    }

    /// Number of simplices of dimension `k`.
    pub fn count(&self, k: usize) -> usize {
        match k {
            0 => self.vertices.len(),
            1 => self.edges.len(),
            2 => self.triangles.len(),
            _ => 0,
        }
    }

    /// `V − E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    /// Edge indices of triangle `t`, ordered opposite to its vertices 0, 1, 2.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    /// Twice the signed area of triangle `t` with its vertices in increasing
    /// index order.
    pub fn orientation_det(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|v| self.vertices[v]);
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    }

    pub fn area(&self, t: usize) -> f64 {
        0.5 * self.orientation_det(t).abs()
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e].map(|v| self.vertices[v]);
        (b[0] - a[0]).hypot(b[1] - a[1])
    }

    /// Mesh parameter: the maximum edge length.
    pub fn h(&self) -> f64 {
        (0..self.edges.len()).map(|e| self.edge_length(e)).fold(0.0, f64::max)
    }

    pub fn barycenter(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t].map(|v| self.vertices[v]);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Sorted indices of boundary simplices of degree `k ∈ {0, 1}`: edges
    /// lying in exactly one triangle, and the vertices of those edges.
    pub fn boundary_simplices(&self, k: usize) -> Result<Vec<usize>, MeshError> {
        let mut count = vec![0u8; self.edges.len()];
        for te in &self.triangle_edges {
            for &e in te {
                count[e] += 1;
            }
        }
        let edges = count.iter().enumerate().filter(|(_, &c)| c == 1).map(|(e, _)| e);
        match k {
            1 => Ok(edges.collect()),
            0 => Ok(edges
                .flat_map(|e| self.edges[e])
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect()),
            _ => Err(MeshError::InvalidDegree(k)),
        }
    }

    /// The signed incidence matrix from `k`-cochains to `(k+1)`-cochains.
    pub fn coboundary(&self, k: usize) -> Result<IncidenceMatrix, MeshError> {
        let matrix = match k {
            0 => SparseMatrix::from_triplets(
                self.edges.len(),
                self.vertices.len(),
                self.edges
                    .iter()
                    .enumerate()
                    .flat_map(|(e, &[i, j])| [(e, i, -1.0), (e, j, 1.0)]),
            ),
            1 => SparseMatrix::from_triplets(
                self.triangles.len(),
                self.edges.len(),
                self.triangle_edges
                    .iter()
                    .enumerate()
                    .flat_map(|(t, &[jk, ik, ij])| [(t, jk, 1.0), (t, ik, -1.0), (t, ij, 1.0)]),
            ),
            _ => return Err(MeshError::InvalidDegree(k)),
        }
        .expect("incidence indices come from validated tables");
        Ok(IncidenceMatrix { degree: k, matrix })
    }
}

/// Free function form of [`SimplicialMesh::coboundary`].
pub fn coboundary(mesh: &SimplicialMesh, k: usize) -> Result<IncidenceMatrix, MeshError> {
    mesh.coboundary(k)
}

/// Free function form of [`SimplicialMesh::boundary_simplices`].
pub fn boundary_simplices(mesh: &SimplicialMesh, k: usize) -> Result<Vec<usize>, MeshError> {
    mesh.boundary_simplices(k)
}

/// A signed incidence matrix with entries in `{−1, 0, +1}`.
#[derive(Debug, Clone)]
pub struct IncidenceMatrix {
    pub degree: usize,
    pub matrix: SparseMatrix,
}

impl IncidenceMatrix {
    fn integer_rows(&self) -> Vec<Vec<(usize, i64)>> {
        (0..self.matrix.nrows())
            .map(|r| {
                self.matrix
                    .row(r)
                    .map(|(c, v)| {
                        assert!(v.fract() == 0.0, "incidence entries are integers");
                        (c, v as i64)
                    })
                    .collect()
            })
            .collect()
    }

    /// Nonzero entries of `next · self` computed in integer arithmetic.
    pub fn compose_exact(&self, next: &IncidenceMatrix) -> Vec<(usize, usize, i64)> {
        assert_eq!(next.matrix.ncols(), self.matrix.nrows(), "composable shapes");
        let rows = self.integer_rows();
        let mut nonzero = Vec::new();
        for (r, outer) in next.integer_rows().into_iter().enumerate() {
            let mut acc = std::collections::BTreeMap::<usize, i64>::new();
            for (mid, a) in outer {
                for &(c, b) in &rows[mid] {
                    *acc.entry(c).or_default() += a * b;
                }
            }
            nonzero.extend(acc.into_iter().filter(|&(_, v)| v != 0).map(|(c, v)| (r, c, v)));
        }
        nonzero
    }
}
