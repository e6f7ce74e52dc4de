use nalgebra::DVector;

use super::{AnalyticForm, BoundaryCondition, DofMap, EdgeRule, QuadratureRule, WhitneyError};
use crate::linalg::SparseMatrix;
use crate::mesh::{SimplicialMesh, MIN_TRIANGLE_AREA};

/// Local edges of a triangle as pairs of local vertices, in the order of
/// [`SimplicialMesh::triangle_edges`].
const LOCAL_EDGES: [[usize; 2]; 3] = [[1, 2], [0, 2], [0, 1]];

/// Affine data of one triangle.
#[derive(Debug, Clone, Copy)]
pub struct LocalGeometry {
    pub points: [[f64; 2]; 3],
    /// Gradients of the barycentric coordinates.
    pub grads: [[f64; 2]; 3],
    pub area: f64,
    /// `+1` if the vertices in increasing index order run counterclockwise.
    pub sign: f64,
    pub vertices: [usize; 3],
    pub edges: [usize; 3],
}

impl LocalGeometry {
    pub fn new(mesh: &SimplicialMesh, t: usize) -> Result<Self, WhitneyError> {
        let vertices = mesh.triangles()[t];
        let points = vertices.map(|v| mesh.vertices()[v]);
        let det = mesh.orientation_det(t);
        let area = 0.5 * det.abs();
        if area.is_nan() || area < MIN_TRIANGLE_AREA {
            return Err(WhitneyError::DegenerateTriangle { index: t, area });
        }
        let (e1, e2) = (
            [points[1][0] - points[0][0], points[1][1] - points[0][1]],
            [points[2][0] - points[0][0], points[2][1] - points[0][1]],
        );
        // rows of the inverse Jacobian
        let g1 = [e2[1] / det, -e2[0] / det];
        let g2 = [-e1[1] / det, e1[0] / det];
        let g0 = [-g1[0] - g2[0], -g1[1] - g2[1]];
        Ok(Self {
            points,
            grads: [g0, g1, g2],
            area,
            sign: det.signum(),
            vertices,
            edges: mesh.triangle_edges(t),
        })
    }

    pub fn point(&self, bary: &[f64; 3]) -> [f64; 2] {
        let p = &self.points;
        [
            bary[0] * p[0][0] + bary[1] * p[1][0] + bary[2] * p[2][0],
            bary[0] * p[0][1] + bary[1] * p[1][1] + bary[2] * p[2][1],
        ]
    }

    /// Value of the Whitney 1-form of local edge `e` at barycentric `bary`.
    pub fn whitney_one(&self, e: usize, bary: &[f64; 3]) -> [f64; 2] {
        let [a, b] = LOCAL_EDGES[e];
        let (ga, gb) = (self.grads[a], self.grads[b]);
        [bary[a] * gb[0] - bary[b] * ga[0], bary[a] * gb[1] - bary[b] * ga[1]]
    }

    /// Density of the 2-form basis function.
    pub fn two_density(&self) -> f64 {
        self.sign / self.area
    }
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn check_degree(k: usize) -> Result<(), WhitneyError> {
    if k > 2 {
        Err(WhitneyError::InvalidDegree(k))
    } else {
        Ok(())
    }
}

/// L² Gram matrix of the degree-`k` basis over all simplices.
pub fn assemble_mass_full(mesh: &SimplicialMesh, k: usize) -> Result<SparseMatrix, WhitneyError> {
    check_degree(k)?;
    let n = mesh.count(k);
    let mut triplets = Vec::with_capacity(9 * mesh.count(2));
    for t in 0..mesh.count(2) {
        let g = LocalGeometry::new(mesh, t)?;
        let integral = |a: usize, b: usize| g.area * if a == b { 2.0 } else { 1.0 } / 12.0;
        match k {
            0 => {
                for a in 0..3 {
                    for b in 0..3 {
                        triplets.push((g.vertices[a], g.vertices[b], integral(a, b)));
                    }
                }
            }
            1 => {
                for (e, &[i, j]) in LOCAL_EDGES.iter().enumerate() {
                    for (f, &[p, q]) in LOCAL_EDGES.iter().enumerate() {
                        let gr = &g.grads;
                        let value = integral(i, p) * dot(gr[j], gr[q]) - integral(i, q) * dot(gr[j], gr[p])
                            - integral(j, p) * dot(gr[i], gr[q])
                            + integral(j, q) * dot(gr[i], gr[p]);
                        triplets.push((g.edges[e], g.edges[f], value));
                    }
                }
            }
            _ => triplets.push((t, t, 1.0 / g.area)),
        }
    }
    Ok(SparseMatrix::from_triplets(n, n, triplets).expect("indices come from the mesh tables"))
}

/// Mass matrix of degree `k` restricted to the DOFs retained by `bc`.
pub fn assemble_mass(mesh: &SimplicialMesh, k: usize, bc: BoundaryCondition) -> Result<SparseMatrix, WhitneyError> {
    let full = assemble_mass_full(mesh, k)?;
    let dofs = DofMap::new(mesh, bc);
    Ok(full.select(dofs.kept(k), dofs.kept(k)))
}

/// Degrees of freedom of a smooth form on every simplex of its degree.
pub fn de_rham_map_full(mesh: &SimplicialMesh, form: &AnalyticForm) -> Result<DVector<f64>, WhitneyError> {
    let verts = mesh.vertices();
    match form.degree() {
        0 => Ok(DVector::from_iterator(verts.len(), verts.iter().map(|&[x, y]| form.scalar(x, y)))),
        1 => {
            let rule = EdgeRule::gauss3();
            Ok(DVector::from_iterator(
                mesh.count(1),
                mesh.edges().iter().map(|&[a, b]| {
                    let (pa, pb) = (verts[a], verts[b]);
                    let tangent = [pb[0] - pa[0], pb[1] - pa[1]];
                    rule.points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(&s, &w)| w * dot(form.eval(pa[0] + s * tangent[0], pa[1] + s * tangent[1]), tangent))
                        .sum()
                }),
            ))
        }
        2 => {
            let rule = QuadratureRule::degree4();
            let mut out = DVector::zeros(mesh.count(2));
            for t in 0..mesh.count(2) {
                let g = LocalGeometry::new(mesh, t)?;
                let integral: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(b, &w)| {
                        let [x, y] = g.point(b);
                        w * form.scalar(x, y)
                    })
                    .sum();
                out[t] = g.sign * g.area * integral;
            }
            Ok(out)
        }
        k => Err(WhitneyError::InvalidDegree(k)),
    }
}

/// de Rham map restricted to the DOFs retained by `bc`.
pub fn de_rham_map(mesh: &SimplicialMesh, form: &AnalyticForm, bc: BoundaryCondition) -> Result<DVector<f64>, WhitneyError> {
    let full = de_rham_map_full(mesh, form)?;
    Ok(DofMap::new(mesh, bc).restrict(form.degree(), &full))
}

/// `⟨f, φᵢ⟩` for every basis function of degree `f.degree()`.
pub fn load_vector_full(mesh: &SimplicialMesh, f: &AnalyticForm, rule: &QuadratureRule) -> Result<DVector<f64>, WhitneyError> {
    let k = f.degree();
    check_degree(k)?;
    let mut out = DVector::zeros(mesh.count(k));
    for t in 0..mesh.count(2) {
        let g = LocalGeometry::new(mesh, t)?;
        for (bary, &w) in rule.points.iter().zip(&rule.weights) {
            let [x, y] = g.point(bary);
            let value = f.eval(x, y);
            let scale = w * g.area;
            match k {
                0 => {
                    for a in 0..3 {
                        out[g.vertices[a]] += scale * value[0] * bary[a];
                    }
                }
                1 => {
                    for e in 0..3 {
                        out[g.edges[e]] += scale * dot(value, g.whitney_one(e, bary));
                    }
                }
                _ => out[t] += scale * value[0] * g.two_density(),
            }
        }
    }
    Ok(out)
}

/// Load vector with an explicit quadrature rule, restricted by `bc`.
pub fn load_vector_with(
    mesh: &SimplicialMesh,
    k: usize,
    f: &AnalyticForm,
    bc: BoundaryCondition,
    rule: &QuadratureRule,
) -> Result<DVector<f64>, WhitneyError> {
    if f.degree() != k {
        return Err(WhitneyError::DegreeMismatch {
            expected: k,
            actual: f.degree(),
        });
    }
    let full = load_vector_full(mesh, f, rule)?;
    Ok(DofMap::new(mesh, bc).restrict(k, &full))
}

/// Load vector with the default degree-4 rule.
pub fn load_vector(mesh: &SimplicialMesh, k: usize, f: &AnalyticForm, bc: BoundaryCondition) -> Result<DVector<f64>, WhitneyError> {
    load_vector_with(mesh, k, f, bc, &QuadratureRule::degree4())
}

/// Value of the Whitney interpolant of `values` (one per degree-`k`
/// simplex) inside triangle `t` at barycentric point `bary`. Scalars use the
/// first slot.
pub fn evaluate_local(geometry: &LocalGeometry, k: usize, values: &DVector<f64>, t: usize, bary: &[f64; 3]) -> [f64; 2] {
    match k {
        0 => [(0..3).map(|a| bary[a] * values[geometry.vertices[a]]).sum(), 0.0],
        1 => (0..3).fold([0.0, 0.0], |acc, e| {
            let w = geometry.whitney_one(e, bary);
            let c = values[geometry.edges[e]];
            [acc[0] + c * w[0], acc[1] + c * w[1]]
        }),
        _ => [values[t] * geometry.two_density(), 0.0],
    }
}

/// Output samples of a Whitney field.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldSamples {
    /// One value per vertex.
    Vertex(Vec<f64>),
    /// One vector per triangle, taken at the barycenter.
    CellVector(Vec<[f64; 2]>),
    /// One density per triangle.
    Cell(Vec<f64>),
}

/// Samples the Whitney interpolant of a full coefficient vector of degree `k`.
pub fn sample_field(mesh: &SimplicialMesh, k: usize, values: &DVector<f64>) -> Result<FieldSamples, WhitneyError> {
    check_degree(k)?;
    if values.len() != mesh.count(k) {
        return Err(WhitneyError::LengthMismatch {
            expected: mesh.count(k),
            actual: values.len(),
        });
    }
    let center = [1.0 / 3.0; 3];
    match k {
        0 => Ok(FieldSamples::Vertex(values.iter().copied().collect())),
        1 => (0..mesh.count(2))
            .map(|t| Ok(evaluate_local(&LocalGeometry::new(mesh, t)?, 1, values, t, &center)))
            .collect::<Result<_, _>>()
            .map(FieldSamples::CellVector),
        _ => (0..mesh.count(2))
            .map(|t| Ok(evaluate_local(&LocalGeometry::new(mesh, t)?, 2, values, t, &center)[0]))
            .collect::<Result<_, _>>()
            .map(FieldSamples::Cell),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_mesh, Domain, DomainTag};
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_triangle() -> SimplicialMesh {
        SimplicialMesh::from_triangles(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], [[0, 1, 2]], DomainTag::External).unwrap()
    }

    #[test]
    fn unit_triangle_scalar_masses() {
        let m = unit_triangle();
        let m0 = assemble_mass(&m, 0, BoundaryCondition::Natural).unwrap().to_dense();
        for i in 0..3 {
            for j in 0..3 {
                // ∫ λᵢλⱼ over a triangle of area 1/2
                let exact = if i == j { 1.0 / 12.0 } else { 1.0 / 24.0 };
                assert!((m0[(i, j)] - exact).abs() < 1e-16);
            }
        }
        let m2 = assemble_mass(&m, 2, BoundaryCondition::Natural).unwrap();
        assert_eq!(m2.to_dense().as_slice(), &[2.0]);
        assert_eq!(assemble_mass(&m, 1, BoundaryCondition::Essential).unwrap().nrows(), 0);
    }

    /// Edge mass by direct quadrature of the basis functions written out from
    /// explicit barycentric coordinates.
    fn edge_mass_oracle(points: [[f64; 2]; 3]) -> DMatrix<f64> {
        let [p0, p1, p2] = points;
        let jac = nalgebra::Matrix2::new(p1[0] - p0[0], p2[0] - p0[0], p1[1] - p0[1], p2[1] - p0[1]);
        let area = 0.5 * jac.determinant().abs();
        let inv = jac.try_inverse().unwrap();
        let g1 = nalgebra::Vector2::new(inv[(0, 0)], inv[(0, 1)]);
        let g2 = nalgebra::Vector2::new(inv[(1, 0)], inv[(1, 1)]);
        let grads = [-g1 - g2, g1, g2];
        let rule = QuadratureRule::fine();
        let mut m = DMatrix::zeros(3, 3);
        for (b, w) in rule.points.iter().zip(&rule.weights) {
            let basis: Vec<_> = LOCAL_EDGES.iter().map(|&[i, j]| b[i] * grads[j] - b[j] * grads[i]).collect();
            for r in 0..3 {
                for c in 0..3 {
                    m[(r, c)] += w * area * basis[r].dot(&basis[c]);
                }
            }
        }
        m
    }

    #[test]
    fn edge_mass_matches_quadrature_oracle() {
        let pts = [[0.1, -0.2], [1.3, 0.4], [0.2, 0.9]];
        let m = SimplicialMesh::from_triangles(pts.to_vec(), [[0, 1, 2]], DomainTag::External).unwrap();
        let m1 = assemble_mass(&m, 1, BoundaryCondition::Natural).unwrap().to_dense();
        // the table order (0,1),(0,2),(1,2) is the reverse of the local order
        let oracle = edge_mass_oracle(pts);
        for r in 0..3 {
            for c in 0..3 {
                assert!((m1[(2 - r, 2 - c)] - oracle[(r, c)]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn masses_are_spd() {
        for domain in [Domain::Square, Domain::Disk, Domain::Annulus] {
            let mesh = generate_mesh(domain, 3);
            for bc in [BoundaryCondition::Natural, BoundaryCondition::Essential] {
                for k in 0..3 {
                    let m = assemble_mass(&mesh, k, bc).unwrap();
                    assert!(m.is_symmetric(1e-14));
                    let eig = m.to_dense().symmetric_eigen().eigenvalues;
                    assert!(eig.iter().all(|&l| l > 0.0), "{domain:?} {bc} k={k}");
                }
            }
        }
    }

    fn condition(m: &SparseMatrix) -> f64 {
        let eig = m.to_dense().symmetric_eigen().eigenvalues;
        eig.max() / eig.min()
    }

    #[test]
    fn mass_conditioning_is_refinement_stable() {
        for k in 0..3 {
            let c: Vec<f64> = [4, 8, 16]
                .iter()
                .map(|&n| condition(&assemble_mass(&generate_mesh(Domain::Square, n), k, BoundaryCondition::Natural).unwrap()))
                .collect();
            assert!(c[2] / c[0] < 10.0, "k={k}: {c:?}");
        }
    }

    #[test]
    fn de_rham_basics() {
        let mesh = generate_mesh(Domain::Square, 1);
        let ones = de_rham_map(&mesh, &AnalyticForm::zero_form(|_, _| 1.0), BoundaryCondition::Natural).unwrap();
        assert_eq!(ones.as_slice(), &[1.0; 4]);
        let dx = de_rham_map_full(&mesh, &AnalyticForm::one_form(|_, _| [1.0, 0.0])).unwrap();
        // edge (0,1) runs from (0,0) to (1,0)
        assert_eq!(mesh.edges()[0], [0, 1]);
        assert!((dx[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn de_rham_commutes_for_xy() {
        let mesh = generate_mesh(Domain::Square, 4);
        let f = de_rham_map_full(&mesh, &AnalyticForm::zero_form(|x, y| x * y)).unwrap();
        let df = de_rham_map_full(&mesh, &AnalyticForm::one_form(|x, y| [y, x])).unwrap();
        let d0 = mesh.coboundary(0).unwrap().matrix;
        assert!((d0.mul_vec(&f) - df).amax() < 1e-13);
    }

    #[test]
    fn load_vector_examples() {
        let m = unit_triangle();
        let zero = load_vector(&m, 1, &AnalyticForm::zero(1), BoundaryCondition::Natural).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
        let one = load_vector(&m, 0, &AnalyticForm::zero_form(|_, _| 1.0), BoundaryCondition::Natural).unwrap();
        for v in one.iter() {
            assert!((v - 1.0 / 6.0).abs() < 1e-15);
        }
        assert!(matches!(
            load_vector(&m, 0, &AnalyticForm::zero(2), BoundaryCondition::Natural),
            Err(WhitneyError::DegreeMismatch { .. })
        ));
    }

    #[test]
    fn two_form_load_on_disk() {
        let mesh = generate_mesh(Domain::Disk, 3);
        let load = load_vector(&mesh, 2, &AnalyticForm::two_form(|x, y| x * y), BoundaryCondition::Natural).unwrap();
        for t in 0..mesh.count(2) {
            // edge-midpoint rule is exact for quadratics
            let [a, b, c] = mesh.triangles()[t].map(|v| mesh.vertices()[v]);
            let mid = |p: [f64; 2], q: [f64; 2]| 0.5 * (p[0] + q[0]) * 0.5 * (p[1] + q[1]);
            let area = mesh.area(t);
            let integral = area / 3.0 * (mid(a, b) + mid(b, c) + mid(a, c));
            let sign = mesh.orientation_det(t).signum();
            assert!((load[t] - sign * integral / area).abs() < 1e-15);
        }
    }

    #[test]
    fn sampling() {
        let mesh = generate_mesh(Domain::Disk, 3);
        let zero = DVector::zeros(mesh.count(1));
        match sample_field(&mesh, 1, &zero).unwrap() {
            FieldSamples::CellVector(v) => assert!(v.iter().all(|s| *s == [0.0, 0.0])),
            other => panic!("{other:?}"),
        }
        let dx = de_rham_map_full(&mesh, &AnalyticForm::one_form(|_, _| [1.0, 0.0])).unwrap();
        match sample_field(&mesh, 1, &dx).unwrap() {
            FieldSamples::CellVector(v) => {
                for s in v {
                    assert!((s[0] - 1.0).abs() < 1e-12 && s[1].abs() < 1e-12);
                }
            }
            other => panic!("{other:?}"),
        }
        let vals = DVector::from_fn(mesh.count(0), |i, _| i as f64);
        assert_eq!(sample_field(&mesh, 0, &vals).unwrap(), FieldSamples::Vertex(vals.iter().copied().collect()));
        let g = de_rham_map_full(&mesh, &AnalyticForm::two_form(|_, _| 3.0)).unwrap();
        match sample_field(&mesh, 2, &g).unwrap() {
            FieldSamples::Cell(v) => assert!(v.iter().all(|s| (s - 3.0).abs() < 1e-13)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(sample_field(&mesh, 1, &vals), Err(WhitneyError::LengthMismatch { .. })));
    }

    /// Recovers DOFs of the interpolant of `c` triangle by triangle.
    fn reproduce(mesh: &SimplicialMesh, k: usize, c: &DVector<f64>) -> Vec<(usize, f64)> {
        let rule = EdgeRule::gauss3();
        let mut out = Vec::new();
        for t in 0..mesh.count(2) {
            let g = LocalGeometry::new(mesh, t).unwrap();
            match k {
                0 => {
                    for a in 0..3 {
                        let mut b = [0.0; 3];
                        b[a] = 1.0;
                        out.push((g.vertices[a], evaluate_local(&g, 0, c, t, &b)[0]));
                    }
                }
                1 => {
                    for (e, &[i, j]) in LOCAL_EDGES.iter().enumerate() {
                        let tangent = [g.points[j][0] - g.points[i][0], g.points[j][1] - g.points[i][1]];
                        let integral: f64 = rule
                            .points
                            .iter()
                            .zip(&rule.weights)
                            .map(|(&s, &w)| {
                                let mut b = [0.0; 3];
                                b[i] = 1.0 - s;
                                b[j] = s;
                                w * dot(evaluate_local(&g, 1, c, t, &b), tangent)
                            })
                            .sum();
                        out.push((g.edges[e], integral));
                    }
                }
                _ => out.push((t, evaluate_local(&g, 2, c, t, &[1.0 / 3.0; 3])[0] * g.sign * g.area)),
            }
        }
        out
    }

    #[test]
    fn interpolant_reproduces_cochains() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for domain in [Domain::Square, Domain::Disk] {
            let mesh = generate_mesh(domain, 3);
            for k in 0..3 {
                let c = DVector::from_fn(mesh.count(k), |_, _| rng.random_range(-1.0..1.0));
                for (i, v) in reproduce(&mesh, k, &c) {
                    assert!((v - c[i]).abs() < 1e-12, "k={k} dof {i}");
                }
            }
        }
    }

    fn cubic(c: &[f64]) -> impl Fn(f64, f64) -> f64 + Clone {
        let c = c.to_vec();
        move |x, y| {
            c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y
                + c[6] * x * x * x + c[7] * x * x * y + c[8] * x * y * y + c[9] * y * y * y
        }
    }

    fn cubic_grad(c: &[f64]) -> impl Fn(f64, f64) -> [f64; 2] + Clone {
        let c = c.to_vec();
        move |x, y| {
            [
                c[1] + 2.0 * c[3] * x + c[4] * y + 3.0 * c[6] * x * x + 2.0 * c[7] * x * y + c[8] * y * y,
                c[2] + c[4] * x + 2.0 * c[5] * y + c[7] * x * x + 2.0 * c[8] * x * y + 3.0 * c[9] * y * y,
            ]
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn commutation_for_cubic_forms(
            a in prop::collection::vec(-2.0f64..2.0, 10),
            b in prop::collection::vec(-2.0f64..2.0, 10),
        ) {
            let mesh = generate_mesh(Domain::Square, 5);
            let d0 = mesh.coboundary(0).unwrap().matrix;
            let d1 = mesh.coboundary(1).unwrap().matrix;

            let f = de_rham_map_full(&mesh, &AnalyticForm::zero_form(cubic(&a))).unwrap();
            let df = de_rham_map_full(&mesh, &AnalyticForm::one_form(cubic_grad(&a))).unwrap();
            prop_assert!((d0.mul_vec(&f) - df).amax() < 1e-12);

            // u = (p, q) with p, q cubic; du = (∂ₓq − ∂ᵧp) dx∧dy
            let (p, q) = (cubic(&a), cubic(&b));
            let (gp, gq) = (cubic_grad(&a), cubic_grad(&b));
            let u = de_rham_map_full(&mesh, &AnalyticForm::one_form(move |x, y| [p(x, y), q(x, y)])).unwrap();
            let du = de_rham_map_full(&mesh, &AnalyticForm::two_form(move |x, y| gq(x, y)[0] - gp(x, y)[1])).unwrap();
            prop_assert!((d1.mul_vec(&u) - du).amax() < 1e-12);
        }
    }
}
