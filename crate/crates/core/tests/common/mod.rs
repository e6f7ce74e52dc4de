//! Test-side oracles shared by the integration targets.
#![allow(dead_code)]

use hodgedirac::complex::{Cochain, GradedComplex, HarmonicBasis};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_cochain(c: &GradedComplex, rng: &mut ChaCha8Rng) -> Cochain {
    c.cochain(DVector::from_fn(c.total_dim(), |_, _| rng.random_range(-1.0..1.0)))
}

/// Dense blocks `(D, M, H)` of a complex.
pub fn dense_blocks(c: &GradedComplex, h: &HarmonicBasis) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    (c.d().to_dense(), c.m().to_dense(), h.matrix().clone())
}

/// Dense Dirac saddle matrix `[MD + DᵀM, MH; HᵀM, 0]`.
pub fn dense_dirac(c: &GradedComplex, h: &HarmonicBasis) -> DMatrix<f64> {
    let (d, m, hm) = dense_blocks(c, h);
    let n = d.nrows();
    let k = hm.ncols();
    let mut g = DMatrix::zeros(n + k, n + k);
    g.view_mut((0, 0), (n, n)).copy_from(&(&m * &d + d.transpose() * &m));
    let mh = &m * &hm;
    g.view_mut((0, n), (n, k)).copy_from(&mh);
    g.view_mut((n, 0), (k, n)).copy_from(&mh.transpose());
    g
}

/// Dense three-field Laplace matrix acting on `[σ; u; p]`.
pub fn dense_laplace(c: &GradedComplex, h: &HarmonicBasis) -> DMatrix<f64> {
    let (d, m, hm) = dense_blocks(c, h);
    let n = d.nrows();
    let k = hm.ncols();
    let mut a = DMatrix::zeros(2 * n + k, 2 * n + k);
    let md = &m * &d;
    a.view_mut((0, 0), (n, n)).copy_from(&(-&m));
    a.view_mut((0, n), (n, n)).copy_from(&md.transpose());
    a.view_mut((n, 0), (n, n)).copy_from(&md);
    a.view_mut((n, n), (n, n)).copy_from(&(d.transpose() * &m * &d));
    let mh = &m * &hm;
    a.view_mut((n, 2 * n), (n, k)).copy_from(&mh);
    a.view_mut((2 * n, n), (k, n)).copy_from(&mh.transpose());
    a
}

/// Dense LU solve of the Dirac system for the dual vector `b`.
pub fn dense_dirac_solve(c: &GradedComplex, h: &HarmonicBasis, b: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let n = c.total_dim();
    let mut rhs = DVector::zeros(n + h.total());
    rhs.rows_mut(0, n).copy_from(b);
    let x = dense_dirac(c, h).lu().solve(&rhs).expect("saddle matrix is nonsingular");
    (x.rows(0, n).into_owned(), x.rows(n, h.total()).into_owned())
}

/// Dense LU solve of the Laplace system, returning `(σ, u, p)`.
pub fn dense_laplace_solve(
    c: &GradedComplex,
    h: &HarmonicBasis,
    b: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
    let n = c.total_dim();
    let mut rhs = DVector::zeros(2 * n + h.total());
    rhs.rows_mut(n, n).copy_from(b);
    let x = dense_laplace(c, h).lu().solve(&rhs).expect("Laplace matrix is nonsingular");
    (
        x.rows(0, n).into_owned(),
        x.rows(n, n).into_owned(),
        x.rows(2 * n, h.total()).into_owned(),
    )
}

/// Per-equation relative residual of `(u, p)` for the dual vector `b`,
/// recomputed from the dense blocks.
pub fn dirac_residual(c: &GradedComplex, h: &HarmonicBasis, u: &DVector<f64>, p: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let (d, m, hm) = dense_blocks(c, h);
    let r1 = (&m * &d + d.transpose() * &m) * u + &m * &hm * p - b;
    let r2 = hm.transpose() * &m * u;
    let scale = b.norm().max(f64::MIN_POSITIVE);
    (r1.norm() / scale).max(r2.norm() / scale)
}

/// Largest entry difference relative to the largest oracle entry.
pub fn rel_diff(a: &DVector<f64>, oracle: &DVector<f64>) -> f64 {
    let scale = oracle.amax();
    let diff = (a - oracle).amax();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Summary of a parsed legacy VTK file.
#[derive(Debug, Clone, PartialEq)]
pub struct VtkSummary {
    pub points: usize,
    pub cells: usize,
    /// `(section, kind, name)` for every data array.
    pub arrays: Vec<(String, String, String)>,
}

fn take<'a>(lines: &mut impl Iterator<Item = &'a str>, what: &str) -> Result<&'a str, String> {
    lines.next().ok_or_else(|| format!("unexpected end of file, expected {what}"))
}

fn finite_floats(line: &str, count: usize) -> Result<(), String> {
    let values: Vec<&str> = line.split_whitespace().collect();
    if values.len() != count {
        return Err(format!("expected {count} values in '{line}'"));
    }
    for v in values {
        let x: f64 = v.parse().map_err(|_| format!("bad float '{v}'"))?;
        if !x.is_finite() {
            return Err(format!("non-finite value '{v}'"));
        }
    }
    Ok(())
}

/// Strict reader for the subset of legacy ASCII VTK 2.0 used here:
/// an unstructured grid of triangles with scalar and vector arrays.
pub fn parse_vtk(text: &str) -> Result<VtkSummary, String> {
    let mut lines = text.lines();
    if take(&mut lines, "version line")? != "# vtk DataFile Version 2.0" {
        return Err("bad version line".into());
    }
    take(&mut lines, "title")?;
    if take(&mut lines, "ASCII")? != "ASCII" {
        return Err("not ASCII".into());
    }
    if take(&mut lines, "dataset")? != "DATASET UNSTRUCTURED_GRID" {
        return Err("not an unstructured grid".into());
    }
    let header = take(&mut lines, "POINTS")?;
    let f: Vec<&str> = header.split_whitespace().collect();
    if f.len() != 3 || f[0] != "POINTS" || f[2] != "double" {
        return Err(format!("bad POINTS header '{header}'"));
    }
    let points: usize = f[1].parse().map_err(|_| "bad point count")?;
    for _ in 0..points {
        finite_floats(take(&mut lines, "point")?, 3)?;
    }
    let header = take(&mut lines, "CELLS")?;
    let f: Vec<&str> = header.split_whitespace().collect();
    if f.len() != 3 || f[0] != "CELLS" {
        return Err(format!("bad CELLS header '{header}'"));
    }
    let cells: usize = f[1].parse().map_err(|_| "bad cell count")?;
    if f[2].parse::<usize>().ok() != Some(4 * cells) {
        return Err("CELLS size is not 4 per triangle".into());
    }
    for _ in 0..cells {
        let ids: Vec<usize> = take(&mut lines, "cell")?
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| format!("bad index '{s}'")))
            .collect::<Result<_, _>>()?;
        if ids.len() != 4 || ids[0] != 3 || ids[1..].iter().any(|&i| i >= points) {
            return Err(format!("bad cell {ids:?}"));
        }
    }
    if take(&mut lines, "CELL_TYPES")? != format!("CELL_TYPES {cells}") {
        return Err("bad CELL_TYPES header".into());
    }
    for _ in 0..cells {
        if take(&mut lines, "cell type")? != "5" {
            return Err("cell type is not 5".into());
        }
    }
    let mut arrays = Vec::new();
    let mut section = String::new();
    let mut count = 0;
    while let Some(line) = lines.next() {
        let f: Vec<&str> = line.split_whitespace().collect();
        match f.as_slice() {
            ["POINT_DATA", n] => {
                section = "POINT_DATA".into();
                count = n.parse().map_err(|_| "bad POINT_DATA count")?;
                if count != points {
                    return Err("POINT_DATA count mismatch".into());
                }
            }
            ["CELL_DATA", n] => {
                section = "CELL_DATA".into();
                count = n.parse().map_err(|_| "bad CELL_DATA count")?;
                if count != cells {
                    return Err("CELL_DATA count mismatch".into());
                }
            }
            ["SCALARS", name, "double", "1"] if !section.is_empty() => {
                if take(&mut lines, "lookup table")? != "LOOKUP_TABLE default" {
                    return Err("missing LOOKUP_TABLE".into());
                }
                for _ in 0..count {
                    finite_floats(take(&mut lines, "scalar")?, 1)?;
                }
                arrays.push((section.clone(), "SCALARS".into(), name.to_string()));
            }
            ["VECTORS", name, "double"] if !section.is_empty() => {
                for _ in 0..count {
                    finite_floats(take(&mut lines, "vector")?, 3)?;
                }
                arrays.push((section.clone(), "VECTORS".into(), name.to_string()));
            }
            _ => return Err(format!("unexpected line '{line}'")),
        }
    }
    Ok(VtkSummary { points, cells, arrays })
}
