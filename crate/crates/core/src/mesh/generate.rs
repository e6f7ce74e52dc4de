use std::f64::consts::PI;

use super::{Domain, SimplicialMesh};

/// Triangulates the strip between two closed rings of vertex indices whose
/// points are equally spaced in angle starting at angle zero.
fn stitch_rings(inner: &[usize], outer: &[usize], triangles: &mut Vec<[usize; 3]>) {
    let (na, nb) = (inner.len(), outer.len());
    let (mut i, mut j) = (0, 0);
    while i < na || j < nb {
        // advance on the ring whose next point comes first in angle
        let advance_inner = j == nb || (i < na && (i + 1) * nb <= (j + 1) * na);
        if advance_inner {
            triangles.push([inner[i], inner[(i + 1) % na], outer[j % nb]]);
            i += 1;
        } else {
            triangles.push([inner[i % na], outer[j], outer[(j + 1) % nb]]);
            j += 1;
        }
    }
}

fn push_ring(vertices: &mut Vec<[f64; 2]>, radius: f64, count: usize) -> Vec<usize> {
    let start = vertices.len();
    vertices.extend((0..count).map(|m| {
        let theta = 2.0 * PI * m as f64 / count as f64;
        [radius * theta.cos(), radius * theta.sin()]
    }));
    (start..start + count).collect()
}

fn square(n: usize) -> (Vec<[f64; 2]>, Vec<[usize; 3]>) {
    let vertices = (0..=n)
        .flat_map(|j| (0..=n).map(move |i| [i as f64 / n as f64, j as f64 / n as f64]))
        .collect();
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            triangles.push([idx(i, j), idx(i, j + 1), idx(i + 1, j + 1)]);
        }
    }
    (vertices, triangles)
}

fn disk(r: usize) -> (Vec<[f64; 2]>, Vec<[usize; 3]>) {
    let mut vertices = vec![[0.0, 0.0]];
    let mut triangles = Vec::with_capacity(6 * r * r);
    let mut previous = push_ring(&mut vertices, 1.0 / r as f64, 6);
    for m in 0..6 {
        triangles.push([0, previous[m], previous[(m + 1) % 6]]);
    }
    for k in 2..=r {
        let ring = push_ring(&mut vertices, k as f64 / r as f64, 6 * k);
        stitch_rings(&previous, &ring, &mut triangles);
        previous = ring;
    }
    (vertices, triangles)
}

fn annulus(r: usize) -> (Vec<[f64; 2]>, Vec<[usize; 3]>) {
    let mut vertices = Vec::new();
    let mut triangles = Vec::with_capacity(16 * r * r);
    let mut previous = push_ring(&mut vertices, 0.5, 8 * r);
    for k in 1..=r {
        let ring = push_ring(&mut vertices, 0.5 + 0.5 * k as f64 / r as f64, 8 * r);
        stitch_rings(&previous, &ring, &mut triangles);
        previous = ring;
    }
    (vertices, triangles)
}

/// Generates the built-in triangulation of `domain`.
///
/// * `Square`: `n × n` cells of `[0,1]²`, each split along its rising diagonal.
/// * `Disk`: a center vertex and `n` rings, ring `k` holding `6k` vertices at
///   radius `k/n`; the outer ring lies on the unit circle.
/// * `Annulus`: `n + 1` rings of `8n` vertices between radii 0.5 and 1.
///
/// # Panics
///
/// Panics if `resolution` is zero.
pub fn generate_mesh(domain: Domain, resolution: usize) -> SimplicialMesh {
    assert!(resolution >= 1, "resolution must be at least 1");
    let (vertices, triangles) = match domain {
        Domain::Square => square(resolution),
        Domain::Disk => disk(resolution),
        Domain::Annulus => annulus(resolution),
    };
    SimplicialMesh::from_triangles(vertices, triangles, domain.into())
        .expect("built-in generators produce valid meshes")
}
