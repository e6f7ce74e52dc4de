use std::fmt::Write as _;

use crate::mesh::SimplicialMesh;
use crate::whitney::FieldSamples;

/// A named field for [`write_vtk`].
#[derive(Debug, Clone)]
pub struct VtkField {
    pub name: String,
    pub samples: FieldSamples,
}

impl VtkField {
    pub fn new(name: impl Into<String>, samples: FieldSamples) -> Self {
        Self {
            name: name.into(),
            samples,
        }
    }
}

/// Legacy ASCII VTK (version 2.0) unstructured grid of triangles. Vertex
/// fields go to `POINT_DATA`, triangle fields to `CELL_DATA`, and vectors
/// get a zero third component.
pub fn write_vtk(mesh: &SimplicialMesh, title: &str, fields: &[VtkField]) -> String {
    let mut out = String::new();
    let title: String = title.chars().filter(|c| *c != '\n').take(255).collect();
    writeln!(out, "# vtk DataFile Version 2.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID").unwrap();
    writeln!(out, "POINTS {} double", mesh.count(0)).unwrap();
    for [x, y] in mesh.vertices() {
        writeln!(out, "{x:.16e} {y:.16e} {:.16e}", 0.0).unwrap();
    }
    let nt = mesh.count(2);
    writeln!(out, "CELLS {nt} {}", 4 * nt).unwrap();
    for [a, b, c] in mesh.triangles() {
        writeln!(out, "3 {a} {b} {c}").unwrap();
    }
    writeln!(out, "CELL_TYPES {nt}").unwrap();
    for _ in 0..nt {
        out.push_str("5\n");
    }

    let point_fields: Vec<_> = fields.iter().filter(|f| matches!(f.samples, FieldSamples::Vertex(_))).collect();
    if !point_fields.is_empty() {
        writeln!(out, "POINT_DATA {}", mesh.count(0)).unwrap();
        for f in point_fields {
            write_samples(&mut out, f);
        }
    }
    let cell_fields: Vec<_> = fields.iter().filter(|f| !matches!(f.samples, FieldSamples::Vertex(_))).collect();
    if !cell_fields.is_empty() {
        writeln!(out, "CELL_DATA {nt}").unwrap();
        for f in cell_fields {
            write_samples(&mut out, f);
        }
    }
    out
}

fn write_samples(out: &mut String, field: &VtkField) {
    let name: String = field.name.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect();
    match &field.samples {
        FieldSamples::Vertex(values) | FieldSamples::Cell(values) => {
            writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default").unwrap();
            for v in values {
                writeln!(out, "{v:.16e}").unwrap();
            }
        }
        FieldSamples::CellVector(values) => {
            writeln!(out, "VECTORS {name} double").unwrap();
            for [x, y] in values {
                writeln!(out, "{x:.16e} {y:.16e} {:.16e}", 0.0).unwrap();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_mesh, Domain};

    #[test]
    fn layout_of_small_file() {
        let mesh = generate_mesh(Domain::Square, 1);
        let text = write_vtk(
            &mesh,
            "t",
            &[
                VtkField::new("a", FieldSamples::Vertex(vec![0.0; 4])),
                VtkField::new("b c", FieldSamples::CellVector(vec![[1.0, 2.0]; 2])),
                VtkField::new("d", FieldSamples::Cell(vec![3.0; 2])),
            ],
        );
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# vtk DataFile Version 2.0");
        assert_eq!(lines[4], "POINTS 4 double");
        assert_eq!(lines[9], "CELLS 2 8");
        assert_eq!(lines[12], "CELL_TYPES 2");
        assert_eq!(lines[15], "POINT_DATA 4");
        assert!(text.contains("CELL_DATA 2\nVECTORS b_c double\n1.0000000000000000e0 2.0000000000000000e0 0.0000000000000000e0\n"));
        assert!(text.ends_with("SCALARS d double 1\nLOOKUP_TABLE default\n3.0000000000000000e0\n3.0000000000000000e0\n"));
    }
}
