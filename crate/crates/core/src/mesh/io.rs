use std::io::{BufRead, Write};
use std::str::FromStr;

use super::{DomainTag, MeshError, SimplicialMesh};

impl SimplicialMesh {
    /// Writes the `mesh2d` text format.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "mesh2d {} {} {}", self.vertices.len(), self.edges.len(), self.triangles.len())?;
        for [x, y] in &self.vertices {
            writeln!(out, "{x:.16e} {y:.16e}")?;
        }
        for [a, b] in &self.edges {
            writeln!(out, "{a} {b}")?;
        }
        for [a, b, c] in &self.triangles {
            writeln!(out, "{a} {b} {c}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ASCII output")
    }

    /// Reads the `mesh2d` text format; `#` starts a comment.
    pub fn read_text<R: BufRead>(input: R) -> Result<Self, MeshError> {
        let mut lines = Vec::new();
        for (no, line) in input.lines().enumerate() {
            let line = line?;
            let content = line.split('#').next().unwrap_or("").trim().to_string();
            if !content.is_empty() {
                lines.push((no + 1, content));
            }
        }
        let mut it = lines.into_iter();
        let (line, header) = it.next().ok_or(MeshError::Parse {
            line: 0,
            message: "empty input".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "mesh2d" {
            return Err(MeshError::Parse {
                line,
                message: "expected header `mesh2d V E F`".into(),
            });
        }
        let counts: Vec<usize> = fields[1..]
            .iter()
            .map(|f| parse_field(line, f))
            .collect::<Result<_, _>>()?;

        let mut row = |n: usize| -> Result<(usize, Vec<String>), MeshError> {
            let (line, text) = it.next().ok_or(MeshError::Parse {
                line: 0,
                message: "unexpected end of input".into(),
            })?;
            let parts: Vec<String> = text.split_whitespace().map(str::to_string).collect();
            if parts.len() != n {
                return Err(MeshError::Parse {
                    line,
                    message: format!("expected {n} fields, found {}", parts.len()),
                });
            }
            Ok((line, parts))
        };
        let mut vertices = Vec::with_capacity(counts[0]);
        for _ in 0..counts[0] {
            let (line, p) = row(2)?;
            vertices.push([parse_field(line, &p[0])?, parse_field(line, &p[1])?]);
        }
        let mut edges = Vec::with_capacity(counts[1]);
        for _ in 0..counts[1] {
            let (line, p) = row(2)?;
            edges.push([parse_field(line, &p[0])?, parse_field(line, &p[1])?]);
        }
        let mut triangles = Vec::with_capacity(counts[2]);
        for _ in 0..counts[2] {
            let (line, p) = row(3)?;
            triangles.push([parse_field(line, &p[0])?, parse_field(line, &p[1])?, parse_field(line, &p[2])?]);
        }
        if let Some((line, _)) = it.next() {
            return Err(MeshError::Parse {
                line,
                message: "trailing data after the triangle table".into(),
            });
        }
        SimplicialMesh::from_tables(vertices, edges, triangles, DomainTag::External)
    }
}

impl FromStr for SimplicialMesh {
    type Err = MeshError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SimplicialMesh::read_text(s.as_bytes())
    }
}

fn parse_field<T: FromStr>(line: usize, field: &str) -> Result<T, MeshError> {
    field.parse().map_err(|_| MeshError::Parse {
        line,
        message: format!("invalid number `{field}`"),
    })
}
