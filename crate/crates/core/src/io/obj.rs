//! Minimal ASCII Wavefront OBJ reader and writer (vertices and faces only).

use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::{Mesh, MeshError, Point};

#[derive(Debug, Error)]
pub enum ObjError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

pub fn parse_obj(text: &str) -> Result<Mesh, ObjError> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let err = |msg: String| ObjError::Syntax { line, msg };
        let mut tok = raw.split_whitespace();
        match tok.next() {
            Some("v") => {
                let c: Vec<f64> = tok
                    .take(3)
                    .map(|t| t.parse::<f64>().map_err(|e| err(format!("bad coordinate {t:?}: {e}"))))
                    .collect::<Result<_, _>>()?;
                if c.len() != 3 {
                    return Err(err("vertex needs 3 coordinates".into()));
                }
                vertices.push(Point::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let idx: Vec<u32> = tok
                    .map(|t| {
                        let first = t.split('/').next().unwrap_or("");
                        let i: i64 = first.parse().map_err(|e| err(format!("bad index {t:?}: {e}")))?;
                        let resolved = if i < 0 { vertices.len() as i64 + i } else { i - 1 };
                        u32::try_from(resolved).map_err(|_| err(format!("index {i} out of range")))
                    })
                    .collect::<Result<_, _>>()?;
                if idx.len() < 3 {
                    return Err(err("face needs at least 3 vertices".into()));
                }
                for k in 1..idx.len() - 1 {
                    triangles.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    Ok(Mesh::new(vertices, triangles)?)
}

/// Shortest round-tripping decimal form of every coordinate.
pub fn write_obj(mesh: &Mesh) -> String {
    let mut out = String::new();
    for v in &mesh.vertices {
        writeln!(out, "v {:?} {:?} {:?}", v.x, v.y, v.z).unwrap();
    }
    for t in &mesh.triangles {
        writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Aabb;

    #[test]
    fn round_trip_is_exact() {
        let m = Mesh::cuboid(&Aabb::from_corners([0.1, 0.2, 0.3], [1.0 / 3.0, 2.0, 3.0]));
        let back = parse_obj(&write_obj(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn quads_and_slashes() {
        let text =
            "# square pyramid\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nv 0.5 0.5 1\nf 1/1 4/4 3/3 2/2\nf 1 2 5\nf 2 3 5\nf 3 4 5\nf -1 -2 -5\n";
        let m = parse_obj(text).unwrap();
        assert_eq!(m.triangles.len(), 6);
        m.check_watertight().unwrap();
    }

    #[test]
    fn errors_name_the_line() {
        let e = parse_obj("v 0 0 0\nv 1 x 0\n").unwrap_err();
        assert!(e.to_string().starts_with("line 2"), "{e}");
        assert!(matches!(parse_obj("v 0 0 0\nf 1 2 3\n").unwrap_err(), ObjError::Mesh(_)));
    }
}
