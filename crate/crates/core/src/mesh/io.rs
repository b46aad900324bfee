//! Plain-text mesh format.
//!
//! ```text
//! # optional comments
//! vertices <n>
//! x y boundary_flag      (n lines)
//! elements <m>
//! v0 v1 v2               (m lines)
//! ```
//!
//! The boundary flag (0 or 1) must agree with the topology of the elements.

use std::fmt::Write as _;

use super::Triangulation;
use crate::error::{Error, Result};

fn format_err(line: usize, msg: impl Into<String>) -> Error {
    Error::MeshFormat { line, msg: msg.into() }
}

fn header<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, name: &str) -> Result<usize> {
    let (ln, l) = lines.next().ok_or_else(|| format_err(0, format!("missing '{name}' header")))?;
    let mut it = l.split_whitespace();
    if it.next() != Some(name) {
        return Err(format_err(ln, format!("expected '{name} <count>'")));
    }
    it.next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| format_err(ln, format!("invalid {name} count")))
}

/// Parses a mesh from text.
pub fn read_mesh(text: &str) -> Result<Triangulation> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let nv = header(&mut lines, "vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    let mut flags = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or_else(|| format_err(0, "unexpected end of vertex list"))?;
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 3 {
            return Err(format_err(ln, "expected 'x y boundary_flag'"));
        }
        let x: f64 = f[0].parse().map_err(|_| format_err(ln, "invalid x coordinate"))?;
        let y: f64 = f[1].parse().map_err(|_| format_err(ln, "invalid y coordinate"))?;
        let b: u8 = f[2].parse().map_err(|_| format_err(ln, "invalid boundary flag"))?;
        if b > 1 {
            return Err(format_err(ln, "boundary flag must be 0 or 1"));
        }
        vertices.push([x, y]);
        flags.push((ln, b == 1));
    }

    let ne = header(&mut lines, "elements")?;

    let mut elements = Vec::with_capacity(ne);
    for _ in 0..ne {
        let (ln, l) = lines.next().ok_or_else(|| format_err(0, "unexpected end of element list"))?;
        let f: Vec<usize> = l
            .split_whitespace()
            .map(|s| s.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| format_err(ln, "invalid vertex index"))?;
        if f.len() != 3 {
            return Err(format_err(ln, "expected 'v0 v1 v2'"));
        }
        if f.iter().any(|&v| v >= nv) {
            return Err(format_err(ln, "vertex index out of range"));
        }
        elements.push([f[0], f[1], f[2]]);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(format_err(ln, "trailing content after element list"));
    }

    let t = Triangulation::new(vertices, elements)?;
    for (v, &(ln, b)) in flags.iter().enumerate() {
        if b != t.is_boundary_vertex(v) {
            return Err(format_err(ln, format!("boundary flag of vertex {v} disagrees with the topology")));
        }
    }
    Ok(t)
}

/// Serializes a mesh in the format read by [`read_mesh`].
pub fn write_mesh(t: &Triangulation) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "vertices {}", t.n_vertices());
    for (v, p) in t.vertices().iter().enumerate() {
        let _ = writeln!(s, "{:.17e} {:.17e} {}", p[0], p[1], u8::from(t.is_boundary_vertex(v)));
    }
    let _ = writeln!(s, "elements {}", t.n_elements());
    for el in t.elements() {
        let _ = writeln!(s, "{} {} {}", el[0], el[1], el[2]);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::tests::four_triangle_square;

    #[test]
    fn round_trip() {
        let t = four_triangle_square();
        let u = read_mesh(&write_mesh(&t)).unwrap();
        assert_eq!(t.vertices(), u.vertices());
        assert_eq!(t.elements(), u.elements());
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# square\n\nvertices 3\n0 0 1\n1 0 1 # corner\n0 1 1\nelements 1\n0 1 2\n";
        assert_eq!(read_mesh(text).unwrap().n_elements(), 1);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "vertices 3\n0 0 1\n1 x 1\n0 1 1\nelements 1\n0 1 2\n";
        match read_mesh(text) {
            Err(Error::MeshFormat { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let wrong_flag = "vertices 3\n0 0 0\n1 0 1\n0 1 1\nelements 1\n0 1 2\n";
        assert!(matches!(read_mesh(wrong_flag), Err(Error::MeshFormat { line: 2, .. })));
    }
}
