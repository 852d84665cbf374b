//! Plain-text obstacle files.
//!
//! ```text
//! # comment
//! v 0.5 0 -0.3535533905932738
//! f 2 4 3
//! ```
//!
//! Vertex lines carry three coordinates, face lines 1-based vertex indices in
//! counterclockwise order seen from outside. Coordinates are written with the
//! shortest representation that parses back to the same `f64`, so emitting a
//! parsed file reproduces it byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;

use super::ConvexPolyhedron;
use crate::error::{Error, Result};

pub fn format_obstacle(poly: &ConvexPolyhedron) -> String {
    let mut out = String::new();
    for v in poly.vertices() {
        writeln!(out, "v {} {} {}", v.x, v.y, v.z).unwrap();
    }
    for face in poly.faces() {
        out.push('f');
        for &i in &face.vertices {
            write!(out, " {}", i + 1).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_obstacle(text: &str, origin: &Path) -> Result<ConvexPolyhedron> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let err = |msg: String| Error::parse(origin, lineno + 1, msg);
        match tokens.next() {
            Some("v") => {
                let coords: Vec<f64> = tokens
                    .map(|t| t.parse::<f64>().map_err(|e| err(format!("bad coordinate `{t}`: {e}"))))
                    .collect::<Result<_>>()?;
                if coords.len() != 3 {
                    return Err(err(format!("vertex needs 3 coordinates, got {}", coords.len())));
                }
                vertices.push(Vector3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let idx: Vec<usize> = tokens
                    .map(|t| match t.parse::<usize>() {
                        Ok(i) if i >= 1 => Ok(i - 1),
                        _ => Err(err(format!("bad 1-based vertex index `{t}`"))),
                    })
                    .collect::<Result<_>>()?;
                if idx.len() < 3 {
                    return Err(err("face needs at least 3 vertices".into()));
                }
                faces.push(idx);
            }
            Some(other) => return Err(err(format!("unknown record `{other}`"))),
            None => unreachable!(),
        }
    }
    ConvexPolyhedron::new(vertices, faces).map_err(|e| Error::parse(origin, 0, e.to_string()))
}

pub fn read_obstacle(path: impl AsRef<Path>) -> Result<ConvexPolyhedron> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_obstacle(&text, path)
}

pub fn write_obstacle(path: impl AsRef<Path>, poly: &ConvexPolyhedron) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_obstacle(poly)).map_err(|e| Error::io(path, e))
}
