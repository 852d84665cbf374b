//! Plain-text far-field files.
//!
//! ```text
//! # kind=modulus
//! # k=12.566370614359172 d=1 0 0 p=0 0 1
//! 0.012 0.9 0.43  0.52
//! ```
//!
//! Complex kinds carry six numbers per row, the real and imaginary parts of
//! the three Cartesian components. If the directions are exactly a Fibonacci
//! lattice the grid is rebuilt as one (with its equal-area weights);
//! otherwise it is triangulated from the points.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use nalgebra::Vector3;
use num_complex::Complex64;

use super::{CVec3, FarFieldKind, FarFieldSamples, PlaneWave};
use crate::error::{Error, Result};
use crate::sphgrid::SphericalGrid;

type Vec3 = Vector3<f64>;

pub fn format_far_field(samples: &FarFieldSamples) -> String {
    let mut out = String::new();
    let w = samples.wave();
    let (d, p) = (w.d(), w.p());
    writeln!(out, "# kind={}", samples.kind().as_str()).unwrap();
    writeln!(out, "# k={} d={} {} {} p={} {} {}", w.k(), d.x, d.y, d.z, p.x, p.y, p.z).unwrap();
    let points = samples.grid().points();
    match (samples.moduli(), samples.complex()) {
        (Some(m), _) => {
            for (x, v) in points.iter().zip(m) {
                writeln!(out, "{} {} {}  {}", x.x, x.y, x.z, v).unwrap();
            }
        }
        (None, Some(c)) => {
            for (x, v) in points.iter().zip(c) {
                write!(out, "{} {} {} ", x.x, x.y, x.z).unwrap();
                for comp in v.iter() {
                    write!(out, " {} {}", comp.re, comp.im).unwrap();
                }
                out.push('\n');
            }
        }
        (None, None) => unreachable!(),
    }
    out
}

fn header_vector(tokens: &[&str], key: &str) -> Option<Vec3> {
    let pos = tokens.iter().position(|t| t.starts_with(key))?;
    let first = &tokens[pos][key.len()..];
    let rest = tokens.get(pos + 1..pos + 3)?;
    Some(Vec3::new(first.parse().ok()?, rest[0].parse().ok()?, rest[1].parse().ok()?))
}

pub fn parse_far_field(text: &str, origin: &Path) -> Result<FarFieldSamples> {
    let mut kind = None;
    let mut wave = None;
    let mut points = Vec::new();
    let mut moduli = Vec::new();
    let mut fields = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let err = |msg: String| Error::parse(origin, lineno + 1, msg);
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let tokens: Vec<&str> = comment.split_whitespace().collect();
            if let Some(k) = tokens.iter().find_map(|t| t.strip_prefix("kind=")) {
                kind = Some(FarFieldKind::parse(k).ok_or_else(|| err(format!("unknown kind `{k}`")))?);
            }
            if let Some(k) = tokens.iter().find_map(|t| t.strip_prefix("k=")) {
                let k: f64 = k.parse().map_err(|_| err(format!("bad wavenumber `{k}`")))?;
                let d = header_vector(&tokens, "d=").ok_or_else(|| err("missing or bad `d=` vector".into()))?;
                let p = header_vector(&tokens, "p=").ok_or_else(|| err("missing or bad `p=` vector".into()))?;
                wave = Some(PlaneWave::new(d, p, k).map_err(|e| err(e.to_string()))?);
            }
            continue;
        }
        let kind = kind.ok_or_else(|| err("data before the `# kind=` header".into()))?;
        let nums: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| err(format!("bad number `{t}`"))))
            .collect::<Result<_>>()?;
        let expected = if kind == FarFieldKind::Modulus { 4 } else { 9 };
        if nums.len() != expected {
            return Err(err(format!("expected {expected} numbers, got {}", nums.len())));
        }
        points.push(Vec3::new(nums[0], nums[1], nums[2]));
        if kind == FarFieldKind::Modulus {
            moduli.push(nums[3]);
        } else {
            fields.push(CVec3::new(
                Complex64::new(nums[3], nums[4]),
                Complex64::new(nums[5], nums[6]),
                Complex64::new(nums[7], nums[8]),
            ));
        }
    }
    let kind = kind.ok_or_else(|| Error::parse(origin, 0, "missing `# kind=` header"))?;
    let wave = wave.ok_or_else(|| Error::parse(origin, 0, "missing `# k=... d=... p=...` header"))?;
    let grid = Arc::new(grid_for_points(points).map_err(|e| Error::parse(origin, 0, e.to_string()))?);
    let samples = if kind == FarFieldKind::Modulus {
        FarFieldSamples::from_moduli(grid, wave, moduli)
    } else {
        FarFieldSamples::from_complex(grid, wave, kind, fields)
    };
    samples.map_err(|e| Error::parse(origin, 0, e.to_string()))
}

fn grid_for_points(points: Vec<Vec3>) -> Result<SphericalGrid> {
    if points.len() >= 12 {
        let fib = SphericalGrid::fibonacci(points.len())?;
        if fib.points().iter().zip(&points).all(|(a, b)| (a - b).norm() < 1e-12) {
            return Ok(fib);
        }
    }
    SphericalGrid::from_points(points)
}

pub fn read_far_field(path: impl AsRef<Path>) -> Result<FarFieldSamples> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_far_field(&text, path)
}

pub fn write_far_field(path: impl AsRef<Path>, samples: &FarFieldSamples) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_far_field(samples)).map_err(|e| Error::io(path, e))
}
