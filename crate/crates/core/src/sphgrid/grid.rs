use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geometry::convex_hull;

type Vec3 = Vector3<f64>;

/// Number of directions in the default shape-recovery grid.
pub const DEFAULT_GRID_POINTS: usize = 7518;
/// Number of directions in the default localization grid.
pub const DEFAULT_LOCATION_GRID_POINTS: usize = 1878;

/// Per-point quadrature weights of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    /// A third of the planar area of every touching triangle (slightly below
    /// `4 pi` in total).
    FlatTriangles,
    /// Same vertex rule with spherical-excess triangle areas.
    SphericalTriangles,
    /// `4 pi / N` for every point. Fibonacci points sit at the centers of
    /// equal-area cells, and on that lattice this rule is about ten times
    /// more accurate than the triangle rules for degrees up to 10.
    EqualArea,
}

/// Unit directions with a triangulation and per-point quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalGrid {
    points: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    areas: Vec<f64>,
    weights: Vec<f64>,
}

impl SphericalGrid {
    /// Fibonacci lattice of `n` points, triangulated by its convex hull, with
    /// equal-area weights.
    pub fn fibonacci(n: usize) -> Result<Self> {
        Self::fibonacci_with(n, QuadratureRule::EqualArea)
    }

    pub fn fibonacci_with(n: usize, rule: QuadratureRule) -> Result<Self> {
        if n < 12 {
            return Err(Error::InvalidInput(format!("grid needs at least 12 points, got {n}")));
        }
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        let points = (0..n)
            .map(|i| {
                let z = 1.0 - (2 * i + 1) as f64 / n as f64;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let phi = golden * i as f64;
                Vec3::new(r * phi.cos(), r * phi.sin(), z)
            })
            .collect();
        Self::from_points_with(points, rule)
    }

    /// Triangulates arbitrary directions (normalized on input) and weights
    /// them with the flat triangle rule.
    pub fn from_points(points: Vec<Vec3>) -> Result<Self> {
        Self::from_points_with(points, QuadratureRule::FlatTriangles)
    }

    pub fn from_points_with(points: Vec<Vec3>, rule: QuadratureRule) -> Result<Self> {
        let points: Vec<Vec3> = points
            .into_iter()
            .map(|p| {
                let n = p.norm();
                if n > 0.0 && n.is_finite() {
                    Ok(p / n)
                } else {
                    Err(Error::InvalidInput("grid direction has zero length".into()))
                }
            })
            .collect::<Result<_>>()?;
        let triangles = convex_hull(&points)?;
        let areas: Vec<f64> = triangles
            .iter()
            .map(|t| {
                let (a, b, c) = (points[t[0]], points[t[1]], points[t[2]]);
                match rule {
                    QuadratureRule::SphericalTriangles => spherical_excess(&a, &b, &c),
                    _ => 0.5 * (b - a).cross(&(c - a)).norm(),
                }
            })
            .collect();
        let weights = if rule == QuadratureRule::EqualArea {
            vec![4.0 * std::f64::consts::PI / points.len() as f64; points.len()]
        } else {
            let mut weights = vec![0.0; points.len()];
            for (t, area) in triangles.iter().zip(&areas) {
                for &i in t {
                    weights[i] += area / 3.0;
                }
            }
            weights
        };
        Ok(Self {
            points,
            triangles,
            areas,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle_areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Sum of the triangle areas.
    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// Quadrature of a scalar function given by its grid values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// Solid angle of the spherical triangle `abc` (Van Oosterom and Strackee).
fn spherical_excess(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let num = a.dot(&b.cross(c)).abs();
    let den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * num.atan2(den)
}

/// Builds the default near-uniform grid; see [`SphericalGrid::fibonacci`].
pub fn build_grid(n: usize) -> Result<SphericalGrid> {
    SphericalGrid::fibonacci(n)
}
