//! Convex polyhedral obstacles: construction, validation, illumination
//! classification, admissibility checks and half-space intersection.

mod halfspace;
pub(crate) mod hull;
pub mod io;
mod polyhedron;
pub mod shapes;

use nalgebra::Vector3;

pub use halfspace::{halfspace_intersection, HalfspaceIntersection};
pub use hull::convex_hull;
pub use io::{format_obstacle, parse_obstacle, read_obstacle, write_obstacle};
pub use polyhedron::{build_polyhedron, ConvexPolyhedron, Face, MIN_FACE_AREA, SHAPE_TOL};

use crate::error::{Error, Result};

type Vec3 = Vector3<f64>;

/// Illuminated/shadowed split of the faces for one incident direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrontView {
    /// Faces with `nu . d < 0`.
    pub front: Vec<usize>,
    /// Faces with `nu . d >= 0`; grazing faces land here.
    pub back: Vec<usize>,
    /// Front faces with `|d . nu| >= h5`.
    pub significant: Vec<usize>,
}

pub fn classify_faces(poly: &ConvexPolyhedron, d: &Vec3, h5: f64) -> FrontView {
    let mut view = FrontView {
        front: Vec::new(),
        back: Vec::new(),
        significant: Vec::new(),
    };
    for (j, face) in poly.faces().iter().enumerate() {
        let c = face.normal.dot(d);
        if c < 0.0 {
            view.front.push(j);
            if c.abs() >= h5 {
                view.significant.push(j);
            }
        } else {
            view.back.push(j);
        }
    }
    view
}

/// A priori size/shape bounds `h0..h5` for admissible obstacles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibilityParams {
    /// Minimum volume.
    pub h0: f64,
    /// Maximum volume.
    pub h1: f64,
    /// Minimum `|nu_a x nu_b|` over pairs of simultaneously lit faces.
    pub h2: f64,
    /// Minimum face area.
    pub h3: f64,
    /// Maximum face perimeter.
    pub h4: f64,
    /// Minimum `|d . nu|` for a lit face to count as significant.
    pub h5: f64,
}

impl AdmissibilityParams {
    pub fn new(h0: f64, h1: f64, h2: f64, h3: f64, h4: f64, h5: f64) -> Result<Self> {
        let p = Self { h0, h1, h2, h3, h4, h5 };
        if [h0, h1, h2, h3, h4, h5].iter().any(|h| !(*h > 0.0)) {
            return Err(Error::InvalidInput("admissibility bounds must be positive".into()));
        }
        if h0 > h1 {
            return Err(Error::InvalidInput("h0 must not exceed h1".into()));
        }
        Ok(p)
    }
}

impl Default for AdmissibilityParams {
    fn default() -> Self {
        Self {
            h0: 0.01,
            h1: 100.0,
            h2: 0.5,
            h3: 0.1,
            h4: 10.0,
            h5: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionReport {
    pub direction: Vec3,
    pub view: FrontView,
    /// Smallest `|nu_a x nu_b|` over distinct front-face pairs; `None` with fewer than two.
    pub min_front_cross: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub volume: f64,
    pub min_area: f64,
    pub max_perimeter: f64,
    pub volume_ok: bool,
    pub front_pairs_ok: bool,
    pub area_ok: bool,
    pub perimeter_ok: bool,
    pub directions: Vec<DirectionReport>,
}

impl AdmissibilityReport {
    pub fn admissible(&self) -> bool {
        self.volume_ok && self.front_pairs_ok && self.area_ok && self.perimeter_ok
    }
}

pub fn check_admissibility(
    poly: &ConvexPolyhedron,
    params: &AdmissibilityParams,
    directions: &[Vec3],
) -> AdmissibilityReport {
    let volume = poly.volume();
    let min_area = poly.faces().iter().map(|f| f.area).fold(f64::INFINITY, f64::min);
    let max_perimeter = poly.faces().iter().map(|f| f.perimeter).fold(0.0, f64::max);

    let directions: Vec<DirectionReport> = directions
        .iter()
        .map(|d| {
            let d = d.normalize();
            let view = classify_faces(poly, &d, params.h5);
            let mut min_front_cross: Option<f64> = None;
            for (i, &a) in view.front.iter().enumerate() {
                for &b in &view.front[i + 1..] {
                    let c = poly.faces()[a].normal.cross(&poly.faces()[b].normal).norm();
                    min_front_cross = Some(min_front_cross.map_or(c, |m| m.min(c)));
                }
            }
            DirectionReport {
                direction: d,
                view,
                min_front_cross,
            }
        })
        .collect();

    AdmissibilityReport {
        volume,
        min_area,
        max_perimeter,
        volume_ok: params.h0 <= volume && volume <= params.h1,
        front_pairs_ok: directions
            .iter()
            .all(|r| r.min_front_cross.map_or(true, |c| c >= params.h2)),
        area_ok: min_area >= params.h3,
        perimeter_ok: max_perimeter <= params.h4,
        directions,
    }
}
