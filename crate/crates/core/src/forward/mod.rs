//! Physical-optics far fields of convex polyhedra under plane-wave incidence.
//!
//! For a unit incident direction `d`, polarization `p` and wavenumber `k`,
//! only faces with `nu . d < 0` are lit, and
//!
//! ```text
//! H(x) = ik/(2 pi) sum_lit x cross [nu cross (d cross p)] int_C exp(ik(d - x).y) ds
//! E(x) = H(x) cross x
//! ```

mod io;
mod polygon;


use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Vector3;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::ConvexPolyhedron;
use crate::sphgrid::SphericalGrid;

pub use io::{format_far_field, parse_far_field, read_far_field, write_far_field};
pub use polygon::{adaptive_polygon_integral, polygon_fourier_integral};

type Vec3 = Vector3<f64>;
/// Complex 3-vector for far-field values.
pub type CVec3 = Vector3<Complex64>;

/// A normalized time-harmonic plane wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    d: Vec3,
    p: Vec3,
    k: f64,
}

impl PlaneWave {
    /// Normalizes `d`, projects `p` onto the plane orthogonal to `d` and
    /// normalizes it.
    pub fn new(d: Vec3, p: Vec3, k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidInput(format!("wavenumber must be positive, got {k}")));
        }
        let dn = d.norm();
        if !(dn > 1e-12 && dn.is_finite()) {
            return Err(Error::InvalidInput("incident direction has zero length".into()));
        }
        let d = d / dn;
        let p = p - d * p.dot(&d);
        let pn = p.norm();
        if !(pn > 1e-9 && pn.is_finite()) {
            return Err(Error::InvalidInput("polarization is parallel to the incident direction".into()));
        }
        Ok(Self { d, p: p / pn, k })
    }

    pub fn from_wavelength(d: Vec3, p: Vec3, wavelength: f64) -> Result<Self> {
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::InvalidInput(format!("wavelength must be positive, got {wavelength}")));
        }
        Self::new(d, p, 2.0 * PI / wavelength)
    }

    pub fn d(&self) -> &Vec3 {
        &self.d
    }

    pub fn p(&self) -> &Vec3 {
        &self.p
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.k
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FarFieldKind {
    Modulus,
    ComplexE,
    ComplexH,
}

impl FarFieldKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FarFieldKind::Modulus => "modulus",
            FarFieldKind::ComplexE => "complex-E",
            FarFieldKind::ComplexH => "complex-H",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "modulus" => Some(FarFieldKind::Modulus),
            "complex-E" => Some(FarFieldKind::ComplexE),
            "complex-H" => Some(FarFieldKind::ComplexH),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Values {
    Modulus(Vec<f64>),
    Complex(Vec<CVec3>),
}

/// Far-field values on every point of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldSamples {
    grid: Arc<SphericalGrid>,
    wave: PlaneWave,
    kind: FarFieldKind,
    values: Values,
}

impl FarFieldSamples {
    /// Wraps moduli; they must be finite and nonnegative.
    pub fn from_moduli(grid: Arc<SphericalGrid>, wave: PlaneWave, values: Vec<f64>) -> Result<Self> {
        check_count(&grid, values.len())?;
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput(format!("modulus {} at point {i} is not a nonnegative number", values[i])));
        }
        Ok(Self {
            grid,
            wave,
            kind: FarFieldKind::Modulus,
            values: Values::Modulus(values),
        })
    }

    /// Wraps complex tangential fields of kind `ComplexE` or `ComplexH`.
    pub fn from_complex(grid: Arc<SphericalGrid>, wave: PlaneWave, kind: FarFieldKind, values: Vec<CVec3>) -> Result<Self> {
        if kind == FarFieldKind::Modulus {
            return Err(Error::WrongKind {
                expected: "complex-E or complex-H",
                found: kind.as_str(),
            });
        }
        check_count(&grid, values.len())?;
        Ok(Self {
            grid,
            wave,
            kind,
            values: Values::Complex(values),
        })
    }

    pub fn grid(&self) -> &Arc<SphericalGrid> {
        &self.grid
    }

    pub fn wave(&self) -> &PlaneWave {
        &self.wave
    }

    pub fn kind(&self) -> FarFieldKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn moduli(&self) -> Option<&[f64]> {
        match &self.values {
            Values::Modulus(v) => Some(v),
            Values::Complex(_) => None,
        }
    }

    pub fn complex(&self) -> Option<&[CVec3]> {
        match &self.values {
            Values::Modulus(_) => None,
            Values::Complex(v) => Some(v),
        }
    }

    /// `|E|` at every point, whatever the stored kind.
    pub fn modulus_values(&self) -> Vec<f64> {
        match &self.values {
            Values::Modulus(v) => v.clone(),
            Values::Complex(v) => v.iter().map(cnorm).collect(),
        }
    }
}

fn check_count(grid: &SphericalGrid, n: usize) -> Result<()> {
    if n != grid.len() {
        return Err(Error::InvalidInput(format!("{n} values for a grid of {} points", grid.len())));
    }
    Ok(())
}

/// Euclidean norm of a complex 3-vector.
pub fn cnorm(v: &CVec3) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Seeded multiplicative Gaussian noise `|E| (1 + delta r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    delta: f64,
    seed: u64,
}

impl NoiseModel {
    pub fn new(delta: f64, seed: u64) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::InvalidInput(format!("noise level must be nonnegative, got {delta}")));
        }
        Ok(Self { delta, seed })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// PO far fields `(E, H)` of `poly` in the unit direction `x`.
pub fn po_far_field(poly: &ConvexPolyhedron, wave: &PlaneWave, x: &Vec3) -> (CVec3, CVec3) {
    let lit: Vec<LitFace> = lit_faces(poly, wave);
    far_field_from_lit(&lit, wave, x)
}

struct LitFace {
    points: Vec<Vec3>,
    normal: Vec3,
    /// `nu cross (d cross p)`.
    current: Vec3,
}

fn lit_faces(poly: &ConvexPolyhedron, wave: &PlaneWave) -> Vec<LitFace> {
    let dxp = wave.d.cross(&wave.p);
    poly.faces()
        .iter()
        .enumerate()
        .filter(|(_, f)| f.normal.dot(&wave.d) < 0.0)
        .map(|(j, f)| LitFace {
            points: poly.face_points(j),
            normal: f.normal,
            current: f.normal.cross(&dxp),
        })
        .collect()
}

fn far_field_from_lit(lit: &[LitFace], wave: &PlaneWave, x: &Vec3) -> (CVec3, CVec3) {
    let q = (wave.d - x) * wave.k;
    let mut h = CVec3::zeros();
    for face in lit {
        let integral = polygon::polygon_integral_unchecked(&face.points, &face.normal, &q);
        let dir = x.cross(&face.current);
        h += dir.map(|c| integral * c);
    }
    let h = h * Complex64::new(0.0, wave.k / (2.0 * PI));
    let e = cross_real(&h, x);
    (e, h)
}

fn cross_real(a: &CVec3, b: &Vec3) -> CVec3 {
    CVec3::new(
        a.y * b.z - a.z * b.y,
        a.z * b.x - a.x * b.z,
        a.x * b.y - a.y * b.x,
    )
}

/// Complex far fields of the requested kind on every grid point.
pub fn sample_far_field(
    poly: &ConvexPolyhedron,
    wave: &PlaneWave,
    grid: Arc<SphericalGrid>,
    kind: FarFieldKind,
) -> Result<FarFieldSamples> {
    let lit = lit_faces(poly, wave);
    let fields: Vec<(CVec3, CVec3)> = grid.points().par_iter().map(|x| far_field_from_lit(&lit, wave, x)).collect();
    match kind {
        FarFieldKind::Modulus => {
            let values = fields.iter().map(|(e, _)| cnorm(e)).collect();
            FarFieldSamples::from_moduli(grid, *wave, values)
        }
        FarFieldKind::ComplexE => {
            FarFieldSamples::from_complex(grid, *wave, kind, fields.into_iter().map(|(e, _)| e).collect())
        }
        FarFieldKind::ComplexH => {
            FarFieldSamples::from_complex(grid, *wave, kind, fields.into_iter().map(|(_, h)| h).collect())
        }
    }
}

/// `|E|` on every grid point.
pub fn sample_phaseless(poly: &ConvexPolyhedron, wave: &PlaneWave, grid: Arc<SphericalGrid>) -> FarFieldSamples {
    sample_far_field(poly, wave, grid, FarFieldKind::Modulus).expect("moduli are finite and nonnegative")
}

/// Multiplies complex samples by `exp(ik(d - x).z)`, the far field of the
/// obstacle shifted by `z`.
pub fn apply_translation_phase(samples: &FarFieldSamples, z: &Vec3) -> Result<FarFieldSamples> {
    let values = samples.complex().ok_or(Error::WrongKind {
        expected: "complex-E or complex-H",
        found: samples.kind.as_str(),
    })?;
    let wave = samples.wave;
    let shifted = samples
        .grid
        .points()
        .iter()
        .zip(values)
        .map(|(x, v)| v * Complex64::from_polar(1.0, wave.k * (wave.d - x).dot(z)))
        .collect();
    FarFieldSamples::from_complex(samples.grid.clone(), wave, samples.kind, shifted)
}

/// Applies `|E| (1 + delta r)` with standard normal `r` drawn in grid order;
/// negative results are clamped to zero.
pub fn add_noise(samples: &FarFieldSamples, noise: &NoiseModel) -> Result<FarFieldSamples> {
    let values = samples.moduli().ok_or(Error::WrongKind {
        expected: "modulus",
        found: samples.kind.as_str(),
    })?;
    if noise.delta == 0.0 {
        return Ok(samples.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let noisy = values
        .iter()
        .map(|v| {
            let r: f64 = StandardNormal.sample(&mut rng);
            (v * (1.0 + noise.delta * r)).max(0.0)
        })
        .collect();
    FarFieldSamples::from_moduli(samples.grid.clone(), samples.wave, noisy)
}
