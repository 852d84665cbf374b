//! Obstacle location from one low-frequency complex far field.
//!
//! The indicator is the fraction of far-field energy captured by the six
//! degree-1 vector harmonics after undoing the phase of a translation by `z`:
//!
//! ```text
//! I(z) = sum_{|m|<=1} |<E, e^{ik(d-x).z} U_1^m>|^2 + |<E, e^{ik(d-x).z} V_1^m>|^2
//!        / ||E||^2
//! ```
//!
//! A far field radiated by a small body centered at `z0` is mostly degree 1
//! around `z0`, so `I` peaks there.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forward::{CVec3, FarFieldKind, FarFieldSamples, PlaneWave};
use crate::sphgrid::{eval_vector_harmonics, SphericalGrid};

type Vec3 = Vector3<f64>;

/// Refinement stops once the compass step falls below this length.
pub const REFINE_STEP_TOL: f64 = 1e-3;

/// Axis-aligned search box with a coarse scan grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRegion {
    lower: Vec3,
    upper: Vec3,
    divisions: [usize; 3],
}

impl SampleRegion {
    /// `divisions[i]` cells along axis `i`, so the scan has
    /// `divisions[i] + 1` points per axis including both ends.
    pub fn new(lower: Vec3, upper: Vec3, divisions: [usize; 3]) -> Result<Self> {
        for i in 0..3 {
            if !(lower[i].is_finite() && upper[i].is_finite() && lower[i] < upper[i]) {
                return Err(Error::InvalidInput(format!(
                    "region axis {i}: need a < b, got [{}, {}]",
                    lower[i], upper[i]
                )));
            }
            if divisions[i] == 0 {
                return Err(Error::InvalidInput(format!("region axis {i} has zero divisions")));
            }
        }
        Ok(Self {
            lower,
            upper,
            divisions,
        })
    }

    /// Cube `[a, b]^3` scanned with spacing close to `step`.
    pub fn cube(a: f64, b: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::InvalidInput(format!("scan step must be positive, got {step}")));
        }
        let cells = (((b - a) / step).round() as usize).max(1);
        Self::new(Vec3::repeat(a), Vec3::repeat(b), [cells; 3])
    }

    pub fn lower(&self) -> &Vec3 {
        &self.lower
    }

    pub fn upper(&self) -> &Vec3 {
        &self.upper
    }

    pub fn divisions(&self) -> [usize; 3] {
        self.divisions
    }

    pub fn spacing(&self) -> Vec3 {
        Vec3::from_fn(|i, _| (self.upper[i] - self.lower[i]) / self.divisions[i] as f64)
    }

    /// Scan points, x fastest.
    pub fn grid_points(&self) -> Vec<Vec3> {
        let h = self.spacing();
        let [nx, ny, nz] = self.divisions;
        let mut out = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
        for iz in 0..=nz {
            for iy in 0..=ny {
                for ix in 0..=nx {
                    out.push(self.lower + Vec3::new(ix as f64 * h.x, iy as f64 * h.y, iz as f64 * h.z));
                }
            }
        }
        out
    }

    pub fn clamp(&self, z: &Vec3) -> Vec3 {
        Vec3::from_fn(|i, _| z[i].clamp(self.lower[i], self.upper[i]))
    }
}

/// Whether the location is the maximizer or the minimizer of the indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Polarity {
    #[default]
    Maximize,
    Minimize,
}

impl Polarity {
    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Maximize => "max",
            Polarity::Minimize => "min",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "max" | "maximize" => Some(Polarity::Maximize),
            "min" | "minimize" => Some(Polarity::Minimize),
            _ => None,
        }
    }

    fn better(self, a: f64, b: f64) -> bool {
        match self {
            Polarity::Maximize => a > b,
            Polarity::Minimize => a < b,
        }
    }
}

/// Precomputed projections of one complex far field, so each `I(z)` costs
/// one pass over the grid.
#[derive(Debug, Clone)]
pub struct Indicator {
    /// `w_i E_i . W_l(x_i)` for the six real degree-1 fields `W_l`.
    weighted: Vec<[Complex64; 6]>,
    /// `k (d - x_i)`.
    phase_dirs: Vec<Vec3>,
    energy: f64,
}

impl Indicator {
    pub fn new(samples: &FarFieldSamples) -> Result<Self> {
        if samples.kind() != FarFieldKind::ComplexE {
            return Err(Error::WrongKind {
                expected: "complex-E",
                found: samples.kind().as_str(),
            });
        }
        let values = samples.complex().expect("complex-E samples carry vectors");
        let grid = samples.grid();
        let wave = samples.wave();
        let energy: f64 = grid
            .weights()
            .iter()
            .zip(values)
            .map(|(w, e)| w * e.iter().map(|c| c.norm_sqr()).sum::<f64>())
            .sum();
        if !(energy.sqrt() >= 1e-14) {
            return Err(Error::ZeroField);
        }
        let weighted = grid
            .points()
            .par_iter()
            .zip(grid.weights().par_iter())
            .zip(values.par_iter())
            .map(|((x, w), e)| {
                let mut row = [Complex64::new(0.0, 0.0); 6];
                for (slot, m) in (-1..=1).enumerate() {
                    let (u, v) = eval_vector_harmonics(1, m, x);
                    row[2 * slot] = dot_real(e, &u) * *w;
                    row[2 * slot + 1] = dot_real(e, &v) * *w;
                }
                row
            })
            .collect();
        let phase_dirs = grid.points().iter().map(|x| (wave.d() - x) * wave.k()).collect();
        Ok(Self {
            weighted,
            phase_dirs,
            energy,
        })
    }

    pub fn value(&self, z: &Vec3) -> f64 {
        let mut acc = [Complex64::new(0.0, 0.0); 6];
        for (row, q) in self.weighted.iter().zip(&self.phase_dirs) {
            let phase = Complex64::from_polar(1.0, -q.dot(z));
            for (a, r) in acc.iter_mut().zip(row) {
                *a += r * phase;
            }
        }
        acc.iter().map(|a| a.norm_sqr()).sum::<f64>() / self.energy
    }
}

fn dot_real(e: &CVec3, w: &Vec3) -> Complex64 {
    e.x * w.x + e.y * w.y + e.z * w.z
}

/// `I(z)` for complex-E samples. Building an [`Indicator`] once is cheaper
/// for many evaluations.
pub fn indicator_value(samples: &FarFieldSamples, z: &Vec3) -> Result<f64> {
    Ok(Indicator::new(samples)?.value(z))
}

/// Outcome of [`locate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    pub point: Vec3,
    pub value: f64,
    /// Coarse scan, in [`SampleRegion::grid_points`] order.
    pub scan: Vec<(Vec3, f64)>,
    pub evaluations: usize,
}

impl Location {
    /// `z_x z_y z_z value`.
    pub fn to_text(&self) -> String {
        format!(
            "{:.10} {:.10} {:.10} {:.10}\n",
            self.point.x, self.point.y, self.point.z, self.value
        )
    }

    /// One `x y z value` row per scan point.
    pub fn scan_to_text(&self) -> String {
        let mut out = String::with_capacity(self.scan.len() * 48);
        for (z, v) in &self.scan {
            writeln!(out, "{} {} {} {:.10}", z.x, z.y, z.z, v).unwrap();
        }
        out
    }
}

/// Coarse scan of `region`, then compass search from the best scan point
/// with step halving down to [`REFINE_STEP_TOL`], clamped to the region.
pub fn locate(samples: &FarFieldSamples, region: &SampleRegion, polarity: Polarity) -> Result<Location> {
    let indicator = Indicator::new(samples)?;
    let points = region.grid_points();
    let values: Vec<f64> = points.par_iter().map(|z| indicator.value(z)).collect();
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if polarity.better(*v, values[best]) {
            best = i;
        }
    }
    let mut evaluations = values.len();
    let mut point = points[best];
    let mut value = values[best];

    let mut step = region.spacing() / 2.0;
    while step.max() >= REFINE_STEP_TOL {
        let mut moved = false;
        for axis in 0..3 {
            for sign in [1.0, -1.0] {
                let mut trial = point;
                trial[axis] += sign * step[axis];
                let trial = region.clamp(&trial);
                if trial == point {
                    continue;
                }
                let v = indicator.value(&trial);
                evaluations += 1;
                if polarity.better(v, value) {
                    point = trial;
                    value = v;
                    moved = true;
                }
            }
        }
        if !moved {
            step /= 2.0;
        }
    }

    Ok(Location {
        point,
        value,
        scan: points.into_iter().zip(values).collect(),
        evaluations,
    })
}

/// Exactly degree-1 far field radiated from `z0`:
/// `e^{ik(d-x).z0} [(x cross p) cross x - (1/2) x cross (d cross p)]`.
pub fn degree_one_oracle(wave: &PlaneWave, grid: Arc<SphericalGrid>, z0: &Vec3) -> Result<FarFieldSamples> {
    let (d, p, k) = (*wave.d(), *wave.p(), wave.k());
    let dxp = d.cross(&p);
    let values = grid
        .points()
        .iter()
        .map(|x| {
            let field = x.cross(&p).cross(x) - x.cross(&dxp) * 0.5;
            let phase = Complex64::from_polar(1.0, k * (d - x).dot(z0));
            field.map(|c| phase * c)
        })
        .collect();
    FarFieldSamples::from_complex(grid, *wave, FarFieldKind::ComplexE, values)
}
