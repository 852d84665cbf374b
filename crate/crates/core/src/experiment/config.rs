//! Flat `key = value` experiment files.
//!
//! ```text
//! # tetrahedron at lambda = 0.5
//! obstacle = tetra.obj
//! output = out/tetra
//! wavelength = 0.5
//! incident = 1 0 0   0 0 1
//! incident = -1 0 0  0 0 1
//! noise = 0
//! seed = 7
//! ```
//!
//! Relative paths are resolved against the directory holding the config.
//! `incident` may repeat; every other key may appear once.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::forward::NoiseModel;
use crate::locator::{Polarity, SampleRegion};
use crate::maxima::{MultiStart, RecoveryThresholds};
use crate::minkowski::FitOptions;
use crate::sphgrid::{DEFAULT_GRID_POINTS, DEFAULT_LOCATION_GRID_POINTS};

type Vec3 = Vector3<f64>;

/// Where the complex far field for the location step comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LocationSource {
    /// Exactly degree-1 field radiated from `true_location`.
    #[default]
    Oracle,
    /// Physical-optics field of the obstacle moved to `true_location`.
    PhysicalOptics,
}

impl LocationSource {
    pub fn as_str(self) -> &'static str {
        match self {
            LocationSource::Oracle => "oracle",
            LocationSource::PhysicalOptics => "po",
        }
    }
}

/// One incident plane wave: direction and polarization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Incident {
    pub d: Vec3,
    pub p: Vec3,
}

/// The six axis-aligned incidences used for the tetrahedron, cube and prism
/// experiments.
pub fn axis_incidents() -> Vec<Incident> {
    let (x, y, z) = (Vec3::x(), Vec3::y(), Vec3::z());
    vec![
        Incident { d: x, p: z },
        Incident { d: -x, p: z },
        Incident { d: y, p: z },
        Incident { d: -y, p: z },
        Incident { d: z, p: x },
        Incident { d: -z, p: x },
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub obstacle: PathBuf,
    pub output: PathBuf,
    pub incidents: Vec<Incident>,
    /// Wavelength of the shape measurements.
    pub wavelength: f64,
    /// Wavelength of the location measurement.
    pub location_wavelength: f64,
    pub grid_points: usize,
    pub location_grid_points: usize,
    pub thresholds: RecoveryThresholds,
    pub noise: NoiseModel,
    pub fit: FitOptions,
    /// Starting value for every offset in the fit.
    pub initial_offset: f64,
    pub region: SampleRegion,
    pub polarity: Polarity,
    pub location_source: LocationSource,
    /// Where the obstacle sits when the location data are synthesized.
    pub true_location: Vec3,
    /// Incidence of the location measurement; the first shape incidence if unset.
    pub location_incident: Option<Incident>,
    /// Merge recovered vertices closer than this fraction of the diameter.
    pub merge_vertices: Option<f64>,
}

impl ExperimentConfig {
    /// Defaults for everything but the obstacle, output and incidences.
    pub fn new(obstacle: impl Into<PathBuf>, output: impl Into<PathBuf>, incidents: Vec<Incident>) -> Self {
        Self {
            obstacle: obstacle.into(),
            output: output.into(),
            incidents,
            wavelength: 0.5,
            location_wavelength: 50.0,
            grid_points: DEFAULT_GRID_POINTS,
            location_grid_points: DEFAULT_LOCATION_GRID_POINTS,
            thresholds: RecoveryThresholds::default(),
            noise: NoiseModel::new(0.0, 0).expect("zero noise is valid"),
            fit: FitOptions::default(),
            initial_offset: 1.0,
            region: SampleRegion::cube(0.0, 100.0, 10.0).expect("default region is valid"),
            polarity: Polarity::Maximize,
            location_source: LocationSource::Oracle,
            true_location: Vec3::repeat(50.0),
            location_incident: None,
            merge_vertices: None,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Parses config text; `origin` names the file in errors and anchors
    /// relative paths.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let base = origin.parent().unwrap_or(Path::new(""));
        let mut cfg = Self::new(PathBuf::new(), PathBuf::new(), Vec::new());
        let mut seen: Vec<String> = Vec::new();
        let mut region_bounds: Option<(Vec3, Vec3)> = None;
        let mut region_step: Option<f64> = None;
        let mut delta = 0.0;
        let mut seed = 0;

        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: String| Error::parse(origin, lineno, m);
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            if key != "incident" {
                if seen.iter().any(|s| s == key) {
                    return Err(err(format!("`{key}` given twice")));
                }
                seen.push(key.to_string());
            }
            let num = |v: &str| -> Result<f64> {
                v.parse::<f64>().map_err(|_| err(format!("`{key}`: `{v}` is not a number")))
            };
            let count = |v: &str| -> Result<usize> {
                v.parse::<usize>().map_err(|_| err(format!("`{key}`: `{v}` is not a count")))
            };
            let nums = |v: &str, n: usize| -> Result<Vec<f64>> {
                let out: Vec<f64> = v.split_whitespace().map(num).collect::<Result<_>>()?;
                if out.len() != n {
                    return Err(err(format!("`{key}` needs {n} numbers, got {}", out.len())));
                }
                Ok(out)
            };
            let incident = |v: &str| -> Result<Incident> {
                let x = nums(v, 6)?;
                Ok(Incident {
                    d: Vec3::new(x[0], x[1], x[2]),
                    p: Vec3::new(x[3], x[4], x[5]),
                })
            };
            let boolean = |v: &str| -> Result<bool> {
                match v {
                    "true" | "yes" | "1" => Ok(true),
                    "false" | "no" | "0" => Ok(false),
                    _ => Err(err(format!("`{key}`: `{v}` is not a boolean"))),
                }
            };

            match key {
                "obstacle" => cfg.obstacle = base.join(value),
                "output" => cfg.output = base.join(value),
                "incident" => cfg.incidents.push(incident(value)?),
                "incidents" if value == "axes" => cfg.incidents.extend(axis_incidents()),
                "wavelength" => cfg.wavelength = num(value)?,
                "location_wavelength" => cfg.location_wavelength = num(value)?,
                "grid_points" => cfg.grid_points = count(value)?,
                "location_grid_points" => cfg.location_grid_points = count(value)?,
                "e_tol" => cfg.thresholds.e_tol = num(value)?,
                "sigma" => cfg.thresholds.sigma = num(value)?,
                "cluster_angle" => cfg.thresholds.cluster_angle = num(value)?.to_radians(),
                "n_c" => cfg.thresholds.n_c = count(value)?,
                "starts" => {
                    let v: Vec<usize> = value.split_whitespace().map(count).collect::<Result<_>>()?;
                    let [n_theta, n_phi] = v[..] else {
                        return Err(err("`starts` needs two counts".into()));
                    };
                    cfg.thresholds.starts = MultiStart { n_theta, n_phi };
                }
                "noise" => delta = num(value)?,
                "seed" => seed = value.parse().map_err(|_| err(format!("`seed`: `{value}` is not an integer")))?,
                "max_iterations" => cfg.fit.max_iterations = count(value)?,
                "initial_offset" => cfg.initial_offset = num(value)?,
                "region" => {
                    let x = nums(value, 6)?;
                    region_bounds = Some((Vec3::new(x[0], x[1], x[2]), Vec3::new(x[3], x[4], x[5])));
                }
                "region_step" => region_step = Some(num(value)?),
                "polarity" => {
                    cfg.polarity = Polarity::parse(value).ok_or_else(|| err(format!("unknown polarity `{value}`")))?
                }
                "location_data" => {
                    cfg.location_source = match value {
                        "oracle" => LocationSource::Oracle,
                        "po" => LocationSource::PhysicalOptics,
                        _ => return Err(err(format!("unknown location data `{value}`"))),
                    }
                }
                "true_location" => {
                    let x = nums(value, 3)?;
                    cfg.true_location = Vec3::new(x[0], x[1], x[2]);
                }
                "location_incident" => cfg.location_incident = Some(incident(value)?),
                "merge_vertices" => cfg.merge_vertices = boolean(value)?.then_some(0.02),
                "merge_threshold" => cfg.merge_vertices = Some(num(value)?),
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
        }

        cfg.noise = NoiseModel::new(delta, seed).map_err(|e| Error::Config(e.to_string()))?;
        if region_bounds.is_some() || region_step.is_some() {
            let (lo, hi) = region_bounds.unwrap_or((*cfg.region.lower(), *cfg.region.upper()));
            let step = region_step.unwrap_or(10.0);
            if !(step > 0.0) {
                return Err(Error::Config(format!("region_step must be positive, got {step}")));
            }
            let cells = [0, 1, 2].map(|i| (((hi[i] - lo[i]) / step).round() as usize).max(1));
            cfg.region = SampleRegion::new(lo, hi, cells).map_err(|e| Error::Config(e.to_string()))?;
        }
        for key in ["obstacle", "output"] {
            if !seen.iter().any(|s| s == key) {
                return Err(Error::Config(format!("`{key}` is required")));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.obstacle.as_os_str().is_empty() || self.output.as_os_str().is_empty() {
            return Err(Error::Config("obstacle and output paths must be nonempty".into()));
        }
        if self.incidents.is_empty() {
            return Err(Error::Config("no incident directions".into()));
        }
        for (i, inc) in self.incidents.iter().chain(&self.location_incident).enumerate() {
            let (dn, pn) = (inc.d.norm(), inc.p.norm());
            if !(dn > 0.0 && pn > 0.0) {
                return Err(Error::Config(format!("incident {i}: zero direction or polarization")));
            }
            if inc.d.dot(&inc.p).abs() > 1e-9 * dn * pn {
                return Err(Error::Config(format!("incident {i}: d and p are not orthogonal")));
            }
        }
        for (name, v) in [
            ("wavelength", self.wavelength),
            ("location_wavelength", self.location_wavelength),
            ("initial_offset", self.initial_offset),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.grid_points < 4 || self.location_grid_points < 4 {
            return Err(Error::Config("grids need at least 4 points".into()));
        }
        if let Some(t) = self.merge_vertices {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::Config(format!("merge threshold must be in (0, 1), got {t}")));
            }
        }
        if self.thresholds.sigma > PI {
            return Err(Error::Config("sigma exceeds pi".into()));
        }
        self.thresholds.validate().map_err(|e| Error::Config(e.to_string()))
    }

    /// Incidence of the location measurement.
    pub fn location_incident(&self) -> Incident {
        self.location_incident.unwrap_or(self.incidents[0])
    }
}
