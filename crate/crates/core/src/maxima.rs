//! Critical observation directions, face normals and areas from phaseless
//! far-field patterns.
//!
//! A lit face with normal `nu` produces a local maximum of `|E|` near the
//! mirror direction `x = d - 2 (d.nu) nu` with value about `|C| |d.nu| / lambda`.
//! Inverting both relations turns each selected peak into a normal and an area.

use std::fmt::Write as _;

use argmin::core::{CostFunction, Error as ArgminError, Executor, State, TerminationReason, TerminationStatus};
use argmin::solver::neldermead::NelderMead;
use nalgebra::Vector3;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sphgrid::HarmonicExpansion;

type Vec3 = Vector3<f64>;

/// Peaks closer than this are the same peak.
const DEDUP_ANGLE: f64 = 1.0 * std::f64::consts::PI / 180.0;
const MAX_RECENTERS: usize = 40;
const MAX_NM_ITERS: u64 = 400;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub direction: Vec3,
    pub value: f64,
}

/// Counts from a multistart search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchDiagnostics {
    pub starts: usize,
    pub converged: usize,
    pub duplicates: usize,
}

/// Local maxima of one smoothed pattern, sorted by descending value.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakSet {
    pub peaks: Vec<Peak>,
    pub d: Vec3,
    pub wavelength: f64,
    pub diagnostics: SearchDiagnostics,
}

/// Starting points on an `n_theta x n_phi` uniform mesh of `[0, pi] x [0, 2 pi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MultiStart {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for MultiStart {
    fn default() -> Self {
        Self { n_theta: 5, n_phi: 11 }
    }
}

impl MultiStart {
    pub fn points(&self) -> Vec<Vec3> {
        let mut out = Vec::with_capacity(self.n_theta * self.n_phi);
        for i in 0..self.n_theta {
            let theta = if self.n_theta > 1 {
                std::f64::consts::PI * i as f64 / (self.n_theta - 1) as f64
            } else {
                std::f64::consts::FRAC_PI_2
            };
            for j in 0..self.n_phi {
                let phi = if self.n_phi > 1 {
                    2.0 * std::f64::consts::PI * j as f64 / (self.n_phi - 1) as f64
                } else {
                    0.0
                };
                out.push(Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()));
            }
        }
        out
    }
}

/// Knobs of the peak selection and clustering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryThresholds {
    /// Peaks below this value are dropped.
    pub e_tol: f64,
    /// Angular radius (radians) around `d` in which peaks are dropped.
    pub sigma: f64,
    /// Normals closer than this angle (radians) are one face.
    pub cluster_angle: f64,
    /// Band limit of the smoothing expansion.
    pub n_c: usize,
    pub starts: MultiStart,
}

impl Default for RecoveryThresholds {
    fn default() -> Self {
        Self {
            e_tol: 0.5,
            sigma: 0.3,
            cluster_angle: 12f64.to_radians(),
            n_c: 10,
            starts: MultiStart::default(),
        }
    }
}

impl RecoveryThresholds {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v >= 0.0 && v.is_finite();
        if !(ok(self.e_tol) && ok(self.sigma) && ok(self.cluster_angle)) {
            return Err(Error::InvalidInput("thresholds must be finite and nonnegative".into()));
        }
        if self.starts.n_theta == 0 || self.starts.n_phi == 0 {
            return Err(Error::InvalidInput("multistart mesh must be nonempty".into()));
        }
        Ok(())
    }

    /// `E_tol = min |C| min |d.nu| / lambda` from lower bounds on face area
    /// and on the obliquity of lit faces.
    pub fn e_tol_from_priors(min_area: f64, min_obliquity: f64, wavelength: f64) -> f64 {
        min_area * min_obliquity / wavelength
    }
}

/// One face recovered from one peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveredFace {
    pub normal: Vec3,
    pub area: f64,
    pub peak_value: f64,
    /// Index of the incident direction that produced the peak.
    pub source: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RecoveredFaceSet {
    pub entries: Vec<RecoveredFace>,
}

impl RecoveredFaceSet {
    pub fn normals(&self) -> Vec<Vec3> {
        self.entries.iter().map(|e| e.normal).collect()
    }

    pub fn areas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.area).collect()
    }

    /// `source_d_index, nu_x, nu_y, nu_z, peak_value, area`, one row per face.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("source_d_index,nu_x,nu_y,nu_z,peak_value,area\n");
        for e in &self.entries {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                e.source, e.normal.x, e.normal.y, e.normal.z, e.peak_value, e.area
            )
            .unwrap();
        }
        out
    }
}

fn angle(a: &Vec3, b: &Vec3) -> f64 {
    a.dot(b).clamp(-1.0, 1.0).acos()
}

/// `f(x)` in the tangent plane at `center`, negated for minimization.
struct ChartCost<'a> {
    expansion: &'a HarmonicExpansion,
    center: Vec3,
    t1: Vec3,
    t2: Vec3,
}

impl ChartCost<'_> {
    fn point(&self, u: &[f64]) -> Vec3 {
        (self.center + self.t1 * u[0] + self.t2 * u[1]).normalize()
    }
}

impl CostFunction for ChartCost<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, u: &Self::Param) -> std::result::Result<f64, ArgminError> {
        Ok(-self.expansion.eval(&self.point(u)))
    }
}

fn tangent_basis(x: &Vec3) -> (Vec3, Vec3) {
    let helper = if x.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let t1 = x.cross(&helper).normalize();
    (t1, x.cross(&t1))
}

/// Nelder-Mead ascent in a tangent chart, re-centered at the best point until
/// the move drops below `1e-8` radians.
fn ascend(expansion: &HarmonicExpansion, start: Vec3) -> Option<Peak> {
    let mut center = start.normalize();
    let mut size: f64 = 0.05;
    for _ in 0..MAX_RECENTERS {
        let (t1, t2) = tangent_basis(&center);
        let cost = ChartCost {
            expansion,
            center,
            t1,
            t2,
        };
        let simplex = vec![vec![0.0, 0.0], vec![size, 0.0], vec![0.0, size]];
        let solver = NelderMead::new(simplex).with_sd_tolerance(1e-15).ok()?;
        let result = Executor::new(cost, solver)
            .configure(|s| s.max_iters(MAX_NM_ITERS))
            .run()
            .ok()?;
        let state = result.state();
        let best = state.get_best_param()?.clone();
        let converged = matches!(
            state.get_termination_status(),
            TerminationStatus::Terminated(TerminationReason::SolverConverged)
        );
        let next = result.problem.problem.as_ref()?.point(&best);
        let moved = angle(&next, &center);
        center = next;
        if converged && moved < 1e-8 {
            return Some(Peak {
                direction: center,
                value: expansion.eval(&center),
            });
        }
        size = moved.clamp(1e-5, 0.05);
    }
    None
}

/// Ascends `f` from every multistart point and keeps the distinct maxima.
///
/// Points within 1 degree of a higher one are dropped. Starts that do not
/// converge are counted in the diagnostics and otherwise ignored.
pub fn find_local_maxima(expansion: &HarmonicExpansion, d: &Vec3, wavelength: f64, starts: MultiStart) -> PeakSet {
    let points = starts.points();
    let found: Vec<Option<Peak>> = points.par_iter().map(|s| ascend(expansion, *s)).collect();
    let mut converged: Vec<Peak> = found.into_iter().flatten().collect();
    let n_converged = converged.len();
    converged.sort_by(|a, b| b.value.total_cmp(&a.value));
    let mut peaks: Vec<Peak> = Vec::new();
    for p in converged {
        if peaks.iter().all(|q| angle(&q.direction, &p.direction) >= DEDUP_ANGLE) {
            peaks.push(p);
        }
    }
    PeakSet {
        diagnostics: SearchDiagnostics {
            starts: points.len(),
            converged: n_converged,
            duplicates: n_converged - peaks.len(),
        },
        peaks,
        d: d.normalize(),
        wavelength,
    }
}

/// Drops peaks within `sigma` of `d`, below `e_tol`, or whose normal would
/// not face the incoming wave.
pub fn select_critical_directions(peaks: &PeakSet, thresholds: &RecoveryThresholds) -> PeakSet {
    let d = peaks.d;
    let kept = peaks
        .peaks
        .iter()
        .filter(|p| angle(&p.direction, &d) >= thresholds.sigma)
        .filter(|p| p.value >= thresholds.e_tol)
        .filter(|p| cd3(&p.direction, &d).map_or(false, |nu| nu.dot(&d) < 0.0))
        .copied()
        .collect();
    PeakSet {
        peaks: kept,
        ..peaks.clone()
    }
}

fn cd3(x: &Vec3, d: &Vec3) -> Option<Vec3> {
    let c = x.dot(d);
    if c >= 1.0 - 1e-12 {
        return None;
    }
    Some((x - d) / (2.0 * (1.0 - c)).sqrt())
}

/// Normal `nu = (x - d) / sqrt(2 (1 - x.d))` and area `lambda value / |d.nu|`.
pub fn normal_and_area_from_peak(x: &Vec3, value: f64, d: &Vec3, wavelength: f64) -> Result<(Vec3, f64)> {
    let nu = cd3(x, d).ok_or(Error::DegenerateDirection)?;
    let nu = nu.normalize();
    let obliquity = d.dot(&nu).abs();
    if obliquity < 1e-6 {
        return Err(Error::GrazingNormal(obliquity));
    }
    Ok((nu, wavelength * value / obliquity))
}

/// Mirror direction `d - 2 (d.nu) nu` of a face normal.
pub fn critical_direction(nu: &Vec3, d: &Vec3) -> Vec3 {
    d - nu * (2.0 * d.dot(nu))
}

/// Greedy clustering by descending peak value: each entry joins the first
/// representative within `cluster_angle`, otherwise it opens a cluster.
pub fn cluster_effective_normals(entries: &[RecoveredFace], cluster_angle: f64) -> RecoveredFaceSet {
    let mut order: Vec<usize> = (0..entries.len()).collect();
    order.sort_by(|&a, &b| entries[b].peak_value.total_cmp(&entries[a].peak_value));
    let mut reps: Vec<RecoveredFace> = Vec::new();
    for i in order {
        let e = entries[i];
        if reps.iter().all(|r| angle(&r.normal, &e.normal) >= cluster_angle) {
            reps.push(e);
        }
    }
    RecoveredFaceSet { entries: reps }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use super::*;
    use crate::forward::{sample_phaseless, PlaneWave};
    use crate::geometry::shapes::regular_tetrahedron;
    use crate::sphgrid::{sht_forward, SphericalGrid, DEFAULT_GRID_POINTS};

    fn unimodal_expansion() -> HarmonicExpansion {
        let grid = SphericalGrid::fibonacci(DEFAULT_GRID_POINTS).unwrap();
        let values: Vec<f64> = grid.points().iter().map(|x| (10.0 * x.z).exp() / (10f64).exp()).collect();
        sht_forward(&grid, &values, 10).unwrap()
    }

    fn face(nu: [f64; 3], value: f64) -> RecoveredFace {
        RecoveredFace {
            normal: Vec3::from(nu).normalize(),
            area: 1.0,
            peak_value: value,
            source: 0,
        }
    }

    #[test]
    fn unimodal_function_has_one_maximum() {
        let e = unimodal_expansion();
        let peaks = find_local_maxima(&e, &Vec3::x(), 0.5, MultiStart::default());
        let top = peaks.peaks[0];
        assert!(angle(&top.direction, &Vec3::z()) < 1f64.to_radians());
        assert!(peaks.peaks.iter().skip(1).all(|p| p.value < 0.2 * top.value));
        for p in &peaks.peaks {
            assert_abs_diff_eq!(p.direction.norm(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(p.value, e.eval(&p.direction), epsilon = 1e-12);
        }
        assert!(peaks.peaks.windows(2).all(|w| w[0].value >= w[1].value));
    }

    #[test]
    fn constant_function_gives_flat_points_removed_by_threshold() {
        let mut coeffs = vec![0.0; 121];
        coeffs[0] = 1.0;
        let e = HarmonicExpansion::new(10, coeffs).unwrap();
        let peaks = find_local_maxima(&e, &Vec3::x(), 0.5, MultiStart::default());
        assert!(!peaks.peaks.is_empty());
        let v0 = peaks.peaks[0].value;
        assert!(peaks.peaks.iter().all(|p| (p.value - v0).abs() < 1e-12));
        let strict = RecoveryThresholds {
            e_tol: v0 + 1e-9,
            ..Default::default()
        };
        assert!(select_critical_directions(&peaks, &strict).peaks.is_empty());
    }

    #[test]
    fn tetrahedron_pattern_has_two_major_peaks() {
        let grid = Arc::new(SphericalGrid::fibonacci(DEFAULT_GRID_POINTS).unwrap());
        let wave = PlaneWave::from_wavelength(Vec3::x(), Vec3::z(), 0.5).unwrap();
        let samples = sample_phaseless(&regular_tetrahedron(), &wave, grid.clone());
        let e = sht_forward(&grid, samples.moduli().unwrap(), 10).unwrap();
        let peaks = find_local_maxima(&e, wave.d(), 0.5, MultiStart::default());
        let major: Vec<&Peak> = peaks.peaks.iter().filter(|p| p.value > 0.5).collect();
        assert_eq!(major.len(), 2, "{:?}", peaks.peaks);
        let critical = Vec3::new(-1.0 / 3.0, 0.0, 2.0 * 2f64.sqrt() / 3.0);
        let near = |a: &Vec3| major.iter().any(|p| angle(&p.direction, a) < 10f64.to_radians());
        assert!(near(wave.d()) && near(&critical));

        let selected = select_critical_directions(&peaks, &RecoveryThresholds::default());
        assert_eq!(selected.peaks.len(), 1);
        assert!(angle(&selected.peaks[0].direction, &critical) < 10f64.to_radians());
        assert_eq!(select_critical_directions(&selected, &RecoveryThresholds::default()), selected);
    }

    #[test]
    fn selection_edge_cases() {
        let empty = PeakSet {
            peaks: vec![],
            d: Vec3::x(),
            wavelength: 0.5,
            diagnostics: SearchDiagnostics::default(),
        };
        assert!(select_critical_directions(&empty, &RecoveryThresholds::default()).peaks.is_empty());
        let at_d = PeakSet {
            peaks: vec![Peak {
                direction: Vec3::x(),
                value: 10.0,
            }],
            ..empty
        };
        let tiny_sigma = RecoveryThresholds {
            sigma: 1e-9,
            e_tol: 0.0,
            ..Default::default()
        };
        assert!(select_critical_directions(&at_d, &tiny_sigma).peaks.is_empty());
    }

    #[test]
    fn normal_and_area_examples() {
        let x = Vec3::new(-1.0 / 3.0, 0.0, 2.0 * 2f64.sqrt() / 3.0);
        let (nu, _) = normal_and_area_from_peak(&x, 1.0, &Vec3::x(), 0.5).unwrap();
        assert_abs_diff_eq!(nu, Vec3::new(-(2.0f64 / 3.0).sqrt(), 0.0, 1.0 / 3f64.sqrt()), epsilon = 1e-12);

        // a peak whose normal has |d.nu| = 0.85
        let nu = Vec3::new(-0.85, 0.0, (1.0f64 - 0.85 * 0.85).sqrt());
        let x = critical_direction(&nu, &Vec3::x());
        let (_, area) = normal_and_area_from_peak(&x, 0.80, &Vec3::x(), 0.5).unwrap();
        assert_abs_diff_eq!(area, 0.5 * 0.80 / 0.85, epsilon = 1e-12);

        assert!(matches!(
            normal_and_area_from_peak(&Vec3::x(), 1.0, &Vec3::x(), 0.5),
            Err(Error::DegenerateDirection)
        ));
        let grazing = critical_direction(&Vec3::y(), &Vec3::x());
        // x = d exactly for a grazing normal, so this is degenerate as well
        assert!(normal_and_area_from_peak(&grazing, 1.0, &Vec3::x(), 0.5).is_err());
        let nearly = Vec3::new(-1e-8, 1.0, 0.0).normalize();
        let x = critical_direction(&nearly, &Vec3::x());
        assert!(matches!(
            normal_and_area_from_peak(&x, 1.0, &Vec3::x(), 0.5),
            Err(Error::GrazingNormal(_)) | Err(Error::DegenerateDirection)
        ));
        let (nu, _) = normal_and_area_from_peak(&-Vec3::x(), 1.0, &Vec3::x(), 0.5).unwrap();
        assert_abs_diff_eq!(nu, -Vec3::x(), epsilon = 1e-12);
    }

    #[test]
    fn paper_normal_table_clusters_to_four_faces() {
        let rows = [
            ([-0.85, 0.00, 0.53], 0.80),
            ([0.85, 0.00, 0.53], 0.80),
            ([0.00, -0.85, -0.53], 0.80),
            ([0.00, 0.85, -0.53], 0.80),
            ([0.00, 0.75, -0.66], 0.63),
            ([0.00, -0.75, -0.66], 0.63),
            ([-0.82, 0.00, 0.57], 0.59),
            ([0.82, 0.00, 0.57], 0.59),
        ];
        let entries: Vec<RecoveredFace> = rows.iter().map(|&(n, v)| face(n, v)).collect();
        let set = cluster_effective_normals(&entries, RecoveryThresholds::default().cluster_angle);
        assert_eq!(set.entries.len(), 4);
        assert!(set.entries.iter().all(|e| e.peak_value == 0.80));
        // rows 4 and 5 are 9.4 degrees apart, so a 5 degree radius splits them
        assert_eq!(cluster_effective_normals(&entries, 5f64.to_radians()).entries.len(), 6);
    }

    #[test]
    fn cluster_trivial_cases() {
        let single = [face([0.0, 0.0, 1.0], 0.7)];
        assert_eq!(cluster_effective_normals(&single, 0.1).entries, single.to_vec());
        let t = 0.1f64.to_radians();
        let pair = [face([0.0, 0.0, 1.0], 0.9), face([t.sin(), 0.0, t.cos()], 1.0)];
        let set = cluster_effective_normals(&pair, 5f64.to_radians());
        assert_eq!(set.entries.len(), 1);
        assert_eq!(set.entries[0].peak_value, 1.0);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let set = RecoveredFaceSet {
            entries: vec![RecoveredFace {
                normal: Vec3::new(0.0, 0.0, -1.0),
                area: 0.25,
                peak_value: 0.5,
                source: 3,
            }],
        };
        assert_eq!(set.to_csv(), "source_d_index,nu_x,nu_y,nu_z,peak_value,area\n3,0,0,-1,0.5,0.25\n");
    }

    #[test]
    fn multistart_mesh_matches_shape() {
        let pts = MultiStart::default().points();
        assert_eq!(pts.len(), 55);
        assert_abs_diff_eq!(pts[0], Vec3::z(), epsilon = 1e-12);
        assert_abs_diff_eq!(pts[54].z, -1.0, epsilon = 1e-12);
        assert!(RecoveryThresholds {
            sigma: -1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert_abs_diff_eq!(RecoveryThresholds::e_tol_from_priors(0.4, 0.6, 0.5), 0.48, epsilon = 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn mirror_then_cd3_is_identity(
            a in 0.0f64..PI, b in 0.0f64..(2.0 * PI), c in 0.0f64..PI, e in 0.0f64..(2.0 * PI)
        ) {
            let d = Vec3::new(a.sin() * b.cos(), a.sin() * b.sin(), a.cos());
            let mut nu = Vec3::new(c.sin() * e.cos(), c.sin() * e.sin(), c.cos());
            if nu.dot(&d) > 0.0 { nu = -nu; }
            prop_assume!(nu.dot(&d) < -1e-3);
            let x = critical_direction(&nu, &d);
            let (back, _) = normal_and_area_from_peak(&x, 1.0, &d, 1.0).unwrap();
            prop_assert!((back - nu).norm() < 1e-12);
        }
    }
}
