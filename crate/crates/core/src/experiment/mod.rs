//! Batch experiments: synthesize far-field data for an obstacle, then run the
//! three recovery steps and write every intermediate table.

mod config;
mod report;

#[cfg(test)]
mod tests;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::Vector3;
use rayon::prelude::*;

pub use config::{axis_incidents, ExperimentConfig, Incident, LocationSource};
pub use report::RecoveryReport;

use crate::error::{Error, Result, StageExt};
use crate::forward::{
    add_noise, read_far_field, sample_far_field, sample_phaseless, write_far_field, FarFieldKind, FarFieldSamples,
    PlaneWave,
};
use crate::geometry::{read_obstacle, ConvexPolyhedron};
use crate::locator::{degree_one_oracle, locate, Location};
use crate::maxima::{
    cluster_effective_normals, find_local_maxima, normal_and_area_from_peak, select_critical_directions, PeakSet,
    RecoveredFace,
};
use crate::minkowski::{balance_areas, fit_offsets};
use crate::sphgrid::{HarmonicExpansion, HarmonicTable, SphericalGrid};

type Vec3 = Vector3<f64>;

/// Far-field data of one experiment.
#[derive(Debug, Clone)]
pub struct Dataset {
    /// One modulus field per shape incidence, in config order.
    pub shape: Vec<FarFieldSamples>,
    /// Complex-E field for the location step.
    pub location: FarFieldSamples,
}

pub fn data_dir(config: &ExperimentConfig) -> PathBuf {
    config.output.join("data")
}

fn shape_file(dir: &Path, i: usize) -> PathBuf {
    dir.join(format!("shape_{i}.ff"))
}

fn location_file(dir: &Path) -> PathBuf {
    dir.join("location.ff")
}

/// Noise seed of incidence `i`, so every direction gets its own stream.
fn noise_for(config: &ExperimentConfig, i: usize) -> Result<crate::forward::NoiseModel> {
    crate::forward::NoiseModel::new(config.noise.delta(), config.noise.seed().wrapping_add(i as u64))
}

/// Synthesizes the shape data without writing anything.
pub fn synthesize_shape_data(config: &ExperimentConfig, obstacle: &ConvexPolyhedron) -> Result<Vec<FarFieldSamples>> {
    let grid = Arc::new(SphericalGrid::fibonacci(config.grid_points)?);
    config
        .incidents
        .par_iter()
        .enumerate()
        .map(|(i, inc)| {
            let wave = PlaneWave::from_wavelength(inc.d, inc.p, config.wavelength)?;
            let clean = sample_phaseless(obstacle, &wave, grid.clone());
            add_noise(&clean, &noise_for(config, i)?)
        })
        .collect()
}

/// Synthesizes the complex far field of the location step.
pub fn synthesize_location_data(config: &ExperimentConfig, obstacle: &ConvexPolyhedron) -> Result<FarFieldSamples> {
    let grid = Arc::new(SphericalGrid::fibonacci(config.location_grid_points)?);
    let inc = config.location_incident();
    let wave = PlaneWave::from_wavelength(inc.d, inc.p, config.location_wavelength)?;
    match config.location_source {
        LocationSource::Oracle => degree_one_oracle(&wave, grid, &config.true_location),
        LocationSource::PhysicalOptics => {
            let placed = obstacle.translated(&(config.true_location - obstacle.centroid()));
            sample_far_field(&placed, &wave, grid, FarFieldKind::ComplexE)
        }
    }
}

/// Synthesizes all far fields and writes them under `<output>/data`.
pub fn synthesize_dataset(config: &ExperimentConfig) -> Result<Dataset> {
    config.validate()?;
    let obstacle = read_obstacle(&config.obstacle)?;
    let shape = synthesize_shape_data(config, &obstacle)?;
    let location = synthesize_location_data(config, &obstacle)?;
    let dir = data_dir(config);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    for (i, s) in shape.iter().enumerate() {
        write_far_field(shape_file(&dir, i), s)?;
    }
    write_far_field(location_file(&dir), &location)?;
    Ok(Dataset { shape, location })
}

fn same_wave(samples: &FarFieldSamples, inc: &Incident, wavelength: f64, points: usize) -> bool {
    let w = samples.wave();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + b.abs());
    samples.len() == points
        && close(w.wavelength(), wavelength)
        && (w.d() - inc.d.normalize()).amax() <= 1e-12
        && w.p().cross(&inc.p.normalize()).amax() <= 1e-9
}

/// Reads the dataset written by [`synthesize_dataset`], or returns `None`
/// when any file is missing. Files that do not match the config are an
/// error rather than silently reused.
pub fn load_dataset(config: &ExperimentConfig) -> Result<Option<Dataset>> {
    let dir = data_dir(config);
    let files: Vec<PathBuf> = (0..config.incidents.len())
        .map(|i| shape_file(&dir, i))
        .chain([location_file(&dir)])
        .collect();
    if !files.iter().all(|f| f.exists()) {
        return Ok(None);
    }
    let mut shape = Vec::with_capacity(config.incidents.len());
    for (i, inc) in config.incidents.iter().enumerate() {
        let s = read_far_field(&files[i])?;
        if s.kind() != FarFieldKind::Modulus || !same_wave(&s, inc, config.wavelength, config.grid_points) {
            return Err(Error::Config(format!(
                "{} does not match the config; rerun synth",
                files[i].display()
            )));
        }
        shape.push(s);
    }
    let location = read_far_field(location_file(&dir))?;
    if location.kind() != FarFieldKind::ComplexE
        || !same_wave(
            &location,
            &config.location_incident(),
            config.location_wavelength,
            config.location_grid_points,
        )
    {
        return Err(Error::Config(format!(
            "{} does not match the config; rerun synth",
            location_file(&dir).display()
        )));
    }
    Ok(Some(Dataset { shape, location }))
}

fn load_or_synthesize(config: &ExperimentConfig) -> Result<Dataset> {
    match load_dataset(config)? {
        Some(d) => Ok(d),
        None => synthesize_dataset(config),
    }
}

/// Largest distance from a vertex of either body to the nearest vertex of
/// the other, after moving both centroids to the origin.
pub fn vertex_error(recovered: &ConvexPolyhedron, truth: &ConvexPolyhedron) -> f64 {
    let a: Vec<Vec3> = recovered.vertices().iter().map(|v| v - recovered.centroid()).collect();
    let b: Vec<Vec3> = truth.vertices().iter().map(|v| v - truth.centroid()).collect();
    let one_way = |x: &[Vec3], y: &[Vec3]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(&a, &b).max(one_way(&b, &a))
}

/// Replaces groups of vertices closer than `fraction * diameter` by their
/// mean and rebuilds the hull.
pub fn merge_close_vertices(poly: &ConvexPolyhedron, fraction: f64) -> Result<ConvexPolyhedron> {
    let radius = fraction * poly.diameter();
    let mut groups: Vec<Vec<Vec3>> = Vec::new();
    for v in poly.vertices() {
        match groups.iter_mut().find(|g| (g[0] - v).norm() < radius) {
            Some(g) => g.push(*v),
            None => groups.push(vec![*v]),
        }
    }
    let points: Vec<Vec3> = groups
        .iter()
        .map(|g| g.iter().sum::<Vec3>() / g.len() as f64)
        .collect();
    ConvexPolyhedron::from_points(&points)
}

/// Peaks, then faces, of one shape measurement.
fn recover_faces(
    samples: &FarFieldSamples,
    table: &HarmonicTable,
    config: &ExperimentConfig,
    source: usize,
) -> Result<(HarmonicExpansion, PeakSet, PeakSet, Vec<RecoveredFace>)> {
    let wave = samples.wave();
    let expansion = table
        .forward(samples.grid(), &samples.modulus_values())
        .stage("expansion")?;
    let peaks = find_local_maxima(&expansion, wave.d(), wave.wavelength(), config.thresholds.starts);
    let selected = select_critical_directions(&peaks, &config.thresholds);
    let faces = selected
        .peaks
        .iter()
        .map(|p| {
            let (normal, area) = normal_and_area_from_peak(&p.direction, p.value, wave.d(), wave.wavelength())?;
            Ok(RecoveredFace {
                normal,
                area,
                peak_value: p.value,
                source,
            })
        })
        .collect::<Result<Vec<_>>>()
        .stage("areas")?;
    Ok((expansion, peaks, selected, faces))
}

/// Location step alone: loads or synthesizes the location data, scans the
/// region and writes `location.txt` and `scan.txt`.
pub fn run_location(config: &ExperimentConfig) -> Result<Location> {
    config.validate()?;
    let data = load_or_synthesize(config).stage("data")?;
    let location = locate(&data.location, &config.region, config.polarity).stage("locate")?;
    report::write_location(&config.output, &location).stage("write")?;
    Ok(location)
}

/// Runs the full recovery, reusing `<output>/data` when present and
/// synthesizing it otherwise. Tables are written as soon as their stage
/// finishes, so a failing stage leaves the earlier ones on disk.
pub fn run_pipeline(config: &ExperimentConfig) -> Result<RecoveryReport> {
    config.validate()?;
    let truth = read_obstacle(&config.obstacle).stage("data")?;
    let data = load_or_synthesize(config).stage("data")?;
    std::fs::create_dir_all(&config.output)
        .map_err(|e| Error::io(&config.output, e))
        .stage("write")?;

    let grid = data.shape[0].grid().clone();
    if data.shape.iter().any(|s| s.grid().points() != grid.points()) {
        return Err(Error::InvalidInput("shape measurements use different grids".into())).stage("data");
    }
    let table = HarmonicTable::new(&grid, config.thresholds.n_c);
    let per_direction = data
        .shape
        .par_iter()
        .enumerate()
        .map(|(i, s)| recover_faces(s, &table, config, i))
        .collect::<Result<Vec<_>>>()?;

    let mut expansions = Vec::new();
    let mut peaks = Vec::new();
    let mut selected = Vec::new();
    let mut raw_faces = Vec::new();
    for (e, p, s, f) in per_direction {
        expansions.push(e);
        peaks.push(p);
        selected.push(s);
        raw_faces.extend(f);
    }
    let faces = cluster_effective_normals(&raw_faces, config.thresholds.cluster_angle);
    let mut report = RecoveryReport::new(config, expansions, peaks, selected, raw_faces, faces);
    report.write_faces(&config.output).stage("write")?;

    let normals = report.faces.normals();
    let balanced = balance_areas(&normals, &report.faces.areas()).stage("balance")?;
    let initial = vec![config.initial_offset; normals.len()];
    let fit = fit_offsets(&normals, &balanced.areas, &initial, config.fit).stage("fit")?;
    let body = fit.polytope().stage("polytope")?.polyhedron;
    let body = match config.merge_vertices {
        Some(t) => merge_close_vertices(&body, t).stage("merge")?,
        None => body,
    };
    report.set_fit(balanced, fit);
    report.write_fit(&config.output).stage("write")?;

    let location = locate(&data.location, &config.region, config.polarity).stage("locate")?;
    let placed = body.translated(&(location.point - body.centroid()));
    report.set_body(body, placed, location, &truth, config.true_location);
    report.write_body(&config.output).stage("write")?;
    Ok(report)
}
