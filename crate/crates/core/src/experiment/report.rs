use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;

use super::config::ExperimentConfig;
use super::vertex_error;
use crate::error::{Error, Result};
use crate::geometry::{format_obstacle, ConvexPolyhedron};
use crate::locator::Location;
use crate::maxima::{PeakSet, RecoveredFace, RecoveredFaceSet};
use crate::minkowski::{BalancedAreas, OffsetFit};
use crate::sphgrid::HarmonicExpansion;

type Vec3 = Vector3<f64>;

/// Everything a recovery run produced. Later stages are `None` until they
/// have run.
#[derive(Debug, Clone)]
pub struct RecoveryReport {
    pub wavelength: f64,
    pub noise_delta: f64,
    pub seed: u64,
    /// Band-limited fit of each shape measurement.
    pub expansions: Vec<HarmonicExpansion>,
    /// All local maxima per incidence.
    pub peaks: Vec<PeakSet>,
    /// Maxima kept as critical directions.
    pub selected: Vec<PeakSet>,
    /// One face per kept maximum, before clustering.
    pub raw_faces: Vec<RecoveredFace>,
    /// Effective faces after clustering.
    pub faces: RecoveredFaceSet,
    pub balanced: Option<BalancedAreas>,
    pub fit: Option<OffsetFit>,
    /// Recovered body as fitted, before placement.
    pub body: Option<ConvexPolyhedron>,
    /// Recovered body with its centroid moved to the located point.
    pub placed: Option<ConvexPolyhedron>,
    pub location: Option<Location>,
    /// [`vertex_error`] against the obstacle the data came from.
    pub vertex_error: Option<f64>,
    /// Distance from the located point to the true location.
    pub location_error: Option<f64>,
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| Error::io(path, e))
}

pub(super) fn write_location(dir: &Path, location: &Location) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_file(dir, "location.txt", &location.to_text())?;
    write_file(dir, "scan.txt", &location.scan_to_text())
}

impl RecoveryReport {
    pub(super) fn new(
        config: &ExperimentConfig,
        expansions: Vec<HarmonicExpansion>,
        peaks: Vec<PeakSet>,
        selected: Vec<PeakSet>,
        raw_faces: Vec<RecoveredFace>,
        faces: RecoveredFaceSet,
    ) -> Self {
        Self {
            wavelength: config.wavelength,
            noise_delta: config.noise.delta(),
            seed: config.noise.seed(),
            expansions,
            peaks,
            selected,
            raw_faces,
            faces,
            balanced: None,
            fit: None,
            body: None,
            placed: None,
            location: None,
            vertex_error: None,
            location_error: None,
        }
    }

    pub(super) fn set_fit(&mut self, balanced: BalancedAreas, fit: OffsetFit) {
        self.balanced = Some(balanced);
        self.fit = Some(fit);
    }

    pub(super) fn set_body(
        &mut self,
        body: ConvexPolyhedron,
        placed: ConvexPolyhedron,
        location: Location,
        truth: &ConvexPolyhedron,
        true_location: Vec3,
    ) {
        self.vertex_error = Some(vertex_error(&body, truth));
        self.location_error = Some((location.point - true_location).norm());
        self.body = Some(body);
        self.placed = Some(placed);
        self.location = Some(location);
    }

    /// `source_d_index,x,y,z,value,selected` for every maximum found.
    pub fn peaks_csv(&self) -> String {
        let mut out = String::from("source_d_index,x_x,x_y,x_z,value,selected\n");
        for (i, (all, kept)) in self.peaks.iter().zip(&self.selected).enumerate() {
            for p in &all.peaks {
                let sel = kept.peaks.iter().any(|q| q.direction == p.direction);
                let x = p.direction;
                writeln!(out, "{i},{:.6},{:.6},{:.6},{:.6},{}", x.x, x.y, x.z, p.value, sel as u8).unwrap();
            }
        }
        out
    }

    /// `face,measured_area,balanced_area,fitted_area`.
    pub fn areas_csv(&self) -> Option<String> {
        let (balanced, fit) = (self.balanced.as_ref()?, self.fit.as_ref()?);
        let fitted = fit.polytope().ok()?.plane_areas();
        let mut out = String::from("face,measured_area,balanced_area,fitted_area\n");
        for (j, f) in self.faces.entries.iter().enumerate() {
            writeln!(out, "{j},{:.6},{:.6},{:.6}", f.area, balanced.areas[j], fitted[j]).unwrap();
        }
        Some(out)
    }

    /// `face,offset,centroid_offset`; the second column is measured from the
    /// recovered body's centroid.
    pub fn offsets_csv(&self) -> Option<String> {
        let fit = self.fit.as_ref()?;
        let c = fit.polytope().ok()?.polyhedron.centroid();
        let mut out = String::from("face,offset,centroid_offset\n");
        for (j, (n, a)) in fit.normals.iter().zip(&fit.offsets).enumerate() {
            writeln!(out, "{j},{:.6},{:.6}", a, a - n.dot(&c)).unwrap();
        }
        Some(out)
    }

    /// Offsets measured from the recovered body's centroid.
    pub fn centroid_offsets(&self) -> Option<Vec<f64>> {
        let fit = self.fit.as_ref()?;
        let c = fit.polytope().ok()?.polyhedron.centroid();
        Some(fit.normals.iter().zip(&fit.offsets).map(|(n, a)| a - n.dot(&c)).collect())
    }

    /// `vertex,x,y,z` of the placed body.
    pub fn vertices_csv(&self) -> Option<String> {
        let placed = self.placed.as_ref()?;
        let mut out = String::from("vertex,x,y,z\n");
        for (i, v) in placed.vertices().iter().enumerate() {
            writeln!(out, "{i},{:.6},{:.6},{:.6}", v.x, v.y, v.z).unwrap();
        }
        Some(out)
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        writeln!(out, "wavelength = {}", self.wavelength).unwrap();
        writeln!(out, "noise = {}", self.noise_delta).unwrap();
        writeln!(out, "seed = {}", self.seed).unwrap();
        writeln!(out, "raw_faces = {}", self.raw_faces.len()).unwrap();
        writeln!(out, "effective_faces = {}", self.faces.entries.len()).unwrap();
        if let Some(b) = &self.balanced {
            writeln!(out, "clamped_areas = {:?}", b.clamped).unwrap();
        }
        if let Some(f) = &self.fit {
            writeln!(out, "fit_residual = {:.6e}", f.residual).unwrap();
            writeln!(out, "fit_iterations = {}", f.iterations).unwrap();
            writeln!(out, "fit_converged = {}", f.converged).unwrap();
            writeln!(out, "vanished_faces = {:?}", f.vanished).unwrap();
        }
        if let Some(b) = &self.body {
            writeln!(out, "vertices = {}", b.vertices().len()).unwrap();
            writeln!(out, "volume = {:.6}", b.volume()).unwrap();
        }
        if let Some(l) = &self.location {
            let z = l.point;
            writeln!(out, "location = {:.6} {:.6} {:.6}", z.x, z.y, z.z).unwrap();
            writeln!(out, "indicator = {:.6}", l.value).unwrap();
        }
        if let Some(e) = self.vertex_error {
            writeln!(out, "vertex_error = {e:.6}").unwrap();
        }
        if let Some(e) = self.location_error {
            writeln!(out, "location_error = {e:.6}").unwrap();
        }
        out
    }

    pub(super) fn write_faces(&self, dir: &Path) -> Result<()> {
        for (i, e) in self.expansions.iter().enumerate() {
            write_file(dir, &format!("expansion_{i}.txt"), &e.to_text())?;
        }
        write_file(dir, "peaks.csv", &self.peaks_csv())?;
        let raw = RecoveredFaceSet {
            entries: self.raw_faces.clone(),
        };
        write_file(dir, "faces_raw.csv", &raw.to_csv())?;
        write_file(dir, "normals.csv", &self.faces.to_csv())
    }

    pub(super) fn write_fit(&self, dir: &Path) -> Result<()> {
        if let Some(a) = self.areas_csv() {
            write_file(dir, "areas.csv", &a)?;
        }
        if let Some(o) = self.offsets_csv() {
            write_file(dir, "offsets.csv", &o)?;
        }
        Ok(())
    }

    pub(super) fn write_body(&self, dir: &Path) -> Result<()> {
        if let Some(v) = self.vertices_csv() {
            write_file(dir, "vertices.csv", &v)?;
        }
        if let Some(p) = &self.placed {
            write_file(dir, "recovered.obj", &format_obstacle(p))?;
        }
        if let Some(l) = &self.location {
            write_location(dir, l)?;
        }
        write_file(dir, "summary.txt", &self.summary())
    }
}
