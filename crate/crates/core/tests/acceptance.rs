//! Acceptance run. Every criterion is measured at its stated tolerance and
//! reported as one PASS or FAIL line. The process exits with failure only
//! when ACCEPTANCE_STRICT is set, so the numbers stay visible in ordinary
//! test runs.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::Vector3;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polyrecon::experiment::{axis_incidents, run_pipeline, vertex_error, ExperimentConfig, RecoveryReport};
use polyrecon::forward::{
    adaptive_polygon_integral, cnorm, po_far_field, polygon_fourier_integral, NoiseModel, PlaneWave,
};
use polyrecon::geometry::{shapes, write_obstacle, ConvexPolyhedron};
use polyrecon::locator::{degree_one_oracle, locate, Polarity, SampleRegion};
use polyrecon::maxima::{critical_direction, normal_and_area_from_peak};
use polyrecon::minkowski::{balance_areas, fit_offsets, FitOptions};
use polyrecon::sphgrid::{
    scalar_harmonics, sht_forward, synthesize, HarmonicExpansion, SphericalGrid, DEFAULT_GRID_POINTS,
    DEFAULT_LOCATION_GRID_POINTS,
};

type Vec3 = Vector3<f64>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_unit(rng: &mut impl Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

fn angle_deg(a: &Vec3, b: &Vec3) -> f64 {
    a.normalize().dot(&b.normalize()).clamp(-1.0, 1.0).acos().to_degrees()
}

/// Local maximum of `|E|` near `start`, by compass search in a tangent
/// chart with step halving down to 1e-9 rad.
fn po_peak(poly: &ConvexPolyhedron, wave: &PlaneWave, start: &Vec3) -> (Vec3, f64) {
    let f = |x: &Vec3| cnorm(&po_far_field(poly, wave, x).0);
    let mut x = start.normalize();
    let mut value = f(&x);
    let mut step = 2f64.to_radians();
    while step > 1e-9 {
        let helper = if x.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        let u = x.cross(&helper).normalize();
        let v = x.cross(&u);
        let mut moved = false;
        for dir in [u, -u, v, -v] {
            let trial = (x * step.cos() + dir * step.sin()).normalize();
            let t = f(&trial);
            if t > value {
                x = trial;
                value = t;
                moved = true;
                break;
            }
        }
        if !moved {
            step /= 2.0;
        }
    }
    (x, value)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let normal = random_unit(&mut rng);
        let helper = if normal.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        let u = normal.cross(&helper).normalize();
        let v = normal.cross(&u);
        let center = Vec3::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        let n = rng.gen_range(3..=7);
        let mut angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        angles.sort_by(f64::total_cmp);
        let (a, b) = (rng.gen_range(0.3..1.0), rng.gen_range(0.3..1.0));
        let points: Vec<Vec3> = angles.iter().map(|t| center + u * (a * t.cos()) + v * (b * t.sin())).collect();
        let q = random_unit(&mut rng) * rng.gen_range(0.0..50.0);
        let closed = polygon_fourier_integral(&points, &normal, &q).unwrap();
        let oracle: Complex64 = adaptive_polygon_integral(&points, &q, 1e-10);
        worst = worst.max((closed - oracle).norm() / oracle.norm());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-6 && secs <= 10.0,
        format!("max relative error {worst:.2e} (<= 1e-6), {secs:.2} s (<= 10 s)"),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut worst_area: f64 = 0.0;
    let mut trials = 0;
    while trials < 10_000 {
        let (nu, d) = (random_unit(&mut rng), random_unit(&mut rng));
        if nu.dot(&d) >= 0.0 {
            continue;
        }
        trials += 1;
        let area = rng.gen_range(0.1..2.0);
        let lambda = 0.5;
        let x = critical_direction(&nu, &d);
        let (back, a) = normal_and_area_from_peak(&x, area * d.dot(&nu).abs() / lambda, &d, lambda).unwrap();
        worst = worst.max((back - nu).norm());
        worst_area = worst_area.max((a - area).abs() / area);
    }
    // Normal incidence: the peak is the backscatter direction.
    let d = Vec3::new(0.0, 0.0, 1.0);
    let (back, _) = normal_and_area_from_peak(&-d, 1.0, &d, 0.5).unwrap();
    worst = worst.max((back + d).norm());
    outcome(
        worst <= 1e-12,
        format!("max normal round-trip error {worst:.2e} over 1e4 trials (<= 1e-12); area relative error {worst_area:.1e}"),
    )
}

fn criterion_3() -> Outcome {
    let tet = shapes::regular_tetrahedron();
    let target = Vec3::new(-1.0 / 3.0, 0.0, 2.0 * 2f64.sqrt() / 3.0);
    let mut pass = true;
    let mut parts = Vec::new();
    for (lambda, expected) in [(0.5, 0.7071), (0.3, 1.1785)] {
        let wave = PlaneWave::from_wavelength(Vec3::x(), Vec3::z(), lambda).unwrap();
        let (x, value) = po_peak(&tet, &wave, &target);
        let off = angle_deg(&x, &target);
        let rel = (value - expected).abs() / expected;
        pass &= off <= 2.0 && rel <= 0.1;
        parts.push(format!(
            "lambda {lambda}: offset {off:.2} deg (<= 2), value {value:.4} vs {expected} ({:.1}% <= 10%)",
            100.0 * rel
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_4() -> Outcome {
    let bodies = [("tetrahedron", shapes::regular_tetrahedron()), ("cube", shapes::centered_cube())];
    let lambda = 0.5;
    let mut pass = true;
    let mut worst_off: f64 = 0.0;
    let mut worst_rel: f64 = 0.0;
    let mut failures = Vec::new();
    for (name, body) in &bodies {
        for (i, inc) in axis_incidents().iter().enumerate() {
            let wave = PlaneWave::from_wavelength(inc.d, inc.p, lambda).unwrap();
            let expected: f64 = body
                .faces()
                .iter()
                .filter(|f| f.normal.dot(&inc.d) < 0.0)
                .map(|f| f.area * f.normal.dot(&inc.d).abs() / lambda)
                .sum();
            let (x, value) = po_peak(body, &wave, &inc.d);
            let off = angle_deg(&x, &inc.d);
            let rel = (value - expected).abs() / expected;
            worst_off = worst_off.max(off);
            worst_rel = worst_rel.max(rel);
            if off > 2.0 || rel > 0.1 {
                pass = false;
                failures.push(format!("{name} d{}: {off:.2} deg, {:.1}%", i + 1, 100.0 * rel));
            }
        }
    }
    let mut detail = format!(
        "worst offset {worst_off:.2} deg (<= 2), worst value error {:.1}% (<= 10%)",
        100.0 * worst_rel
    );
    if !failures.is_empty() {
        detail.push_str(&format!("; failing: {}", failures.join(", ")));
    }
    outcome(pass, detail)
}

fn criterion_5() -> Outcome {
    let grid = SphericalGrid::fibonacci(DEFAULT_GRID_POINTS).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let coeffs: Vec<f64> = (0..36).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let truth = HarmonicExpansion::new(5, coeffs).unwrap();
    let values = synthesize(&truth, &grid);
    let back = synthesize(&sht_forward(&grid, &values, 5).unwrap(), &grid);
    let sup = values.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let count = 121;
    let rows: Vec<Vec<f64>> = grid.points().iter().map(|x| scalar_harmonics(10, x)).collect();
    let mut gram_err: f64 = 0.0;
    for i in 0..count {
        for j in i..count {
            let g: f64 = rows.iter().zip(grid.weights()).map(|(r, w)| w * r[i] * r[j]).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            gram_err = gram_err.max((g - target).abs());
        }
    }
    outcome(
        sup <= 1e-2 && gram_err <= 1e-3,
        format!("round-trip sup error {sup:.2e} (<= 1e-2), Gram deviation {gram_err:.2e} (<= 1e-3)"),
    )
}

fn criterion_6(report: &RecoveryReport) -> Outcome {
    let truth = shapes::regular_tetrahedron();
    let normals = report.faces.normals();
    let areas = report.faces.areas();
    let worst_angle = normals
        .iter()
        .map(|n| truth.faces().iter().map(|f| angle_deg(n, &f.normal)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let worst_area = areas.iter().map(|a| (a - 0.4330).abs() / 0.4330).fold(0.0, f64::max);
    let matched = truth.faces().iter().all(|f| normals.iter().any(|n| angle_deg(n, &f.normal) <= 3.0));
    outcome(
        normals.len() == 4 && matched && worst_angle <= 3.0 && worst_area <= 0.15,
        format!(
            "{} normals (4), worst normal error {worst_angle:.2} deg (<= 3), worst area error {:.1}% (<= 15%)",
            normals.len(),
            100.0 * worst_area
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut worst_offset: f64 = 0.0;
    let mut worst_vertex: f64 = 0.0;
    for body in [shapes::centered_cube(), shapes::regular_tetrahedron(), shapes::triangular_prism()] {
        let body = body.translated(&-body.centroid());
        let normals: Vec<Vec3> = body.faces().iter().map(|f| f.normal).collect();
        let areas: Vec<f64> = body.faces().iter().map(|f| f.area).collect();
        let fit = fit_offsets(&normals, &areas, &vec![1.0; normals.len()], FitOptions::default()).unwrap();
        let rebuilt = fit.polytope().unwrap().polyhedron;
        let c = rebuilt.centroid();
        for (f, (n, a)) in body.faces().iter().zip(fit.normals.iter().zip(&fit.offsets)) {
            worst_offset = worst_offset.max((a - n.dot(&c) - f.offset).abs());
        }
        worst_vertex = worst_vertex.max(vertex_error(&rebuilt, &body));
    }

    let (s, c) = (0.85, 0.53);
    let normals: Vec<Vec3> = [[-s, 0.0, c], [s, 0.0, c], [0.0, -s, -c], [0.0, s, -c]]
        .iter()
        .map(|v| Vec3::from(*v).normalize())
        .collect();
    let balanced = balance_areas(&normals, &[0.47; 4]).unwrap();
    let fit = fit_offsets(&normals, &balanced.areas, &[1.0; 4], FitOptions::default()).unwrap();
    let paper_offsets = fit.offsets.iter().map(|a| (a - 0.21).abs()).fold(0.0, f64::max);
    let table = [
        Vec3::new(0.5, 0.0, -0.4),
        Vec3::new(-0.5, 0.0, -0.4),
        Vec3::new(0.0, 0.5, 0.4),
        Vec3::new(0.0, -0.5, 0.4),
    ];
    let rebuilt = fit.polytope().unwrap().polyhedron;
    let paper_vertices = rebuilt
        .vertices()
        .iter()
        .map(|v| table.iter().map(|t| (v - t).norm()).fold(f64::INFINITY, f64::min))
        .chain(
            table
                .iter()
                .map(|t| rebuilt.vertices().iter().map(|v| (v - t).norm()).fold(f64::INFINITY, f64::min)),
        )
        .fold(0.0, f64::max);
    outcome(
        worst_offset <= 1e-6 && worst_vertex <= 1e-6 && paper_offsets <= 0.01 && paper_vertices <= 0.06,
        format!(
            "exact data: offsets {worst_offset:.1e}, vertices {worst_vertex:.1e} (<= 1e-6); \
             noisy table: offsets off 0.21 by {paper_offsets:.4} (<= 0.01), vertices {paper_vertices:.4} (<= 0.06)"
        ),
    )
}

fn tetra_config(dir: &Path, wavelength: f64, delta: f64) -> ExperimentConfig {
    let obj = dir.join("tetrahedron.obj");
    write_obstacle(&obj, &shapes::regular_tetrahedron()).unwrap();
    let mut cfg = ExperimentConfig::new(obj, dir.join(format!("out_{wavelength}_{delta}")), axis_incidents());
    cfg.wavelength = wavelength;
    cfg.noise = NoiseModel::new(delta, 1).unwrap();
    cfg
}

fn criterion_8(coarse: &RecoveryReport, fine: &RecoveryReport, secs: f64) -> Outcome {
    let (e5, e3) = (coarse.vertex_error.unwrap(), fine.vertex_error.unwrap());
    outcome(
        e5 <= 0.07 && e3 < e5 && secs <= 300.0,
        format!("vertex error {e5:.4} at 0.5 (<= 0.07), {e3:.4} at 0.3 (< {e5:.4}), {secs:.1} s (<= 300 s)"),
    )
}

fn criterion_9(clean: &RecoveryReport, noisy: &RecoveryReport) -> Outcome {
    let (e0, e1) = (clean.vertex_error.unwrap(), noisy.vertex_error.unwrap());
    outcome(
        e1 <= 2.0 * e0,
        format!("vertex error {e1:.4} with noise vs {e0:.4} without (<= {:.4})", 2.0 * e0),
    )
}

fn criterion_10() -> Outcome {
    let grid = Arc::new(SphericalGrid::fibonacci(DEFAULT_LOCATION_GRID_POINTS).unwrap());
    let wave = PlaneWave::from_wavelength(Vec3::x(), Vec3::z(), 50.0).unwrap();
    let z0 = Vec3::repeat(50.0);
    let samples = degree_one_oracle(&wave, grid, &z0).unwrap();
    let region = SampleRegion::cube(0.0, 100.0, 10.0).unwrap();
    let loc = locate(&samples, &region, Polarity::Maximize).unwrap();
    let err = (loc.point - z0).amax();
    let (lo, hi) = loc
        .scan
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, v)| (lo.min(*v), hi.max(*v)));
    let (lo, hi) = (lo.min(loc.value), hi.max(loc.value));
    outcome(
        err <= 1e-2 && lo >= 0.0 && hi <= 1.02,
        format!(
            "located ({:.4}, {:.4}, {:.4}), error {err:.1e} (<= 1e-2); indicator in [{lo:.4}, {hi:.4}] (within [0, 1.02])",
            loc.point.x, loc.point.y, loc.point.z
        ),
    )
}

fn criterion_11() -> Outcome {
    let files = [
        "peaks.csv",
        "faces_raw.csv",
        "normals.csv",
        "areas.csv",
        "offsets.csv",
        "vertices.csv",
        "recovered.obj",
        "location.txt",
        "scan.txt",
        "summary.txt",
        "data/shape_0.ff",
        "data/location.ff",
    ];
    let mut runs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::TempDir::new().unwrap();
        write_obstacle(dir.path().join("tetrahedron.obj"), &shapes::regular_tetrahedron()).unwrap();
        std::fs::write(
            dir.path().join("run.conf"),
            "obstacle = tetrahedron.obj\noutput = out\nincidents = axes\nwavelength = 0.3\nnoise = 1\nseed = 11\n",
        )
        .unwrap();
        let status = Command::new(env!("CARGO_BIN_EXE_polyrecon"))
            .arg("recover")
            .arg(dir.path().join("run.conf"))
            .output()
            .unwrap();
        if !status.status.success() {
            return outcome(false, format!("recover failed: {}", String::from_utf8_lossy(&status.stderr)));
        }
        let bytes: Vec<Vec<u8>> = files
            .iter()
            .map(|f| std::fs::read(dir.path().join("out").join(f)).unwrap_or_default())
            .collect();
        runs.push(bytes);
    }
    let differing: Vec<&str> = files
        .iter()
        .zip(runs[0].iter().zip(&runs[1]))
        .filter(|(_, (a, b))| a != b || a.is_empty())
        .map(|(f, _)| *f)
        .collect();
    outcome(
        differing.is_empty(),
        if differing.is_empty() {
            format!("{} report and data files byte-identical across two runs", files.len())
        } else {
            format!("differing or missing: {}", differing.join(", "))
        },
    )
}

fn main() {
    let dir = tempfile::TempDir::new().unwrap();
    let start = Instant::now();
    let coarse = run_pipeline(&tetra_config(dir.path(), 0.5, 0.0)).unwrap();
    let coarse_secs = start.elapsed().as_secs_f64();
    let fine = run_pipeline(&tetra_config(dir.path(), 0.3, 0.0)).unwrap();
    let noisy = run_pipeline(&tetra_config(dir.path(), 0.3, 1.0));

    let results: Vec<(&str, Outcome)> = vec![
        ("polygon integral vs quadrature", criterion_1()),
        ("critical-direction inversion round trip", criterion_2()),
        ("tetrahedron peak law", criterion_3()),
        ("incident-direction maximum", criterion_4()),
        ("harmonic transform round trip and Gram matrix", criterion_5()),
        ("effective normals of the tetrahedron", criterion_6(&coarse)),
        ("Minkowski reconstruction", criterion_7()),
        ("end-to-end vertex accuracy", criterion_8(&coarse, &fine, coarse_secs)),
        (
            "noise robustness",
            match &noisy {
                Ok(r) => criterion_9(&fine, r),
                Err(e) => outcome(false, format!("noisy run failed: {e}")),
            },
        ),
        ("location from the degree-1 oracle", criterion_10()),
        ("deterministic reports", criterion_11()),
    ];

    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {} ({})",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            name,
            o.detail
        );
    }
    println!("acceptance: {} passed, {} failed", results.len() - failed, failed);
    if failed > 0 && std::env::var_os("ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
