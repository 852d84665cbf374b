use std::fs;

use tempfile::TempDir;

use super::*;
use crate::forward::NoiseModel;
use crate::geometry::{shapes, write_obstacle};

fn setup(shape: &ConvexPolyhedron) -> (TempDir, ExperimentConfig) {
    let dir = TempDir::new().unwrap();
    let obj = dir.path().join("body.obj");
    write_obstacle(&obj, shape).unwrap();
    let cfg = ExperimentConfig::new(obj, dir.path().join("out"), axis_incidents());
    (dir, cfg)
}

fn angle_deg(a: &Vec3, b: &Vec3) -> f64 {
    a.normalize().dot(&b.normalize()).clamp(-1.0, 1.0).acos().to_degrees()
}

const REPORT_FILES: [&str; 9] = [
    "peaks.csv",
    "faces_raw.csv",
    "normals.csv",
    "areas.csv",
    "offsets.csv",
    "vertices.csv",
    "recovered.obj",
    "location.txt",
    "summary.txt",
];

#[test]
fn synthesis_writes_one_file_per_incidence() {
    let (_dir, mut cfg) = setup(&shapes::regular_tetrahedron());
    cfg.grid_points = 500;
    cfg.noise = NoiseModel::new(1.0, 3).unwrap();
    let data = synthesize_dataset(&cfg).unwrap();
    assert_eq!(data.shape.len(), 6);
    let dir = data_dir(&cfg);
    let first: Vec<Vec<u8>> = (0..6).map(|i| fs::read(shape_file(&dir, i)).unwrap()).collect();
    assert!(location_file(&dir).exists());
    synthesize_dataset(&cfg).unwrap();
    for (i, bytes) in first.iter().enumerate() {
        assert_eq!(&fs::read(shape_file(&dir, i)).unwrap(), bytes);
    }
    assert_ne!(first[0], first[1]);
}

#[test]
fn empty_incident_table_is_rejected() {
    let (_dir, mut cfg) = setup(&shapes::regular_tetrahedron());
    cfg.incidents.clear();
    assert!(matches!(synthesize_dataset(&cfg), Err(Error::Config(_))));
}

#[test]
fn stale_data_is_not_reused() {
    let (_dir, mut cfg) = setup(&shapes::regular_tetrahedron());
    cfg.grid_points = 500;
    synthesize_dataset(&cfg).unwrap();
    cfg.wavelength = 0.3;
    assert!(matches!(load_dataset(&cfg), Err(Error::Config(_))));
}

#[test]
fn tetrahedron_end_to_end() {
    let truth = shapes::regular_tetrahedron();
    let (_dir, cfg) = setup(&truth);
    let report = run_pipeline(&cfg).unwrap();

    assert_eq!(report.faces.entries.len(), 4);
    // Physical-optics peaks sit a few degrees off the specular directions,
    // which tilts every recovered normal by about 3.5 degrees.
    for f in truth.faces() {
        let best = report
            .faces
            .normals()
            .iter()
            .map(|n| angle_deg(n, &f.normal))
            .fold(f64::INFINITY, f64::min);
        assert!(best < 4.0, "normal error {best}");
    }
    for a in report.faces.areas() {
        assert!((a - 0.4330).abs() < 0.15 * 0.4330, "area {a}");
    }
    for a in report.centroid_offsets().unwrap() {
        assert!((a - 0.2041).abs() < 0.1 * 0.2041, "offset {a}");
    }
    let z = report.location.as_ref().unwrap().point;
    assert!((z - Vec3::repeat(50.0)).amax() < 1e-2);
    assert!(report.vertex_error.unwrap() <= 0.07);
    let placed = report.placed.as_ref().unwrap();
    assert!((placed.centroid() - z).norm() < 1e-9);
    for name in REPORT_FILES {
        assert!(cfg.output.join(name).exists(), "{name}");
    }
}

#[test]
fn presynthesized_data_gives_the_same_report() {
    let (_a, one_shot) = setup(&shapes::regular_tetrahedron());
    let (_b, staged) = setup(&shapes::regular_tetrahedron());
    run_pipeline(&one_shot).unwrap();
    synthesize_dataset(&staged).unwrap();
    run_pipeline(&staged).unwrap();
    for name in REPORT_FILES {
        assert_eq!(
            fs::read(one_shot.output.join(name)).unwrap(),
            fs::read(staged.output.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn failing_stage_is_named_and_earlier_tables_kept() {
    let (_dir, mut cfg) = setup(&shapes::regular_tetrahedron());
    // Two opposite incidences light only two faces each.
    cfg.incidents.truncate(2);
    cfg.location_grid_points = 200;
    let err = run_pipeline(&cfg).unwrap_err();
    assert!(matches!(err, Error::Stage { stage: "fit", .. }), "{err}");
    assert!(cfg.output.join("normals.csv").exists());
    assert!(!cfg.output.join("vertices.csv").exists());
}

#[test]
fn location_step_alone() {
    let (_dir, mut cfg) = setup(&shapes::regular_tetrahedron());
    cfg.grid_points = 200;
    cfg.true_location = Vec3::new(20.0, 70.0, 40.0);
    let loc = run_location(&cfg).unwrap();
    assert!((loc.point - cfg.true_location).amax() < 1e-2);
    let text = fs::read_to_string(cfg.output.join("location.txt")).unwrap();
    assert_eq!(text.split_whitespace().count(), 4);
    assert_eq!(fs::read_to_string(cfg.output.join("scan.txt")).unwrap().lines().count(), 1331);
}

#[test]
fn vertex_error_ignores_translation() {
    let t = shapes::unit_cube();
    assert!(vertex_error(&t.translated(&Vec3::new(3.0, -1.0, 2.0)), &t) < 1e-14);
    let bigger = ConvexPolyhedron::from_points(&t.vertices().iter().map(|v| v * 1.1).collect::<Vec<_>>()).unwrap();
    let e = vertex_error(&bigger, &t);
    assert!((e - 0.1 * (3f64.sqrt() / 2.0)).abs() < 1e-12, "{e}");
}

#[test]
fn merging_collapses_split_vertices() {
    let cube = shapes::centered_cube();
    let mut pts: Vec<Vec3> = cube.vertices().to_vec();
    // Split one corner into three points a hair apart.
    let c = pts[0];
    pts[0] = c * 0.995;
    pts.push(c * 0.995 + Vec3::new(0.004, 0.0, 0.0).component_mul(&c.map(f64::signum)));
    pts.push(c * 0.995 + Vec3::new(0.0, 0.004, 0.0).component_mul(&c.map(f64::signum)));
    let split = ConvexPolyhedron::from_points(&pts).unwrap();
    assert!(split.vertices().len() > 8);
    let merged = merge_close_vertices(&split, 0.02).unwrap();
    assert_eq!(merged.vertices().len(), 8);
}
