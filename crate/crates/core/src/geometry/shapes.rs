//! Reference solids used in the experiments.

use nalgebra::Vector3;

use super::ConvexPolyhedron;

type Vec3 = Vector3<f64>;

/// Unit-edge regular tetrahedron centered at the origin, faces ordered
/// `P2P4P3, P1P3P4, P1P4P2, P1P2P3`.
pub fn regular_tetrahedron() -> ConvexPolyhedron {
    let h = 1.0 / 8f64.sqrt();
    let vertices = vec![
        Vec3::new(0.5, 0.0, -h),
        Vec3::new(-0.5, 0.0, -h),
        Vec3::new(0.0, 0.5, h),
        Vec3::new(0.0, -0.5, h),
    ];
    let faces = vec![vec![1, 3, 2], vec![0, 2, 3], vec![0, 3, 1], vec![0, 1, 2]];
    ConvexPolyhedron::new(vertices, faces).expect("valid tetrahedron")
}

/// The cube `[0,1]^3` (vertex `i` has coordinates given by the bits of `i`).
pub fn unit_cube() -> ConvexPolyhedron {
    let vertices = (0..8)
        .map(|i| Vec3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
        .collect();
    let faces = vec![
        vec![0, 4, 6, 2],
        vec![1, 3, 7, 5],
        vec![0, 1, 5, 4],
        vec![2, 6, 7, 3],
        vec![0, 2, 3, 1],
        vec![4, 5, 7, 6],
    ];
    ConvexPolyhedron::new(vertices, faces).expect("valid cube")
}

/// Unit cube centered at the origin.
pub fn centered_cube() -> ConvexPolyhedron {
    unit_cube().translated(&Vec3::new(-0.5, -0.5, -0.5))
}

/// Right prism over a unit equilateral triangle, height 1, centroid at the origin.
pub fn triangular_prism() -> ConvexPolyhedron {
    let r = 1.0 / 3f64.sqrt();
    let base = [
        (0.0, r),
        (-0.5, -0.5 * r),
        (0.5, -0.5 * r),
    ];
    let mut vertices: Vec<Vec3> = base.iter().map(|&(x, y)| Vec3::new(x, y, -0.5)).collect();
    vertices.extend(base.iter().map(|&(x, y)| Vec3::new(x, y, 0.5)));
    let mut faces = vec![vec![0, 2, 1], vec![3, 4, 5]];
    for i in 0..3 {
        let j = (i + 1) % 3;
        faces.push(vec![i, j, j + 3, i + 3]);
    }
    ConvexPolyhedron::new(vertices, faces).expect("valid prism")
}

/// Unit cube with its corners cut at the edge midpoints, rotated 45 degrees
/// about the z axis; centered at the origin.
pub fn cuboctahedron() -> ConvexPolyhedron {
    let (s, c) = std::f64::consts::FRAC_PI_4.sin_cos();
    let mut points = Vec::new();
    for &(a, b) in &[(0.5, 0.5), (0.5, -0.5), (-0.5, 0.5), (-0.5, -0.5)] {
        points.push(Vec3::new(a, b, 0.0));
        points.push(Vec3::new(a, 0.0, b));
        points.push(Vec3::new(0.0, a, b));
    }
    let rotated: Vec<Vec3> = points
        .into_iter()
        .map(|p| Vec3::new(c * p.x - s * p.y, s * p.x + c * p.y, p.z))
        .collect();
    ConvexPolyhedron::from_points(&rotated).expect("valid cuboctahedron")
}
