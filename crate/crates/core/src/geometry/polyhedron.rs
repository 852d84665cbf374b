use nalgebra::Vector3;

use crate::error::{Error, Result};

type Vec3 = Vector3<f64>;

/// Relative tolerance for planarity and convexity checks, scaled by the diameter.
pub const SHAPE_TOL: f64 = 1e-9;
/// Faces with less area than this are rejected as degenerate.
pub const MIN_FACE_AREA: f64 = 1e-12;

/// One planar face of a [`ConvexPolyhedron`].
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    /// Vertex indices, counterclockwise seen from outside.
    pub vertices: Vec<usize>,
    /// Outward unit normal.
    pub normal: Vec3,
    pub area: f64,
    /// Signed distance of the face plane from the origin: `normal . x = offset`.
    pub offset: f64,
    pub perimeter: f64,
}

/// A validated convex polyhedron with per-face normals, areas and offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolyhedron {
    vertices: Vec<Vec3>,
    faces: Vec<Face>,
    diameter: f64,
}

impl ConvexPolyhedron {
    /// Builds and validates a polyhedron from vertices and counterclockwise
    /// (seen from outside) vertex cycles.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<Vec<usize>>) -> Result<Self> {
        if vertices.len() < 4 {
            return Err(Error::InvalidInput(format!(
                "a polyhedron needs at least 4 vertices, got {}",
                vertices.len()
            )));
        }
        if faces.len() < 4 {
            return Err(Error::InvalidInput(format!(
                "a polyhedron needs at least 4 faces, got {}",
                faces.len()
            )));
        }
        for (f, cycle) in faces.iter().enumerate() {
            if cycle.len() < 3 {
                return Err(Error::InvalidInput(format!("face {f} has fewer than 3 vertices")));
            }
            if let Some(&bad) = cycle.iter().find(|&&i| i >= vertices.len()) {
                return Err(Error::InvalidInput(format!(
                    "face {f} references vertex {bad}, only {} exist",
                    vertices.len()
                )));
            }
        }

        let diameter = diameter(&vertices);
        let tol = SHAPE_TOL * diameter;

        let mut built = Vec::with_capacity(faces.len());
        for (f, cycle) in faces.into_iter().enumerate() {
            let area_vec = fan_area_vector(&vertices, &cycle);
            let area = area_vec.norm();
            if area < MIN_FACE_AREA {
                return Err(Error::DegenerateFace { face: f, area });
            }
            let normal = area_vec / area;
            let offset = normal.dot(&vertices[cycle[0]]);
            for &v in &cycle {
                let distance = (normal.dot(&vertices[v]) - offset).abs();
                if distance > tol {
                    return Err(Error::NonPlanarFace {
                        face: f,
                        vertex: v,
                        distance,
                    });
                }
            }
            let perimeter = (0..cycle.len())
                .map(|i| (vertices[cycle[(i + 1) % cycle.len()]] - vertices[cycle[i]]).norm())
                .sum();
            built.push(Face {
                vertices: cycle,
                normal,
                area,
                offset,
                perimeter,
            });
        }

        for (f, face) in built.iter().enumerate() {
            for (v, x) in vertices.iter().enumerate() {
                let distance = face.normal.dot(x) - face.offset;
                if distance > tol {
                    return Err(Error::NotConvex {
                        face: f,
                        vertex: v,
                        distance,
                    });
                }
            }
        }

        let total: f64 = built.iter().map(|f| f.area).sum();
        let imbalance = built.iter().map(|f| f.normal * f.area).sum::<Vec3>().norm();
        if imbalance > SHAPE_TOL * total {
            return Err(Error::OpenSurface { imbalance });
        }

        Ok(Self {
            vertices,
            faces: built,
            diameter,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Vertex positions of face `f`, in cycle order.
    pub fn face_points(&self, f: usize) -> Vec<Vec3> {
        self.faces[f].vertices.iter().map(|&i| self.vertices[i]).collect()
    }

    pub fn surface_area(&self) -> f64 {
        self.faces.iter().map(|f| f.area).sum()
    }

    /// Volume by the divergence theorem, `sum(l_j |C_j|) / 3`.
    ///
    /// The signed offsets make this valid wherever the origin sits.
    pub fn volume(&self) -> f64 {
        self.faces.iter().map(|f| f.offset * f.area).sum::<f64>() / 3.0
    }

    /// Volume from a tetrahedral decomposition about the first vertex.
    pub fn volume_by_tetrahedra(&self) -> f64 {
        self.tetrahedra().map(|(v, _)| v).sum()
    }

    /// Center of mass of the solid body.
    pub fn centroid(&self) -> Vec3 {
        let (vol, moment) = self
            .tetrahedra()
            .fold((0.0, Vec3::zeros()), |(v, m), (tv, tc)| (v + tv, m + tc * tv));
        moment / vol
    }

    fn tetrahedra(&self) -> impl Iterator<Item = (f64, Vec3)> + '_ {
        let apex = self.vertices[0];
        self.faces.iter().flat_map(move |face| {
            let a = self.vertices[face.vertices[0]];
            face.vertices.windows(2).skip(1).map(move |w| {
                let (b, c) = (self.vertices[w[0]], self.vertices[w[1]]);
                let vol = (a - apex).dot(&(b - apex).cross(&(c - apex))) / 6.0;
                (vol, (apex + a + b + c) / 4.0)
            })
        })
    }

    pub fn translated(&self, shift: &Vec3) -> Self {
        let vertices = self.vertices.iter().map(|v| v + shift).collect();
        let faces = self
            .faces
            .iter()
            .map(|f| Face {
                offset: f.offset + f.normal.dot(shift),
                ..f.clone()
            })
            .collect();
        Self {
            vertices,
            faces,
            diameter: self.diameter,
        }
    }
}

pub(crate) fn fan_area_vector(vertices: &[Vec3], cycle: &[usize]) -> Vec3 {
    let a = vertices[cycle[0]];
    cycle
        .windows(2)
        .skip(1)
        .map(|w| (vertices[w[0]] - a).cross(&(vertices[w[1]] - a)))
        .sum::<Vec3>()
        * 0.5
}

fn diameter(vertices: &[Vec3]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in vertices.iter().enumerate() {
        for b in &vertices[i + 1..] {
            d = d.max((a - b).norm());
        }
    }
    d
}

/// Builds a polyhedron; see [`ConvexPolyhedron::new`].
pub fn build_polyhedron(vertices: Vec<Vec3>, faces: Vec<Vec<usize>>) -> Result<ConvexPolyhedron> {
    ConvexPolyhedron::new(vertices, faces)
}

/// Sorts `indices` counterclockwise about `normal` (seen from the tip of `normal`).
pub(crate) fn order_ccw(points: &[Vec3], indices: &mut [usize], normal: &Vec3) {
    let center = indices.iter().map(|&i| points[i]).sum::<Vec3>() / indices.len() as f64;
    let seed = if normal.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let u = normal.cross(&seed).normalize();
    let v = normal.cross(&u);
    indices.sort_by(|&a, &b| {
        let pa = points[a] - center;
        let pb = points[b] - center;
        pa.dot(&v).atan2(pa.dot(&u)).total_cmp(&pb.dot(&v).atan2(pb.dot(&u)))
    });
}

impl ConvexPolyhedron {
    /// Convex hull of a point cloud, with coplanar hull triangles merged into
    /// polygonal faces. Points strictly inside the hull are dropped.
    pub fn from_points(points: &[Vec3]) -> Result<Self> {
        let tris = super::hull::convex_hull(points)?;
        let tol = SHAPE_TOL * diameter(points).max(f64::MIN_POSITIVE);

        let mut used: Vec<usize> = tris.iter().flatten().copied().collect();
        used.sort_unstable();
        used.dedup();
        let vertices: Vec<Vec3> = used.iter().map(|&i| points[i]).collect();

        // Merge only triangles whose corners sit well inside the validation
        // tolerance, so merged faces always pass the planarity check.
        let merge_tol = 0.1 * tol;
        let mut planes: Vec<(Vec3, f64)> = Vec::new();
        for t in &tris {
            let (a, b, c) = (points[t[0]], points[t[1]], points[t[2]]);
            let n = (b - a).cross(&(c - a)).normalize();
            let off = n.dot(&a);
            let known = planes.iter().any(|(pn, po)| {
                pn.dot(&n) > 0.0 && [a, b, c].iter().all(|x| (pn.dot(x) - po).abs() <= merge_tol)
            });
            if !known {
                planes.push((n, off));
            }
        }

        let mut faces = Vec::with_capacity(planes.len());
        for (n, off) in planes {
            let mut on: Vec<usize> = (0..vertices.len())
                .filter(|&i| (n.dot(&vertices[i]) - off).abs() <= merge_tol)
                .collect();
            order_ccw(&vertices, &mut on, &n);
            faces.push(on);
        }
        ConvexPolyhedron::new(vertices, faces)
    }
}
