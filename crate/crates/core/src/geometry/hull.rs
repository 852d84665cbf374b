//! Incremental 3-D convex hull (quickhull with outside sets).
//!
//! Used twice: to triangulate sphere sampling grids and to build the dual hull
//! behind the half-space intersection. Points that lie on or within `eps` of
//! the current hull are treated as interior and never become hull vertices.

use std::collections::HashMap;

use nalgebra::Vector3;

use crate::error::{Error, Result};

type Vec3 = Vector3<f64>;

struct HullFace {
    v: [usize; 3],
    normal: Vec3,
    offset: f64,
    outside: Vec<usize>,
    alive: bool,
}

impl HullFace {
    fn distance(&self, p: &Vec3) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

fn make_face(points: &[Vec3], v: [usize; 3], fallback: Option<Vec3>) -> HullFace {
    let (a, b, c) = (points[v[0]], points[v[1]], points[v[2]]);
    let raw = (b - a).cross(&(c - a));
    let norm = raw.norm();
    let normal = if norm > 0.0 {
        raw / norm
    } else {
        fallback.unwrap_or_else(Vec3::z)
    };
    HullFace {
        v,
        normal,
        offset: normal.dot(&a),
        outside: Vec::new(),
        alive: true,
    }
}

/// Outward-oriented (counterclockwise seen from outside) hull triangles,
/// as index triples into `points`.
pub fn convex_hull(points: &[Vec3]) -> Result<Vec<[usize; 3]>> {
    if points.len() < 4 {
        return Err(Error::DegeneratePointSet);
    }
    let scale = points
        .iter()
        .map(|p| p.amax())
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let eps = 1e-12 * scale;

    let simplex = initial_simplex(points, eps)?;
    let mut faces: Vec<HullFace> = Vec::new();
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();

    let interior = simplex.iter().map(|&i| points[i]).sum::<Vec3>() / 4.0;
    for skip in 0..4 {
        let mut tri: Vec<usize> = (0..4).filter(|&i| i != skip).map(|i| simplex[i]).collect();
        let mut face = make_face(points, [tri[0], tri[1], tri[2]], None);
        if face.distance(&interior) > 0.0 {
            tri.swap(1, 2);
            face = make_face(points, [tri[0], tri[1], tri[2]], None);
        }
        push_face(&mut faces, &mut edges, face);
    }

    for (i, p) in points.iter().enumerate() {
        if simplex.contains(&i) {
            continue;
        }
        assign_point(&mut faces, 0..4, i, p, eps);
    }

    let mut pending: Vec<usize> = (0..faces.len()).filter(|&f| !faces[f].outside.is_empty()).collect();
    while let Some(fi) = pending.pop() {
        if !faces[fi].alive || faces[fi].outside.is_empty() {
            continue;
        }
        let apex = *faces[fi]
            .outside
            .iter()
            .max_by(|&&a, &&b| {
                faces[fi]
                    .distance(&points[a])
                    .total_cmp(&faces[fi].distance(&points[b]))
            })
            .expect("non-empty outside set");
        let p = points[apex];

        // Flood the visible region and collect its boundary (the horizon).
        let mut state: HashMap<usize, bool> = HashMap::new();
        state.insert(fi, true);
        let mut stack = vec![fi];
        let mut visible = Vec::new();
        let mut horizon: Vec<(usize, usize, Vec3)> = Vec::new();
        while let Some(f) = stack.pop() {
            visible.push(f);
            let v = faces[f].v;
            for k in 0..3 {
                let (a, b) = (v[k], v[(k + 1) % 3]);
                let nb = edges[&(b, a)];
                let is_visible = match state.get(&nb) {
                    Some(&known) => known,
                    None => {
                        let vis = faces[nb].distance(&p) > eps;
                        state.insert(nb, vis);
                        if vis {
                            stack.push(nb);
                        }
                        vis
                    }
                };
                if !is_visible {
                    horizon.push((a, b, faces[f].normal));
                }
            }
        }

        let mut orphans = Vec::new();
        for &f in &visible {
            faces[f].alive = false;
            let v = faces[f].v;
            for k in 0..3 {
                edges.remove(&(v[k], v[(k + 1) % 3]));
            }
            orphans.append(&mut faces[f].outside);
        }

        let first_new = faces.len();
        for &(a, b, fallback) in &horizon {
            let face = make_face(points, [a, b, apex], Some(fallback));
            push_face(&mut faces, &mut edges, face);
        }
        let new_faces = first_new..faces.len();
        for q in orphans {
            if q != apex {
                assign_point(&mut faces, new_faces.clone(), q, &points[q], eps);
            }
        }
        pending.extend(new_faces.filter(|&f| !faces[f].outside.is_empty()));
    }

    Ok(faces.into_iter().filter(|f| f.alive).map(|f| f.v).collect())
}

fn push_face(faces: &mut Vec<HullFace>, edges: &mut HashMap<(usize, usize), usize>, face: HullFace) {
    let id = faces.len();
    for k in 0..3 {
        edges.insert((face.v[k], face.v[(k + 1) % 3]), id);
    }
    faces.push(face);
}

fn assign_point(
    faces: &mut [HullFace],
    candidates: std::ops::Range<usize>,
    index: usize,
    p: &Vec3,
    eps: f64,
) {
    let mut best: Option<(usize, f64)> = None;
    for f in candidates {
        if !faces[f].alive {
            continue;
        }
        let d = faces[f].distance(p);
        if d > eps && best.map_or(true, |(_, bd)| d > bd) {
            best = Some((f, d));
        }
    }
    if let Some((f, _)) = best {
        faces[f].outside.push(index);
    }
}

fn initial_simplex(points: &[Vec3], eps: f64) -> Result<[usize; 4]> {
    let mut extremes = Vec::with_capacity(6);
    for axis in 0..3 {
        let (mut lo, mut hi) = (0, 0);
        for (i, p) in points.iter().enumerate() {
            if p[axis] < points[lo][axis] {
                lo = i;
            }
            if p[axis] > points[hi][axis] {
                hi = i;
            }
        }
        extremes.push(lo);
        extremes.push(hi);
    }
    let (mut i0, mut i1, mut best) = (0, 0, -1.0);
    for &a in &extremes {
        for &b in &extremes {
            let d = (points[a] - points[b]).norm_squared();
            if d > best {
                (i0, i1, best) = (a, b, d);
            }
        }
    }
    if best.sqrt() <= eps {
        return Err(Error::DegeneratePointSet);
    }

    let dir = (points[i1] - points[i0]).normalize();
    let (i2, line_dist) = points
        .iter()
        .enumerate()
        .map(|(i, p)| (i, (p - points[i0]).cross(&dir).norm()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty");
    if line_dist <= eps {
        return Err(Error::DegeneratePointSet);
    }

    let normal = (points[i1] - points[i0])
        .cross(&(points[i2] - points[i0]))
        .normalize();
    let (i3, plane_dist) = points
        .iter()
        .enumerate()
        .map(|(i, p)| (i, normal.dot(&(p - points[i0])).abs()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty");
    if plane_dist <= eps {
        return Err(Error::DegeneratePointSet);
    }
    Ok([i0, i1, i2, i3])
}
