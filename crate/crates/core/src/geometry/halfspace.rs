//! Intersection of inward half-spaces `{x : nu_j . x <= alpha_j}` through the
//! dual transform: each plane maps to the dual point `nu_j / alpha_j`, the hull
//! of the dual points is computed, and every dual hull facet `n . y = c` maps
//! back to the primal vertex `n / c`.

use nalgebra::{Matrix3, Vector3};

use super::hull::convex_hull;
use super::polyhedron::{order_ccw, ConvexPolyhedron, MIN_FACE_AREA, SHAPE_TOL};
use crate::error::{Error, Result};

type Vec3 = Vector3<f64>;

#[derive(Debug, Clone)]
pub struct HalfspaceIntersection {
    pub polyhedron: ConvexPolyhedron,
    /// For each input plane, the index of its facet in `polyhedron`, or `None`
    /// when the plane does not support the body.
    pub facet_of_plane: Vec<Option<usize>>,
}

impl HalfspaceIntersection {
    /// Facet area per input plane, zero for vanished planes.
    pub fn plane_areas(&self) -> Vec<f64> {
        self.facet_of_plane
            .iter()
            .map(|f| f.map_or(0.0, |f| self.polyhedron.faces()[f].area))
            .collect()
    }

    pub fn vanished(&self) -> Vec<usize> {
        self.facet_of_plane
            .iter()
            .enumerate()
            .filter(|(_, f)| f.is_none())
            .map(|(j, _)| j)
            .collect()
    }
}

pub fn halfspace_intersection(normals: &[Vec3], offsets: &[f64]) -> Result<HalfspaceIntersection> {
    if normals.len() != offsets.len() {
        return Err(Error::InvalidInput(format!(
            "{} normals but {} offsets",
            normals.len(),
            offsets.len()
        )));
    }
    if normals.len() < 4 {
        return Err(Error::Unbounded);
    }
    if let Some((index, &offset)) = offsets.iter().enumerate().find(|(_, &a)| !(a > 0.0)) {
        return Err(Error::EmptyInterior { index, offset });
    }
    let normals: Vec<Vec3> = normals
        .iter()
        .map(|n| {
            let len = n.norm();
            if len > 0.0 && len.is_finite() {
                Ok(n / len)
            } else {
                Err(Error::InvalidInput("zero or non-finite normal".into()))
            }
        })
        .collect::<Result<_>>()?;

    let dual: Vec<Vec3> = normals.iter().zip(offsets).map(|(n, a)| n / *a).collect();
    let tris = convex_hull(&dual).map_err(|_| Error::Unbounded)?;

    let dual_scale = dual.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let mut vertices: Vec<Vec3> = Vec::with_capacity(tris.len());
    for t in &tris {
        let (a, b, c) = (dual[t[0]], dual[t[1]], dual[t[2]]);
        let n = (b - a).cross(&(c - a)).normalize();
        let support = n.dot(&a);
        if support <= 1e-12 * dual_scale {
            return Err(Error::Unbounded);
        }
        // Solving the three primal planes is more accurate than n / support
        // when the dual triangle is thin.
        let m = Matrix3::from_rows(&[
            normals[t[0]].transpose(),
            normals[t[1]].transpose(),
            normals[t[2]].transpose(),
        ]);
        let rhs = Vec3::new(offsets[t[0]], offsets[t[1]], offsets[t[2]]);
        let v = m
            .lu()
            .solve(&rhs)
            .filter(|v| v.iter().all(|x| x.is_finite()))
            .unwrap_or(n / support);
        vertices.push(v);
    }

    let scale = vertices.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let tol = SHAPE_TOL * scale;
    let mut unique: Vec<Vec3> = Vec::new();
    let mut index_of_tri = Vec::with_capacity(vertices.len());
    for v in vertices {
        let i = match unique.iter().position(|u| (u - v).norm() <= tol) {
            Some(i) => i,
            None => {
                unique.push(v);
                unique.len() - 1
            }
        };
        index_of_tri.push(i);
    }

    // Each plane's face is made of the vertices of the dual triangles that
    // touch its dual point, which keeps the surface closed even when
    // several planes nearly meet in one point.
    let mut around: Vec<Vec<usize>> = vec![Vec::new(); normals.len()];
    for (t, &vi) in tris.iter().zip(&index_of_tri) {
        for &j in t {
            if !around[j].contains(&vi) {
                around[j].push(vi);
            }
        }
    }

    let mut faces: Vec<Vec<usize>> = Vec::new();
    let mut facet_of_plane = Vec::with_capacity(normals.len());
    for (j, mut on) in around.into_iter().enumerate() {
        if on.len() < 3 {
            facet_of_plane.push(None);
            continue;
        }
        order_ccw(&unique, &mut on, &normals[j]);
        let area = super::polyhedron::fan_area_vector(&unique, &on).norm();
        if area < MIN_FACE_AREA {
            facet_of_plane.push(None);
            continue;
        }
        facet_of_plane.push(Some(faces.len()));
        faces.push(on);
    }

    let polyhedron = ConvexPolyhedron::new(unique, faces)?;
    Ok(HalfspaceIntersection {
        polyhedron,
        facet_of_plane,
    })
}
