//! Polytopes from face normals and areas.
//!
//! By Minkowski's theorem, normals spanning R^3 and positive areas with
//! `sum A_j nu_j = 0` determine a convex polytope up to translation. The
//! offsets `alpha` of the planes `x.nu_j = alpha_j` are fitted here by
//! damped least squares on `a_j(alpha) - A_j`, where `a_j` is the area of facet
//! `j` of the half-space intersection.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{halfspace_intersection, HalfspaceIntersection};

type Vec3 = Vector3<f64>;

/// Areas after the balancing projection.
#[derive(Debug, Clone, PartialEq)]
pub struct BalancedAreas {
    pub areas: Vec<f64>,
    /// Indices whose corrected area was not positive and was set to zero.
    pub clamped: Vec<usize>,
}

fn check_lengths(normals: &[Vec3], values: &[f64], what: &str) -> Result<()> {
    if normals.len() != values.len() {
        return Err(Error::InvalidInput(format!(
            "{} normals but {} {what}",
            normals.len(),
            values.len()
        )));
    }
    Ok(())
}

/// `N N^T` for the 3 x k normal matrix `N`.
fn normal_gram(normals: &[Vec3]) -> Matrix3<f64> {
    normals.iter().map(|n| n * n.transpose()).sum()
}

fn pseudo_inverse3(m: &Matrix3<f64>) -> Matrix3<f64> {
    let eig = m.symmetric_eigen();
    let cutoff = 1e-12 * eig.eigenvalues.amax().max(1e-300);
    let mut inv = Matrix3::zeros();
    for i in 0..3 {
        let l = eig.eigenvalues[i];
        if l > cutoff {
            let v = eig.eigenvectors.column(i);
            inv += v * v.transpose() / l;
        }
    }
    inv
}

/// Projects `t = N x` out of `x`, the smallest change making `N x' = 0`
/// (using a pseudo-inverse when the normals only span a plane).
fn remove_normal_moment(normals: &[Vec3], x: &[f64]) -> Vec<f64> {
    let moment: Vec3 = normals.iter().zip(x).map(|(n, a)| n * *a).sum();
    let t = pseudo_inverse3(&normal_gram(normals)) * moment;
    normals.iter().zip(x).map(|(n, a)| a - n.dot(&t)).collect()
}

/// Minimal-norm correction `A' = A - N^T (N N^T)^+ N A`, so that
/// `sum A'_j nu_j = 0`. Non-positive results are clamped to zero and listed.
pub fn balance_areas(normals: &[Vec3], areas: &[f64]) -> Result<BalancedAreas> {
    check_lengths(normals, areas, "areas")?;
    let mut out = remove_normal_moment(normals, areas);
    let mut clamped = Vec::new();
    for (i, a) in out.iter_mut().enumerate() {
        if *a <= 0.0 {
            *a = 0.0;
            clamped.push(i);
        }
    }
    Ok(BalancedAreas { areas: out, clamped })
}

/// Area of the facet cut by each plane, zero where the plane does not touch
/// the intersection.
pub fn facet_areas(normals: &[Vec3], offsets: &[f64]) -> Result<Vec<f64>> {
    check_lengths(normals, offsets, "offsets")?;
    Ok(halfspace_intersection(normals, offsets)?.plane_areas())
}

/// Options of [`fit_offsets`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Stop when the sum of squared residuals drops below this.
    pub residual_tol: f64,
    /// Stop when the relative step drops below this.
    pub step_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            residual_tol: 1e-24,
            step_tol: 1e-13,
        }
    }
}

/// Result of [`fit_offsets`].
#[derive(Debug, Clone, PartialEq)]
pub struct OffsetFit {
    pub normals: Vec<Vec3>,
    pub target_areas: Vec<f64>,
    pub offsets: Vec<f64>,
    /// `sum_j (a_j - A_j)^2` at `offsets`.
    pub residual: f64,
    pub iterations: usize,
    /// False if the iteration cap was hit before a stopping test passed.
    pub converged: bool,
    /// Planes that do not touch the final polytope.
    pub vanished: Vec<usize>,
    /// Residual after every accepted step, starting with the initial guess.
    pub history: Vec<f64>,
    pub lower_bound: f64,
}

impl OffsetFit {
    pub fn polytope(&self) -> Result<HalfspaceIntersection> {
        halfspace_intersection(&self.normals, &self.offsets)
    }
}

/// Residuals `a_j - A_j`. A vanished plane gets the continuation
/// `a_j = -sqrt(A_j) (alpha_j - h_j)` with `h_j` the support value of the
/// current polytope, which is zero at the touching point and pulls `alpha_j`
/// back toward the polytope.
fn residuals(normals: &[Vec3], targets: &[f64], offsets: &[f64]) -> Result<Vec<f64>> {
    let hs = halfspace_intersection(normals, offsets)?;
    let areas = hs.plane_areas();
    let verts = hs.polyhedron.vertices();
    Ok((0..normals.len())
        .map(|j| {
            let a = match hs.facet_of_plane[j] {
                Some(_) => areas[j],
                None => {
                    let support = verts.iter().map(|v| v.dot(&normals[j])).fold(f64::NEG_INFINITY, f64::max);
                    -targets[j].sqrt() * (offsets[j] - support)
                }
            };
            a - targets[j]
        })
        .collect())
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

/// Fits offsets so that the half-space intersection has facet areas `areas`.
///
/// Levenberg-Marquardt with a forward-difference Jacobian (step
/// `1e-5 alpha_j`), only residual-decreasing steps accepted, and the box
/// `alpha_j >= 1e-3 mean(sqrt A)`. Areas do not change when the polytope is
/// translated, which moves `alpha` along `N^T t`. Steps are projected off
/// that subspace so `N alpha` stays at `N alpha_0`.
pub fn fit_offsets(normals: &[Vec3], areas: &[f64], initial: &[f64], options: FitOptions) -> Result<OffsetFit> {
    check_lengths(normals, areas, "areas")?;
    check_lengths(normals, initial, "initial offsets")?;
    let k = normals.len();
    if k < 4 {
        return Err(Error::SpanDeficient);
    }
    let gram = normal_gram(normals);
    let eig = gram.symmetric_eigenvalues();
    if eig.min() <= 1e-10 * eig.max() {
        return Err(Error::SpanDeficient);
    }
    if let Some(i) = areas.iter().position(|a| !(a.is_finite() && *a >= 0.0)) {
        return Err(Error::InvalidInput(format!("area {} of face {i} is not a nonnegative number", areas[i])));
    }
    let mean_sqrt = areas.iter().map(|a| a.sqrt()).sum::<f64>() / k as f64;
    let lower = 1e-3 * mean_sqrt.max(1e-300);
    let clamp = |a: Vec<f64>| -> Vec<f64> { a.into_iter().map(|x| x.max(lower)).collect() };

    let mut alpha = clamp(initial.to_vec());
    let mut r = residuals(normals, areas, &alpha)?;
    let mut cost = sum_sq(&r);
    let mut history = vec![cost];
    let mut mu: Option<f64> = None;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < options.max_iterations {
        if cost <= options.residual_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let columns: Vec<Result<Vec<f64>>> = (0..k)
            .into_par_iter()
            .map(|j| {
                let h = 1e-5 * alpha[j];
                let mut shifted = alpha.clone();
                shifted[j] += h;
                let rj = residuals(normals, areas, &shifted)?;
                Ok(rj.iter().zip(&r).map(|(a, b)| (a - b) / h).collect())
            })
            .collect();
        let mut jac = DMatrix::zeros(k, k);
        for (j, col) in columns.into_iter().enumerate() {
            let col = col?;
            for i in 0..k {
                jac[(i, j)] = col[i];
            }
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let grad = &jt * DVector::from_column_slice(&r);
        let damping = *mu.get_or_insert_with(|| 1e-3 * jtj.diagonal().max().max(1e-300));
        let mut lambda = damping;

        let mut accepted = false;
        for _ in 0..40 {
            let mut system = jtj.clone();
            for i in 0..k {
                system[(i, i)] += lambda;
            }
            let Some(chol) = system.cholesky() else {
                lambda *= 4.0;
                continue;
            };
            let step = chol.solve(&(-&grad));
            let step = remove_normal_moment(normals, step.as_slice());
            let trial = clamp(alpha.iter().zip(&step).map(|(a, s)| a + s).collect());
            let step_norm = trial.iter().zip(&alpha).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let scale = alpha.iter().map(|a| a * a).sum::<f64>().sqrt();
            if step_norm <= options.step_tol * scale {
                converged = true;
                break;
            }
            match residuals(normals, areas, &trial) {
                Ok(tr) if sum_sq(&tr) < cost => {
                    alpha = trial;
                    r = tr;
                    cost = sum_sq(&r);
                    history.push(cost);
                    lambda = (lambda / 3.0).max(1e-300);
                    accepted = true;
                    break;
                }
                _ => lambda *= 4.0,
            }
        }
        mu = Some(lambda);
        if converged || !accepted {
            converged = converged || cost <= options.residual_tol;
            if !accepted && !converged {
                // No descent direction left at this damping range: a
                // stationary point of the piecewise-smooth objective.
                converged = grad.norm() <= 1e-8 * (1.0 + cost.sqrt());
            }
            break;
        }
    }

    let hs = halfspace_intersection(normals, &alpha)?;
    let vanished = hs.vanished();
    Ok(OffsetFit {
        normals: normals.to_vec(),
        target_areas: areas.to_vec(),
        offsets: alpha,
        residual: cost,
        iterations,
        converged,
        vanished,
        history,
        lower_bound: lower,
    })
}
