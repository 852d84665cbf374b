//! Oscillatory integrals `int_C exp(i q.y) ds` over planar polygons.

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::MIN_FACE_AREA;

type Vec3 = Vector3<f64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Below this argument `sin(x)/x` is taken from its series.
const SINC_SERIES_BELOW: f64 = 1e-6;

fn sinc(x: f64) -> f64 {
    if x.abs() < SINC_SERIES_BELOW {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Closed-form `int_C exp(i q.y) ds` over the planar polygon `points` with
/// unit normal `normal` (vertices counterclockwise seen from the normal side).
///
/// The normal component of `q` contributes a constant phase on the plane. The
/// in-plane part `a` is handled by the divergence theorem, giving one
/// analytic term per edge:
///
/// ```text
/// I = -i/|a|^2 sum_e (q.(e x nu)) exp(i q.m_e) sinc(q.e / 2)
/// ```
///
/// with `e` the edge vector and `m_e` its midpoint. When `|a| R < 1`
/// (`R` the polygon radius) the edge sum cancels badly and a Taylor series
/// about the centroid is summed instead.
pub fn polygon_fourier_integral(points: &[Vec3], normal: &Vec3, q: &Vec3) -> Result<Complex64> {
    if points.len() < 3 {
        return Err(Error::DegenerateFace { face: 0, area: 0.0 });
    }
    let area = fan_area(points, normal);
    if !(area > MIN_FACE_AREA) {
        return Err(Error::DegenerateFace { face: 0, area });
    }
    Ok(polygon_integral_unchecked(points, normal, q))
}

fn fan_area(points: &[Vec3], normal: &Vec3) -> f64 {
    let mut s = Vec3::zeros();
    for i in 0..points.len() {
        s += points[i].cross(&points[(i + 1) % points.len()]);
    }
    0.5 * s.dot(normal)
}

pub(crate) fn polygon_integral_unchecked(points: &[Vec3], normal: &Vec3, q: &Vec3) -> Complex64 {
    let centroid = points.iter().sum::<Vec3>() / points.len() as f64;
    let radius = points.iter().map(|p| (p - centroid).norm()).fold(0.0, f64::max);
    let qt = q - normal * q.dot(normal);
    let qt2 = qt.norm_squared();
    if qt2.sqrt() * radius < 1.0 {
        return taylor_integral(points, &centroid, q, &qt);
    }

    let mut sum = Complex64::new(0.0, 0.0);
    for i in 0..points.len() {
        let a = points[i];
        let b = points[(i + 1) % points.len()];
        let e = b - a;
        let mid = (a + b) * 0.5;
        let flux = q.dot(&e.cross(normal));
        sum += Complex64::from_polar(flux * sinc(0.5 * q.dot(&e)), q.dot(&mid));
    }
    -I * sum / qt2
}

fn taylor_integral(points: &[Vec3], centroid: &Vec3, q: &Vec3, qt: &Vec3) -> Complex64 {
    const MAX_TERMS: usize = 60;
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..points.len() {
        let v1 = points[i] - centroid;
        let v2 = points[(i + 1) % points.len()] - centroid;
        let double_area = v1.cross(&v2).norm();
        if double_area == 0.0 {
            continue;
        }
        let (s1, s2) = (qt.dot(&v1), qt.dot(&v2));
        let r = s1.abs().max(s2.abs());
        // sum_n i^n h_n(s1, s2) / (n + 2)!, h_n the complete homogeneous
        // polynomial of degree n in (0, s1, s2).
        let mut h = 1.0;
        let mut s1_pow = 1.0;
        let mut r_pow = 1.0;
        let mut fact = 2.0;
        let mut i_pow = Complex64::new(1.0, 0.0);
        let mut series = Complex64::new(0.5, 0.0);
        for n in 1..MAX_TERMS {
            s1_pow *= s1;
            r_pow *= r;
            h = s2 * h + s1_pow;
            fact *= (n + 2) as f64;
            i_pow *= I;
            series += i_pow * (h / fact);
            // |h_n| <= (n + 1) r^n bounds the remaining terms.
            if (n + 1) as f64 * r_pow / fact < 1e-18 {
                break;
            }
        }
        total += series * double_area;
    }
    total * Complex64::from_polar(1.0, q.dot(centroid))
}

/// Reference value of `int_C exp(i q.y) ds` by adaptive Gauss quadrature on a
/// fan triangulation. Slow; meant for checking the closed form.
pub fn adaptive_polygon_integral(points: &[Vec3], q: &Vec3, rel_tol: f64) -> Complex64 {
    let rule = gauss_legendre(8);
    let mut total = Complex64::new(0.0, 0.0);
    for i in 1..points.len() - 1 {
        let tri = [points[0], points[i], points[i + 1]];
        let coarse = triangle_rule(&tri, q, &rule);
        let scale = 0.5 * (tri[1] - tri[0]).cross(&(tri[2] - tri[0])).norm();
        total += adapt(&tri, q, &rule, coarse, rel_tol, scale, 0);
    }
    total
}

fn adapt(tri: &[Vec3; 3], q: &Vec3, rule: &[(f64, f64)], whole: Complex64, tol: f64, scale: f64, depth: usize) -> Complex64 {
    let [a, b, c] = *tri;
    let (ab, bc, ca) = ((a + b) * 0.5, (b + c) * 0.5, (c + a) * 0.5);
    let children = [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]];
    let parts: Vec<Complex64> = children.iter().map(|t| triangle_rule(t, q, rule)).collect();
    let sum: Complex64 = parts.iter().sum();
    if (sum - whole).norm() <= tol * 0.01 * scale || depth >= 12 {
        return sum;
    }
    children
        .iter()
        .zip(parts)
        .map(|(t, p)| adapt(t, q, rule, p, tol, scale, depth + 1))
        .sum()
}

/// Tensor Gauss rule on the square mapped onto the triangle (Duffy collapse).
fn triangle_rule(tri: &[Vec3; 3], q: &Vec3, rule: &[(f64, f64)]) -> Complex64 {
    let [a, b, c] = *tri;
    let jac = (b - a).cross(&(c - a)).norm();
    let mut sum = Complex64::new(0.0, 0.0);
    for &(u, wu) in rule {
        for &(v, wv) in rule {
            let y = a + (b - a) * u + (c - a) * ((1.0 - u) * v);
            sum += Complex64::from_polar(wu * wv * (1.0 - u), q.dot(&y));
        }
    }
    sum * jac
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            (0.5 * (x + 1.0), 0.5 * w)
        })
        .collect()
}
