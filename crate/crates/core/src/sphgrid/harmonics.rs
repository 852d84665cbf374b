//! Real orthonormal spherical harmonics and their surface gradients.
//!
//! `Y_n^m` uses `cos(m phi)` for `m > 0` and `sin(|m| phi)` for `m < 0`, each
//! with a factor `sqrt(2)`, and no Condon-Shortley phase. Associated Legendre
//! functions are carried fully normalized. The functions `Q_n^m = P_n^m /
//! sin(theta)` (for `m >= 1`) obey the same three-term recurrence and stay
//! finite at the poles, which gives pole-safe gradients without a second chart.

use nalgebra::Vector3;

type Vec3 = Vector3<f64>;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Flat index of `(n, m)` in a table covering degrees `0..=n_max`.
#[inline]
pub fn harmonic_index(n: usize, m: i64) -> usize {
    ((n * n + n) as i64 + m) as usize
}

#[inline]
fn tri(n: usize, m: usize) -> usize {
    n * (n + 1) / 2 + m
}

struct Legendre {
    /// Normalized `P_n^m(cos theta)`.
    p: Vec<f64>,
    /// `P_n^m / sin(theta)` for `m >= 1` (zero for `m = 0`).
    q: Vec<f64>,
}

fn legendre(n_max: usize, x: f64, s: f64) -> Legendre {
    let len = tri(n_max, n_max) + 1;
    let mut p = vec![0.0; len];
    let mut q = vec![0.0; len];

    p[0] = 1.0 / FOUR_PI.sqrt();
    if n_max >= 1 {
        p[tri(1, 0)] = 3f64.sqrt() * x * p[0];
    }
    for n in 2..=n_max {
        let nf = n as f64;
        let a = ((4.0 * nf * nf - 1.0) / (nf * nf)).sqrt();
        let b = ((nf - 1.0) * (nf - 1.0) / (4.0 * (nf - 1.0) * (nf - 1.0) - 1.0)).sqrt();
        p[tri(n, 0)] = a * (x * p[tri(n - 1, 0)] - b * p[tri(n - 2, 0)]);
    }

    for m in 1..=n_max {
        let mf = m as f64;
        let seed = ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt();
        q[tri(m, m)] = if m == 1 {
            seed * p[0]
        } else {
            seed * s * q[tri(m - 1, m - 1)]
        };
        if m < n_max {
            q[tri(m + 1, m)] = (2.0 * mf + 3.0).sqrt() * x * q[tri(m, m)];
        }
        for n in (m + 2)..=n_max {
            let nf = n as f64;
            let a = ((4.0 * nf * nf - 1.0) / (nf * nf - mf * mf)).sqrt();
            let b = (((nf - 1.0) * (nf - 1.0) - mf * mf) / (4.0 * (nf - 1.0) * (nf - 1.0) - 1.0)).sqrt();
            q[tri(n, m)] = a * (x * q[tri(n - 1, m)] - b * q[tri(n - 2, m)]);
        }
        for n in m..=n_max {
            p[tri(n, m)] = s * q[tri(n, m)];
        }
    }
    Legendre { p, q }
}

struct Chart {
    cos_theta: f64,
    sin_theta: f64,
    phi: f64,
}

fn chart(x: &Vec3) -> Chart {
    let sin_theta = x.x.hypot(x.y);
    Chart {
        cos_theta: x.z.clamp(-1.0, 1.0),
        sin_theta,
        phi: x.y.atan2(x.x),
    }
}

/// All real harmonics `Y_n^m(x)` for `n <= n_max`, indexed by [`harmonic_index`].
pub fn scalar_harmonics(n_max: usize, x: &Vec3) -> Vec<f64> {
    let c = chart(x);
    let leg = legendre(n_max, c.cos_theta, c.sin_theta);
    let mut out = vec![0.0; (n_max + 1) * (n_max + 1)];
    for n in 0..=n_max {
        out[harmonic_index(n, 0)] = leg.p[tri(n, 0)];
        for m in 1..=n {
            let (sin_m, cos_m) = (m as f64 * c.phi).sin_cos();
            let base = std::f64::consts::SQRT_2 * leg.p[tri(n, m)];
            out[harmonic_index(n, m as i64)] = base * cos_m;
            out[harmonic_index(n, -(m as i64))] = base * sin_m;
        }
    }
    out
}

/// Surface gradients `Grad Y_n^m(x)` for `n <= n_max`, indexed by [`harmonic_index`].
pub fn surface_gradients(n_max: usize, x: &Vec3) -> Vec<Vec3> {
    let c = chart(x);
    let leg = legendre(n_max, c.cos_theta, c.sin_theta);
    let (sin_phi, cos_phi) = c.phi.sin_cos();
    let e_theta = Vec3::new(c.cos_theta * cos_phi, c.cos_theta * sin_phi, -c.sin_theta);
    let e_phi = Vec3::new(-sin_phi, cos_phi, 0.0);
    let xc = c.cos_theta;

    let mut out = vec![Vec3::zeros(); (n_max + 1) * (n_max + 1)];
    for n in 1..=n_max {
        let nf = n as f64;
        // d/dtheta of normalized P_n^0 is -sqrt(n(n+1)) P_n^1.
        let dp0 = -(nf * (nf + 1.0)).sqrt() * leg.p[tri(n, 1)];
        out[harmonic_index(n, 0)] = e_theta * dp0;
        for m in 1..=n {
            let mf = m as f64;
            let q_prev = if n > m { leg.q[tri(n - 1, m)] } else { 0.0 };
            let ratio = ((2.0 * nf + 1.0) * (nf * nf - mf * mf) / (2.0 * nf - 1.0)).sqrt();
            let dp = nf * xc * leg.q[tri(n, m)] - ratio * q_prev;
            let qm = mf * leg.q[tri(n, m)];
            let (sin_m, cos_m) = (mf * c.phi).sin_cos();
            let r2 = std::f64::consts::SQRT_2;
            out[harmonic_index(n, m as i64)] = (e_theta * (dp * cos_m) - e_phi * (qm * sin_m)) * r2;
            out[harmonic_index(n, -(m as i64))] = (e_theta * (dp * sin_m) + e_phi * (qm * cos_m)) * r2;
        }
    }
    out
}

/// Real orthonormal spherical harmonic `Y_n^m` at the unit direction `x`.
///
/// # Panics
/// If `|m| > n`.
pub fn eval_scalar_harmonic(n: usize, m: i64, x: &Vec3) -> f64 {
    assert!(m.unsigned_abs() as usize <= n, "|m| must not exceed n");
    scalar_harmonics(n, x)[harmonic_index(n, m)]
}

/// Tangential vector harmonics `U = Grad Y / sqrt(n(n+1))` and `V = x cross U`.
///
/// # Panics
/// If `n == 0` or `|m| > n`.
pub fn eval_vector_harmonics(n: usize, m: i64, x: &Vec3) -> (Vec3, Vec3) {
    assert!(n >= 1, "vector harmonics start at degree 1");
    assert!(m.unsigned_abs() as usize <= n, "|m| must not exceed n");
    let nf = n as f64;
    let u = surface_gradients(n, x)[harmonic_index(n, m)] / (nf * (nf + 1.0)).sqrt();
    (u, x.cross(&u))
}
