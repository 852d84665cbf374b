use std::fmt::Write as _;

use nalgebra::Vector3;
use rayon::prelude::*;

use super::harmonics::{harmonic_index, scalar_harmonics};
use super::SphericalGrid;
use crate::error::{Error, Result};

type Vec3 = Vector3<f64>;

/// Truncated real spherical-harmonic expansion `sum c_nm Y_n^m`, `n <= n_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicExpansion {
    n_c: usize,
    coeffs: Vec<f64>,
}

impl HarmonicExpansion {
    pub fn new(n_c: usize, coeffs: Vec<f64>) -> Result<Self> {
        let expected = (n_c + 1) * (n_c + 1);
        if coeffs.len() != expected {
            return Err(Error::InvalidInput(format!(
                "degree {n_c} needs {expected} coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(Self { n_c, coeffs })
    }

    pub fn degree(&self) -> usize {
        self.n_c
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize, m: i64) -> f64 {
        self.coeffs[harmonic_index(n, m)]
    }

    /// Evaluates the expansion at a unit direction.
    pub fn eval(&self, x: &Vec3) -> f64 {
        let y = scalar_harmonics(self.n_c, x);
        y.iter().zip(&self.coeffs).map(|(a, b)| a * b).sum()
    }

    /// `sum c_nm^2`, the squared `L^2` norm of the expansion.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// One `n m c` line per coefficient.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for n in 0..=self.n_c {
            for m in -(n as i64)..=(n as i64) {
                writeln!(out, "{n} {m} {}", self.coeff(n, m)).unwrap();
            }
        }
        out
    }
}

/// Harmonic values at every grid point, reusable across several transforms.
#[derive(Debug, Clone)]
pub struct HarmonicTable {
    n_c: usize,
    rows: Vec<Vec<f64>>,
}

impl HarmonicTable {
    pub fn new(grid: &SphericalGrid, n_c: usize) -> Self {
        let rows = grid.points().par_iter().map(|x| scalar_harmonics(n_c, x)).collect();
        Self { n_c, rows }
    }

    pub fn degree(&self) -> usize {
        self.n_c
    }

    /// Projects grid values onto the table's harmonics with the grid weights.
    pub fn forward(&self, grid: &SphericalGrid, values: &[f64]) -> Result<HarmonicExpansion> {
        check_len(grid, values)?;
        let mut coeffs = vec![0.0; (self.n_c + 1) * (self.n_c + 1)];
        for ((row, w), f) in self.rows.iter().zip(grid.weights()).zip(values) {
            let wf = w * f;
            for (c, y) in coeffs.iter_mut().zip(row) {
                *c += wf * y;
            }
        }
        Ok(HarmonicExpansion { n_c: self.n_c, coeffs })
    }

    /// Evaluates an expansion of the same degree at every grid point.
    pub fn synthesize(&self, expansion: &HarmonicExpansion) -> Vec<f64> {
        assert_eq!(expansion.n_c, self.n_c, "expansion degree differs from table degree");
        self.rows
            .iter()
            .map(|row| row.iter().zip(&expansion.coeffs).map(|(a, b)| a * b).sum())
            .collect()
    }
}

fn check_len(grid: &SphericalGrid, values: &[f64]) -> Result<()> {
    if values.len() != grid.len() {
        return Err(Error::InvalidInput(format!(
            "{} values for a grid of {} points",
            values.len(),
            grid.len()
        )));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite value at grid point {i}")));
    }
    Ok(())
}

/// Quadrature projection of grid values onto harmonics of degree `<= n_c`.
pub fn sht_forward(grid: &SphericalGrid, values: &[f64], n_c: usize) -> Result<HarmonicExpansion> {
    HarmonicTable::new(grid, n_c).forward(grid, values)
}

/// The expansion evaluated at every grid point.
pub fn synthesize(expansion: &HarmonicExpansion, grid: &SphericalGrid) -> Vec<f64> {
    grid.points().par_iter().map(|x| expansion.eval(x)).collect()
}
