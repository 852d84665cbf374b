//! Near-uniform direction grids on the unit sphere and a quadrature-based
//! spherical-harmonic transform used to smooth far-field data.

mod grid;
pub mod harmonics;
mod transform;


pub use grid::{build_grid, QuadratureRule, SphericalGrid, DEFAULT_GRID_POINTS, DEFAULT_LOCATION_GRID_POINTS};
pub use harmonics::{eval_scalar_harmonic, eval_vector_harmonics, harmonic_index, scalar_harmonics, surface_gradients};
pub use transform::{sht_forward, synthesize, HarmonicExpansion, HarmonicTable};
