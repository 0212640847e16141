//! Numerical laboratory for the fractional Hardy–Sobolev inequality with the
//! spectral Dirichlet Laplacian.
//!
//! The crate computes fractional quadratic forms on grids, Fourier–Bessel
//! extensions, half-space Green kernels, Rayleigh quotient minimizers and the
//! boundary curvature functionals that decide attainability of the best
//! constant.

pub mod error;
pub mod extension;
pub mod geometry;
pub mod grid;
pub mod halfspace;
pub mod params;
pub mod special;
pub mod spectral;
pub mod variational;

pub use error::{FracError, Result};
pub use grid::{make_grid, Axis, AxisKind, Domain, Grid, GridFunction};
pub use params::{make_params, FracParams};
pub use special::{bessel_k, gamma};
