//! Numerical laboratory for the fractional transport-diffusion equation
//! `∂_t θ − ∇·(vθ) + J^{1/2}θ = 0` on the Heisenberg group H¹ and on ℝⁿ.
//!
//! Every numerical type is generic over [`Real`] (`f32` or `f64`); the
//! aliases at the crate root fix `f64`.

pub mod cli;
pub mod error;
mod fft;
pub mod grid;
pub mod group;
pub mod operators;
pub mod molecules;
pub mod regularity;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{Boundary, Grid};
pub use group::{GroupDescriptor, Point};
pub use scalar::Real;

/// Double-precision grid.
pub type Grid64 = grid::Grid<f64>;
/// Double-precision scalar field.
pub type Field = grid::ScalarField<f64>;
/// Double-precision vector field.
pub type Velocity = grid::VectorField<f64>;
