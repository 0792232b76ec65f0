//! Two-dimensional incompressible flow on the unit disk with Navier slip
//! boundary conditions, in vorticity / stream-function form.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
pub mod adn;
pub mod biot_savart;
pub mod diagnostics;
pub mod field;
pub mod grid;
pub mod io;
mod modal;
pub mod pressure;
pub mod solver;
pub mod spectral;
pub mod sweep;
pub mod stencil;

pub use error::{Error, Result};
pub use field::{boundary_tangential_velocity, curl, divergence, perp_grad, ScalarField, VectorField};
pub use grid::{AlphaSpec, BoundaryTrace, PolarGrid};
pub use biot_savart::{
    biot_savart, random_smooth_vorticity, sample_navier_field, solve_poisson_dirichlet, NavierMode, NavierSample,
    PoissonDirichletSolver,
};
