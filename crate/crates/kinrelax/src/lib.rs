//! Explicit kinetic relaxation schemes with a collision matrix for linear and
//! nonlinear convection-diffusion systems in two dimensions.
//!
//! The solver advances the reduced Jin-Xin state `U = (u, v1, v2)` of a
//! regularized discrete-velocity model (D2Q4 by default) with upwind
//! finite-volume fluxes of order 1, 2 or 4 and matching IMEX / deferred
//! correction time integrators. The per-cell relaxation matrix is built so
//! that the first-order Chapman-Enskog correction reproduces a prescribed
//! diffusion matrix, which covers scalar advection-diffusion and the
//! compressible Navier-Stokes equations.

pub mod boundary;
pub mod cli;
pub mod collision;
pub mod harness;
pub mod lattice;
pub mod linalg;
pub mod space;
pub mod stability;
pub mod systems;
pub mod timeint;

mod error;

pub use error::{Error, Result};
