//! Identification of the four dynamic parameters of a simulated cylindrical
//! robot (one revolute joint, two prismatic joints) under controlled
//! measurement noise.
//!
//! The crate is layered bottom-up:
//!
//! - [`numerics`]: small dense matrices, matrix norms, Jacobi eigen/SVD
//!   routines, a linear solver and a seeded random generator.
//! - [`robot`]: closed-form inverse dynamics, the linear regressor, the base
//!   parameter mapping, the excitation trajectory and its physical bounds.
//! - [`sampling`]: sampling the trajectory and corrupting the samples under
//!   the four noise scenarios.
//! - [`estimators`]: least squares, total least squares and robust least
//!   squares in absolute and relative form.
//! - [`swarm`]: the particle swarm optimizer and its sixteen cost functions.
//! - [`harness`]: benchmarks, multi-seed studies and table rendering.

pub mod error;
pub mod estimators;
pub mod harness;
pub mod numerics;
pub mod robot;
pub mod sampling;
pub mod swarm;

pub use error::{Error, Result};
