//! Selection-principle numerics for a non-convex Hamilton-Jacobi equation.
//!
//! The crate builds a weak but non-entropic solution of the scalar
//! conservation law `v_t + H(v)_x = 0` by characteristics and shock tracking,
//! certifies its entropy violation, and compares it with reference viscosity
//! and entropy solutions.

// `!(x > 0.0)` is how NaN gets rejected throughout
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod flow;
pub mod flux;
pub mod front_tracking;
pub mod grid;
pub mod optimize;
pub mod profile;
pub mod regularity;
pub mod report;
pub mod viscosity;

pub use error::{Error, Result};
pub use flux::PiecewiseCubicFlux;
pub use grid::{GridKind, GridSolution};
pub use profile::PiecewiseLinearProfile;
