//! Reference entropy and viscosity solutions.

mod correspondence;
mod godunov;
mod hopf_lax;

pub use correspondence::{cl_to_hj, hj_to_cl, CorrespondenceAnchor, ANCHOR_TOL};
pub use godunov::{godunov_flux, godunov_run, godunov_solve, GodunovConfig, GodunovRun, MassLedger, DEFAULT_CFL};
pub use hopf_lax::{hopf_lax_eval, HopfLax};
