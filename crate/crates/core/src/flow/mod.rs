//! Mollified characteristic flows and the comparison diagnostics built on
//! them.

mod diagnostics;
mod ensemble;
mod field;
mod mollifier;
mod study;

pub use diagnostics::{
    flow_diagnostics, preimage_fraction, w_flow, w_horizon, ComparisonInputs, FlowDiagnostics, DET_TOL, MONOTONE_TOL,
};
pub use ensemble::{
    integral_residual, integrate_flow, integrate_flow_refined, suggested_step, FlowEnsemble, HALVING_TOL,
};
pub use field::{mollify_profile, velocity_field, Jet, MollifiedField, Potential, PotentialFn};
pub use mollifier::{mollifier_constant, Mollifier};
pub use study::{
    reference_potential, residual_trend, run_flow_study, EpsilonRun, FlowStudy, FlowStudyConfig, ResidualTrend,
    RESIDUAL_FLOOR,
};
