//! Weak solution of the counter-example by characteristics and shock tracking.

mod characteristics;
mod counterexample;
mod entropy;
mod shock;
mod solution;
mod tracker;

pub use characteristics::{
    build_initial_profile, characteristic_position, first_crossing, CharacteristicMap, CompressiveCluster,
};
pub use counterexample::{
    build_counterexample, build_counterexample_with, exact_constants, state_crossing, step_halving_gap, BuildMode,
    CounterexampleConfig, DerivedConstants, ExactConstants, FrontTrackedSolution, DEFAULT_T_END,
};
pub use entropy::{
    chord_at, entropy_certificate, entropy_report, oleinik_chord_check, paper_witness, ChordCheck, EntropyReport,
    EntropyViolationCertificate, Side, VIOLATION_TOL,
};
pub use shock::{
    rh_speed, shock_speed, trace_shock, ShockCurve, ShockLabel, ShockSample, ShockState, Termination, DEGENERATE_JUMP,
};
pub use solution::{eval_solution, ON_SHOCK_TOL};
