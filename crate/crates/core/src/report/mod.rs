//! Experiment driver plumbing: parameters, manifests, staged output and the
//! subcommands behind the CLI.

mod commands;
mod output;
mod params;
mod svg;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Error;

pub use commands::{
    parse_starts, resolve_flux, run_counterexample_cmd, run_flow_cmd, run_report_cmd, run_solve_cmd, run_subcommand,
    run_verify_cmd, RunOutcome, SUBCOMMANDS,
};
pub use output::{num, write_file_atomic, StagedDir};
pub use params::{Params, SCHEMA_VERSION};
pub use svg::{characteristics_svg, line_plot_svg, shock_caption};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub schema_version: u64,
    pub config_hash: String,
    pub subcommand: String,
    pub parameters: Value,
    pub derived_constants: BTreeMap<String, Value>,
    pub artifact_paths: Vec<String>,
    /// `ok` or `certificate_not_found`.
    pub status: String,
    pub wall_time_s: f64,
}

/// Process exit codes of the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitKind {
    Ok = 0,
    Config = 1,
    Numerical = 2,
    CertificateNotFound = 3,
    Io = 4,
}

impl ExitKind {
    pub fn code(self) -> i32 {
        self as i32
    }
}

pub fn exit_kind(e: &Error) -> ExitKind {
    match e {
        Error::InvalidInput(_) | Error::Json(_) => ExitKind::Config,
        Error::NoViolationFound => ExitKind::CertificateNotFound,
        Error::Io(_) => ExitKind::Io,
        _ => ExitKind::Numerical,
    }
}
