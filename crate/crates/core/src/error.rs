use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("objective is not concave on [{lo}, {hi}] (second difference {second_difference:e} at p = {at})")]
    NonConcaveObjective {
        lo: f64,
        hi: f64,
        at: f64,
        second_difference: f64,
    },

    #[error("maximizer {argmax} lies within tolerance of the search interval [{lo}, {hi}]")]
    SearchIntervalTooSmall { lo: f64, hi: f64, argmax: f64 },

    #[error("non-constant wave reached the {side} boundary at t = {t} (drift {drift:e})")]
    UnpaddedDomain { side: &'static str, t: f64, drift: f64 },

    #[error("anchor at x = {x_anchor} invaded at t = {t}: v = {value}, expected {expected}")]
    AnchorInvaded {
        x_anchor: f64,
        t: f64,
        value: f64,
        expected: f64,
    },

    #[error("characteristic speeds are non-decreasing on the scanned interval; no crossing")]
    NoCrossing,

    #[error("degenerate jump: |v+ - v-| = {0:e}")]
    DegenerateJump(f64),

    #[error("state reconstruction failed at (t, x) = ({t}, {x}): {reason}")]
    StateReconstructionFailed { t: f64, x: f64, reason: String },

    #[error("point ({t}, {x}) lies on shock {label}")]
    OnShock { t: f64, x: f64, label: String },

    #[error("no entropy violation found on any shock sample")]
    NoViolationFound,

    #[error("step-halving check failed: trajectories differ by {0:e}")]
    StepTooLarge(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
