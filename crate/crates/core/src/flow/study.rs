//! The flow machinery run on a front-tracked solution: its potential grid,
//! a Godunov reference, one ensemble per `eps` and the residual trend.

use serde::{Deserialize, Serialize};

use super::diagnostics::{flow_diagnostics, w_flow, w_horizon, ComparisonInputs, FlowDiagnostics};
use super::ensemble::{integral_residual, integrate_flow_refined, suggested_step, FlowEnsemble};
use super::field::{mollify_profile, Potential};
use crate::error::{Error, Result};
use crate::front_tracking::FrontTrackedSolution;
use crate::grid::GridSolution;
use crate::regularity::semiconcavity_constant;
use crate::viscosity::{cl_to_hj, godunov_solve, CorrespondenceAnchor, GodunovConfig};

/// Residuals below this are quadrature round-off and compare as equal.
pub const RESIDUAL_FLOOR: f64 = 1e-9;

/// Step-halving retries before giving up.
const HALVINGS: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowStudyConfig {
    pub epsilons: Vec<f64>,
    pub starts: Vec<f64>,
    pub t_max: f64,
    /// Integration step; `None` takes the heuristic bound.
    pub dt: Option<f64>,
    /// Potential and reference grid.
    pub x_range: (f64, f64),
    pub dx: f64,
    pub grid_dt: f64,
}

impl FlowStudyConfig {
    pub fn new(epsilons: Vec<f64>, starts: Vec<f64>, t_max: f64) -> Self {
        Self {
            epsilons,
            starts,
            t_max,
            dt: None,
            x_range: (-30.0, 40.0),
            dx: 0.01,
            grid_dt: 0.01,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() {
            return Err(Error::invalid("epsilon list is empty"));
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(Error::invalid(format!("epsilon = {e} must be positive")));
        }
        if self.starts.is_empty() {
            return Err(Error::invalid("no start points"));
        }
        if !(self.t_max > 0.0 && self.dx > 0.0 && self.grid_dt > 0.0) {
            return Err(Error::invalid("t_max, dx and grid_dt must be positive"));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(Error::invalid(format!("dt = {dt} must be positive")));
            }
        }
        if !(self.x_range.1 > self.x_range.0) {
            return Err(Error::invalid("empty x range"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonRun {
    pub epsilon: f64,
    pub ensemble: FlowEnsemble,
    pub diagnostics: FlowDiagnostics,
    /// Sup-t residual against the unmollified field, per start.
    pub residuals: Vec<f64>,
    /// Members that came within `2 eps` of a shock.
    pub near_shock: Vec<bool>,
    pub identity_defect: f64,
    pub tube_excess: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualTrend {
    /// Starts away from every shock tube at every `eps`.
    pub kept: usize,
    pub non_increasing: usize,
    pub fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowStudy {
    /// Semiconcavity constant of `f` over the grid, maxed over rows.
    pub c0: f64,
    /// `max |H''|` on `[-Lip f, Lip f]`.
    pub max_second_deriv: f64,
    /// `2 c0 max|H''|`: `f'' <= 2 c0` under the `c|x|^2` convention.
    pub c: f64,
    pub w_horizon: f64,
    pub runs: Vec<EpsilonRun>,
    pub trend: ResidualTrend,
}

/// Godunov reference potential on the same faces as `sol.potential_grid`.
pub fn reference_potential(sol: &FrontTrackedSolution, cfg: &FlowStudyConfig) -> Result<GridSolution> {
    let (cells, rows) = grid_shape(cfg);
    let g = GodunovConfig::new(cfg.x_range, cfg.t_max, cells).with_stored_intervals(Some(rows - 1));
    let v = godunov_solve(&sol.flux, &sol.v0, &g)?;
    let anchor = CorrespondenceAnchor {
        x_anchor: cfg.x_range.0,
        u_at_anchor_t0: sol.v0.integral(cfg.x_range.0, 0.0),
        anchor_state: sol.v0.left_extension,
    };
    cl_to_hj(&v, &anchor, &sol.flux)
}

fn grid_shape(cfg: &FlowStudyConfig) -> (usize, usize) {
    let cells = ((cfg.x_range.1 - cfg.x_range.0) / cfg.dx).round() as usize;
    let rows = (cfg.t_max / cfg.grid_dt).round().max(1.0) as usize + 1;
    (cells, rows)
}

pub fn run_flow_study(sol: &FrontTrackedSolution, cfg: &FlowStudyConfig) -> Result<FlowStudy> {
    cfg.validate()?;
    if cfg.t_max > sol.t_end {
        return Err(Error::invalid(format!(
            "t_max = {} beyond the solution's t_end = {}",
            cfg.t_max, sol.t_end
        )));
    }
    let (cells, rows) = grid_shape(cfg);
    let dx = (cfg.x_range.1 - cfg.x_range.0) / cells as f64;
    let grid_dt = cfg.t_max / (rows - 1) as f64;
    let f = sol.potential_grid(cfg.x_range.0, dx, cells, 0.0, grid_dt, rows, 4)?;
    let u = reference_potential(sol, cfg)?;

    let c0 = f
        .values
        .iter()
        .map(|r| semiconcavity_constant(r, dx))
        .fold(0.0, f64::max);
    let lip = f
        .values
        .iter()
        .flat_map(|r| r.windows(2).map(|w| ((w[1] - w[0]) / dx).abs()))
        .fold(0.0, f64::max);
    let max_second_deriv = sol.flux.max_abs_second_deriv(-lip, lip);
    let c = 2.0 * c0 * max_second_deriv;

    let grad_u0 = sol.v0.negated();
    let horizon = w_horizon(&sol.flux, &grad_u0, Some(cfg.t_max));
    let w_times: Vec<f64> = (0..rows).map(|k| k as f64 * grid_dt).collect();
    let f_at = |t: f64, x: f64| f.interpolate(t, x);
    let u_at = |t: f64, x: f64| u.interpolate(t, x);
    let w = |t: f64, x: f64| w_flow(&sol.flux, &grad_u0, t, x);
    let cmp = ComparisonInputs {
        f: &f_at,
        u: &u_at,
        w: &w,
        w_horizon: horizon,
        w_times: &w_times,
    };
    let limit = |t: f64, x: f64| sol.eval(t, x).ok().map(|v| sol.flux.deriv(v));

    let mut runs = Vec::with_capacity(cfg.epsilons.len());
    for &eps in &cfg.epsilons {
        let field = mollify_profile(Potential::Grid(f.clone()), &sol.flux, eps)?;
        let window = cfg
            .starts
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        let dt = match cfg.dt {
            Some(dt) => dt,
            // a whole number of steps per grid row keeps the row kinks on step ends
            None => grid_dt / (grid_dt / suggested_step(&field, window, (0.0, cfg.t_max), 60)).ceil(),
        };
        let ensemble = integrate_flow_refined(&field, &cfg.starts, 0.0, cfg.t_max, dt, HALVINGS)?;
        let diagnostics = flow_diagnostics(&ensemble, &cmp, c)?;
        let residuals = ensemble
            .trajectories
            .iter()
            .map(|tr| integral_residual(&ensemble.times, tr, limit))
            .collect();
        let near_shock = ensemble
            .trajectories
            .iter()
            .map(|tr| {
                tr.iter().zip(&ensemble.times).any(|(&y, &t)| {
                    sol.shocks
                        .iter()
                        .any(|s| s.is_active(t) && (s.position_at(t) - y).abs() <= 2.0 * eps)
                })
            })
            .collect();
        runs.push(EpsilonRun {
            epsilon: eps,
            identity_defect: ensemble.jacobian_identity_defect(),
            tube_excess: ensemble.tube_excess(field.speed_bound()),
            ensemble,
            diagnostics,
            residuals,
            near_shock,
        });
    }
    let trend = residual_trend(&runs);
    Ok(FlowStudy {
        c0,
        max_second_deriv,
        c,
        w_horizon: horizon,
        runs,
        trend,
    })
}

/// Residual trend over runs ordered by decreasing `eps`.
pub fn residual_trend(runs: &[EpsilonRun]) -> ResidualTrend {
    let mut order: Vec<&EpsilonRun> = runs.iter().collect();
    order.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon));
    let n = order.first().map_or(0, |r| r.residuals.len());
    let (mut kept, mut good) = (0, 0);
    for i in 0..n {
        if order.iter().any(|r| r.near_shock[i]) {
            continue;
        }
        kept += 1;
        if order
            .windows(2)
            .all(|w| w[1].residuals[i] <= w[0].residuals[i] + RESIDUAL_FLOOR)
        {
            good += 1;
        }
    }
    ResidualTrend {
        kept,
        non_increasing: good,
        fraction: if kept == 0 { 0.0 } else { good as f64 / kept as f64 },
    }
}
