//! Passing between `v_t + H(v)_x = 0` and `u_t - H(u_x) = 0` through
//! `u = -\int v` and `v = -u_x`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::PiecewiseCubicFlux;
use crate::grid::{GridKind, GridSolution};

/// Tolerance on the anchor state before the anchor counts as invaded.
pub const ANCHOR_TOL: f64 = 1e-8;

/// Regularizes `-\int_{-\infty}^x v` by pinning `u` at a point of the constant
/// far field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceAnchor {
    pub x_anchor: f64,
    pub u_at_anchor_t0: f64,
    pub anchor_state: f64,
}

impl CorrespondenceAnchor {
    /// Anchor value at time `t`. In a constant region `u_x = -v` is fixed and
    /// `u_t = H(-v)`, so the anchor moves linearly.
    pub fn value_at(&self, flux: &PiecewiseCubicFlux, t: f64) -> f64 {
        self.u_at_anchor_t0 + t * flux.value(-self.anchor_state)
    }
}

/// Nodal `u` on the cell faces of a cell-average grid, or on the nodes of a
/// nodal grid (trapezoid rule).
pub fn cl_to_hj(v: &GridSolution, anchor: &CorrespondenceAnchor, flux: &PiecewiseCubicFlux) -> Result<GridSolution> {
    let dx = v.dx;
    let mut rows = Vec::with_capacity(v.nt());
    for k in 0..v.nt() {
        let t = v.t(k);
        let row = v.row(k);
        let seen = v.interpolate_row(k, anchor.x_anchor);
        if (seen - anchor.anchor_state).abs() > ANCHOR_TOL {
            return Err(Error::AnchorInvaded {
                x_anchor: anchor.x_anchor,
                t,
                value: seen,
                expected: anchor.anchor_state,
            });
        }
        // cumulative integral from the first output node
        let mut cum = Vec::with_capacity(row.len() + 1);
        cum.push(0.0);
        match v.kind {
            GridKind::CellAverage => {
                for &c in row {
                    cum.push(cum[cum.len() - 1] + c * dx);
                }
            }
            GridKind::Nodal => {
                for w in row.windows(2) {
                    cum.push(cum[cum.len() - 1] + 0.5 * (w[0] + w[1]) * dx);
                }
            }
        }
        let at_anchor = integral_at(&cum, v.x_min, dx, anchor.x_anchor, anchor.anchor_state);
        let ua = anchor.value_at(flux, t);
        rows.push(cum.iter().map(|c| ua - (c - at_anchor)).collect());
    }
    let mut out = GridSolution::new(GridKind::Nodal, v.x_min, dx, v.t_min, v.dt, rows)?;
    out.meta = v.meta.clone();
    Ok(out)
}

/// Cumulative integral at `x`, extended by the constant anchor state outside
/// the node range.
fn integral_at(cum: &[f64], x0: f64, dx: f64, x: f64, state: f64) -> f64 {
    let s = (x - x0) / dx;
    let last = (cum.len() - 1) as f64;
    if s <= 0.0 {
        return state * (x - x0);
    }
    if s >= last {
        return cum[cum.len() - 1] + state * (x - x0 - last * dx);
    }
    let j = s.floor() as usize;
    let w = s - j as f64;
    cum[j] + w * (cum[j + 1] - cum[j])
}

/// `v = -u_x` by differences of adjacent nodes, assigned to the cell between
/// them. The difference is centred at the cell midpoint, so the result is
/// a cell-average grid with one cell fewer than `u` has nodes.
pub fn hj_to_cl(u: &GridSolution) -> Result<GridSolution> {
    if u.kind != GridKind::Nodal {
        return Err(Error::invalid("hj_to_cl expects a nodal grid"));
    }
    if u.nx() < 2 {
        return Err(Error::invalid("need at least two nodes"));
    }
    let rows = u
        .values
        .iter()
        .map(|r| r.windows(2).map(|w| -(w[1] - w[0]) / u.dx).collect())
        .collect();
    let mut out = GridSolution::new(GridKind::CellAverage, u.x_min, u.dx, u.t_min, u.dt, rows)?;
    out.meta = u.meta.clone();
    Ok(out)
}
