//! Pointwise evaluation of a front-tracked solution.

use super::counterexample::FrontTrackedSolution;
use crate::error::{Error, Result};
use crate::grid::{GridKind, GridSolution};
use crate::viscosity::{cl_to_hj, CorrespondenceAnchor};

/// Distance to a shock below which a point counts as lying on it.
pub const ON_SHOCK_TOL: f64 = 1e-12;

/// Values of distinct live characteristics through one point may differ by
/// at most this much.
const UNIQUE_TOL: f64 = 1e-9;

/// Sub-cell pieces narrower than this fraction of a cell are dropped.
const SLIVER: f64 = 1e-7;

impl FrontTrackedSolution {
    /// Absorbed foot intervals of the shocks alive at `t`, with positions.
    fn absorbed_at(&self, t: f64) -> Vec<(f64, (f64, f64), usize)> {
        self.shocks
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_active(t))
            .map(|(i, s)| {
                let z = s.position_at(t);
                let guess = s.feet_at(t);
                // snap the interpolated feet onto the exact roots through z
                let roots = self.map.feet(t, z);
                let nearest = |g: f64| {
                    roots
                        .iter()
                        .copied()
                        .min_by(|a, b| (a - g).abs().total_cmp(&(b - g).abs()))
                        .unwrap_or(g)
                };
                (z, (nearest(guess.0), nearest(guess.1)), i)
            })
            .collect()
    }

    /// `v(t, x)`: the initial value carried by the unique characteristic
    /// through `(t, x)` that has not been absorbed by a shock.
    pub fn eval(&self, t: f64, x: f64) -> Result<f64> {
        if !(0.0..=self.t_end).contains(&t) {
            return Err(Error::invalid(format!("t = {t} outside [0, {}]", self.t_end)));
        }
        self.eval_with(t, x, &self.absorbed_at(t))
    }

    fn eval_with(&self, t: f64, x: f64, absorbed: &[(f64, (f64, f64), usize)]) -> Result<f64> {
        for &(z, _, i) in absorbed {
            if (x - z).abs() <= ON_SHOCK_TOL {
                return Err(Error::OnShock {
                    t,
                    x,
                    label: self.shocks[i].name.clone(),
                });
            }
        }
        let mut value: Option<f64> = None;
        for foot in self.map.feet(t, x) {
            let swallowed = absorbed.iter().any(|&(_, (lo, hi), _)| {
                let tol = 1e-10 * (1.0 + foot.abs());
                foot > lo + tol && foot < hi - tol
            });
            if swallowed {
                continue;
            }
            let v = self.v0.value(foot);
            match value {
                None => value = Some(v),
                Some(w) if (w - v).abs() <= UNIQUE_TOL => {}
                Some(w) => {
                    return Err(Error::StateReconstructionFailed {
                        t,
                        x,
                        reason: format!("two live characteristics carry {w} and {v}"),
                    })
                }
            }
        }
        value.ok_or_else(|| Error::StateReconstructionFailed {
            t,
            x,
            reason: "every characteristic through the point is absorbed".into(),
        })
    }

    /// Evaluation that steps off a shock by a tiny offset instead of failing.
    pub fn eval_near(&self, t: f64, x: f64) -> Result<f64> {
        self.eval_near_with(t, x, &self.absorbed_at(t))
    }

    fn eval_near_with(&self, t: f64, x: f64, absorbed: &[(f64, (f64, f64), usize)]) -> Result<f64> {
        match self.eval_with(t, x, absorbed) {
            Err(Error::OnShock { .. }) => self.eval_with(t, x + 1e-9, absorbed),
            other => other,
        }
    }

    /// Values at the given abscissae at one time.
    pub fn eval_row(&self, t: f64, xs: &[f64]) -> Result<Vec<f64>> {
        if !(0.0..=self.t_end).contains(&t) {
            return Err(Error::invalid(format!("t = {t} outside [0, {}]", self.t_end)));
        }
        let absorbed = self.absorbed_at(t);
        xs.iter().map(|&x| self.eval_near_with(t, x, &absorbed)).collect()
    }

    /// Cell averages on a uniform grid. Cells are split at live shocks and
    /// each piece gets a `sub`-point midpoint rule, so jumps are integrated
    /// exactly.
    #[allow(clippy::too_many_arguments)]
    pub fn sample_cells(
        &self,
        x_min: f64,
        dx: f64,
        nx: usize,
        t_min: f64,
        dt: f64,
        nt: usize,
        sub: usize,
    ) -> Result<GridSolution> {
        let sub = sub.max(1);
        let mut rows = Vec::with_capacity(nt);
        for k in 0..nt {
            let t = t_min + k as f64 * dt;
            let mut fronts: Vec<f64> = self
                .shocks
                .iter()
                .filter(|s| s.is_active(t))
                .map(|s| s.position_at(t))
                .collect();
            fronts.sort_by(f64::total_cmp);
            let mut xs = Vec::with_capacity(nx * sub);
            let mut weights = Vec::with_capacity(nx * sub);
            let mut cell_of = Vec::with_capacity(nx * sub);
            let mut next = 0;
            for j in 0..nx {
                let (a, b) = (x_min + j as f64 * dx, x_min + (j + 1) as f64 * dx);
                while next < fronts.len() && fronts[next] <= a {
                    next += 1;
                }
                let mut lo = a;
                let mut i = next;
                loop {
                    let hi = if i < fronts.len() && fronts[i] < b {
                        fronts[i]
                    } else {
                        b
                    };
                    let h = (hi - lo) / sub as f64;
                    // slivers next to a front would sample the front itself
                    if h > SLIVER * dx {
                        for m in 0..sub {
                            xs.push(lo + (m as f64 + 0.5) * h);
                            weights.push(h / dx);
                            cell_of.push(j);
                        }
                    }
                    if hi == b {
                        break;
                    }
                    lo = hi;
                    i += 1;
                }
            }
            let vals = self.eval_row(t, &xs)?;
            let mut row = vec![0.0; nx];
            for ((v, w), j) in vals.iter().zip(&weights).zip(&cell_of) {
                row[*j] += v * w;
            }
            rows.push(row);
        }
        GridSolution::new(GridKind::CellAverage, x_min, dx, t_min, dt, rows)
    }

    /// Nodal HJ potential `u = -\int v` on the faces of a cell grid starting
    /// at `x_min`, pinned at `x_min` where `v` must still hold its left far
    /// field state.
    #[allow(clippy::too_many_arguments)]
    pub fn potential_grid(
        &self,
        x_min: f64,
        dx: f64,
        nx: usize,
        t_min: f64,
        dt: f64,
        nt: usize,
        sub: usize,
    ) -> Result<GridSolution> {
        let v = self.sample_cells(x_min, dx, nx, t_min, dt, nt, sub)?;
        let anchor = CorrespondenceAnchor {
            x_anchor: x_min,
            u_at_anchor_t0: self.v0.integral(x_min, 0.0),
            anchor_state: self.v0.left_extension,
        };
        cl_to_hj(&v, &anchor, &self.flux)
    }
}

pub fn eval_solution(sol: &FrontTrackedSolution, t: f64, x: f64) -> Result<f64> {
    sol.eval(t, x)
}
