use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flux::PiecewiseCubicFlux;
use crate::grid::{GridKind, GridMeta, GridSolution};
use crate::profile::PiecewiseLinearProfile;

/// Default Courant number.
pub const DEFAULT_CFL: f64 = 0.45;

/// Drift of a boundary cell that counts as a wave reaching the boundary.
const BOUNDARY_DRIFT_TOL: f64 = 1e-10;

const PARALLEL_FACES: usize = 4096;

/// Exact Riemann flux: the minimum of `H` between the states for an upward
/// jump, the maximum for a downward one.
#[inline]
pub fn godunov_flux(flux: &PiecewiseCubicFlux, v_left: f64, v_right: f64) -> f64 {
    if v_left == v_right {
        return flux.value(v_left);
    }
    let (min, max) = flux.extrema_on(v_left, v_right);
    if v_left < v_right {
        min.1
    } else {
        max.1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GodunovConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub t_max: f64,
    pub cells: usize,
    pub cfl: f64,
    /// Number of stored time intervals; the scheme step count is rounded up to
    /// a multiple of it. `None` stores every step.
    pub stored_intervals: Option<usize>,
    pub flux_id: Option<String>,
}

impl GodunovConfig {
    pub fn new(domain: (f64, f64), t_max: f64, cells: usize) -> Self {
        Self {
            x_min: domain.0,
            x_max: domain.1,
            t_max,
            cells,
            cfl: DEFAULT_CFL,
            stored_intervals: Some(200),
            flux_id: None,
        }
    }

    pub fn with_cfl(mut self, cfl: f64) -> Self {
        self.cfl = cfl;
        self
    }

    pub fn with_stored_intervals(mut self, n: Option<usize>) -> Self {
        self.stored_intervals = n;
        self
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.cells as f64
    }
}

/// Running mass balance of a finite-volume run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MassLedger {
    pub initial_mass: f64,
    pub final_mass: f64,
    /// Accumulated `(flux_in - flux_out) dt`.
    pub boundary_transfer: f64,
    /// `|final - initial - transfer|` relative to the mass scale.
    pub relative_error: f64,
}

#[derive(Clone, Debug)]
pub struct GodunovRun {
    pub grid: GridSolution,
    pub ledger: MassLedger,
    pub steps: usize,
    pub scheme_dt: f64,
}

pub fn godunov_solve(
    flux: &PiecewiseCubicFlux,
    v0: &PiecewiseLinearProfile,
    config: &GodunovConfig,
) -> Result<GridSolution> {
    godunov_run(flux, v0, config).map(|run| run.grid)
}

/// First-order Godunov finite-volume scheme for `v_t + H(v)_x = 0` with the
/// far-field states of `v0` imposed in ghost cells.
pub fn godunov_run(
    flux: &PiecewiseCubicFlux,
    v0: &PiecewiseLinearProfile,
    config: &GodunovConfig,
) -> Result<GodunovRun> {
    let GodunovConfig {
        x_min,
        x_max,
        t_max,
        cells,
        cfl,
        ..
    } = *config;
    if !(cfl > 0.0 && cfl < 1.0) {
        return Err(Error::invalid(format!("cfl = {cfl} must lie in (0, 1)")));
    }
    if cells < 100 {
        return Err(Error::invalid("at least 100 cells are required"));
    }
    if !(x_max > x_min) || !(t_max > 0.0) {
        return Err(Error::invalid("domain and final time must be non-degenerate"));
    }
    let dx = config.dx();
    let (vmin, vmax) = v0.value_range();
    let speed = flux.max_abs_deriv(vmin, vmax).max(1e-12);
    let dt_cfl = cfl * dx / speed;
    let raw_steps = (t_max / dt_cfl).ceil().max(1.0) as usize;
    let (steps, stride) = match config.stored_intervals {
        Some(rows) if rows > 0 => {
            let per = raw_steps.div_ceil(rows);
            (per * rows, per)
        }
        _ => (raw_steps, 1),
    };
    let dt = t_max / steps as f64;

    let (left_state, right_state) = (v0.left_extension, v0.right_extension);
    let mut v: Vec<f64> = (0..cells)
        .map(|j| {
            let a = x_min + j as f64 * dx;
            v0.integral(a, a + dx) / dx
        })
        .collect();
    check_boundary(&v, left_state, right_state, 0.0)?;

    let mut rows = vec![v.clone()];
    let mut faces = vec![0.0; cells + 1];
    let initial_mass = v.iter().sum::<f64>() * dx;
    let mut transfer = 0.0;
    let mut max_err: f64 = 0.0;
    let mass_scale = v.iter().map(|x| x.abs()).sum::<f64>() * dx;

    for step in 1..=steps {
        let face_flux = |i: usize| {
            let vl = if i == 0 { left_state } else { v[i - 1] };
            let vr = if i == cells { right_state } else { v[i] };
            godunov_flux(flux, vl, vr)
        };
        if cells >= PARALLEL_FACES {
            faces.par_iter_mut().enumerate().for_each(|(i, f)| *f = face_flux(i));
        } else {
            faces.iter_mut().enumerate().for_each(|(i, f)| *f = face_flux(i));
        }
        let ratio = dt / dx;
        for (j, cell) in v.iter_mut().enumerate() {
            *cell -= ratio * (faces[j + 1] - faces[j]);
        }
        transfer += (faces[0] - faces[cells]) * dt;
        let t = step as f64 * dt;
        check_boundary(&v, left_state, right_state, t)?;
        let mass = v.iter().sum::<f64>() * dx;
        max_err = max_err.max((mass - initial_mass - transfer).abs() / mass_scale.max(1.0));
        if step % stride == 0 {
            rows.push(v.clone());
        }
    }

    let mut grid = GridSolution::new(GridKind::CellAverage, x_min, dx, 0.0, dt * stride as f64, rows)?;
    grid.meta = GridMeta {
        cfl: Some(cfl),
        flux_id: config.flux_id.clone(),
        scheme_dt: Some(dt),
    };
    let final_mass = grid.mass(grid.nt() - 1);
    Ok(GodunovRun {
        grid,
        ledger: MassLedger {
            initial_mass,
            final_mass,
            boundary_transfer: transfer,
            relative_error: max_err,
        },
        steps,
        scheme_dt: dt,
    })
}

fn check_boundary(v: &[f64], left: f64, right: f64, t: f64) -> Result<()> {
    let dl = (v[0] - left).abs();
    if dl > BOUNDARY_DRIFT_TOL {
        return Err(Error::UnpaddedDomain {
            side: "left",
            t,
            drift: dl,
        });
    }
    let dr = (v[v.len() - 1] - right).abs();
    if dr > BOUNDARY_DRIFT_TOL {
        return Err(Error::UnpaddedDomain {
            side: "right",
            t,
            drift: dr,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn riemann(left: f64, right: f64) -> PiecewiseLinearProfile {
        // steep continuous ramp standing in for a jump at 0
        PiecewiseLinearProfile::ramp(-1e-9, 0.0, left, right).unwrap()
    }

    #[test]
    fn riemann_fluxes() {
        let q = PiecewiseCubicFlux::quadratic();
        assert_eq!(godunov_flux(&q, 1.0, -1.0), 0.5);
        assert_eq!(godunov_flux(&q, -1.0, 1.0), 0.0);
        let h = PiecewiseCubicFlux::paper();
        assert!((godunov_flux(&h, -1.5, 1.5) + 0.125).abs() < 1e-15);
        // downward jump picks the interior maximum
        let z = crate::flux::paper_argmax();
        assert!((godunov_flux(&h, 1.5, 0.5) - h.value(z)).abs() < 1e-15);
    }

    #[test]
    fn shock_moves_at_rankine_hugoniot_speed() {
        let q = PiecewiseCubicFlux::quadratic();
        let cfg = GodunovConfig::new((-2.0, 3.0), 1.0, 1000);
        let run = godunov_run(&q, &riemann(1.0, 0.0), &cfg).unwrap();
        let g = &run.grid;
        let last = g.last_row();
        let front = (0..g.nx() - 1).find(|&j| last[j] >= 0.5 && last[j + 1] < 0.5).unwrap();
        let pos = g.x_min + (front + 1) as f64 * g.dx;
        assert!((pos - 0.5).abs() <= g.dx, "front at {pos}");
        assert!(run.ledger.relative_error < 1e-10);
    }

    #[test]
    fn rarefaction_is_self_similar() {
        let q = PiecewiseCubicFlux::quadratic();
        let cfg = GodunovConfig::new((-2.0, 3.0), 1.0, 2000);
        let g = godunov_solve(&q, &riemann(0.0, 1.0), &cfg).unwrap();
        let v = g.interpolate_row(g.nt() - 1, 0.5);
        assert!((v - 0.5).abs() <= 5.0 * g.dx);
    }

    #[test]
    fn constants_are_preserved() {
        let h = PiecewiseCubicFlux::paper();
        let cfg = GodunovConfig::new((-1.0, 1.0), 0.5, 200);
        let g = godunov_solve(&h, &PiecewiseLinearProfile::constant(0.7), &cfg).unwrap();
        assert!(g.values.iter().flatten().all(|&v| (v - 0.7).abs() < 1e-15));
    }

    #[test]
    fn unpadded_domain_is_reported() {
        let q = PiecewiseCubicFlux::quadratic();
        let cfg = GodunovConfig::new((-1.0, 0.6), 2.0, 200);
        let err = godunov_solve(&q, &riemann(1.0, 0.0), &cfg).unwrap_err();
        assert!(matches!(err, Error::UnpaddedDomain { side: "right", .. }));
    }

    #[test]
    fn maximum_principle() {
        let h = PiecewiseCubicFlux::paper();
        let v0 = PiecewiseLinearProfile::symmetric_counterexample();
        let cfg = GodunovConfig::new((-4.0, 4.0), 0.8, 800);
        let g = godunov_solve(&h, &v0, &cfg).unwrap();
        assert!(g
            .values
            .iter()
            .flatten()
            .all(|&v| (-1.5 - 1e-12..=1.5 + 1e-12).contains(&v)));
    }

    #[test]
    fn validation() {
        let q = PiecewiseCubicFlux::quadratic();
        let v0 = PiecewiseLinearProfile::constant(0.0);
        let base = GodunovConfig::new((-1.0, 1.0), 1.0, 200);
        assert!(godunov_solve(&q, &v0, &base.clone().with_cfl(1.2)).is_err());
        let mut few = base;
        few.cells = 10;
        assert!(godunov_solve(&q, &v0, &few).is_err());
    }
}
