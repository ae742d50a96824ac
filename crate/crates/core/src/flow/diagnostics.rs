//! Straight-line flow `W` and the comparison diagnostics along flows.

use serde::{Deserialize, Serialize};

use super::ensemble::FlowEnsemble;
use crate::error::{Error, Result};
use crate::flux::PiecewiseCubicFlux;
use crate::profile::PiecewiseLinearProfile;

/// Relative slack on the determinant bound.
pub const DET_TOL: f64 = 1e-6;
/// Allowed decrease per step of `f - u` along `W`.
pub const MONOTONE_TOL: f64 = 1e-6;

/// `W(t, x) = x - t H'(u0'(x))`, with `u0'` given as a profile.
pub fn w_flow(flux: &PiecewiseCubicFlux, grad_u0: &PiecewiseLinearProfile, t: f64, x: f64) -> f64 {
    x - t * flux.deriv(grad_u0.value(x))
}

/// `1 / Lip(H'(u0'))`, capped by `cap` when given.
pub fn w_horizon(flux: &PiecewiseCubicFlux, grad_u0: &PiecewiseLinearProfile, cap: Option<f64>) -> f64 {
    let lip = grad_u0
        .pieces()
        .iter()
        .filter(|p| p.slope != 0.0)
        .map(|p| {
            let (a, b) = (p.slope * p.lo + p.intercept, p.slope * p.hi + p.intercept);
            p.slope.abs() * flux.max_abs_second_deriv(a.min(b), a.max(b))
        })
        .fold(0.0, f64::max);
    let h = if lip == 0.0 { f64::INFINITY } else { 1.0 / lip };
    cap.map_or(h, |c| c.min(h))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowDiagnostics {
    pub det_bound_ok: bool,
    /// `max (J^{-1} e^{-ct} - 1)`; at most `DET_TOL` when the bound holds.
    pub det_worst_margin: f64,
    /// Smallest `kappa` with `|X(x) - X(y)| >= |x - y| e^{-c t kappa}` on
    /// all sampled pairs.
    pub repulsion_kappa: f64,
    pub repulsion_ok: bool,
    /// Largest per-step decrease of `(f - u)(t, W(t, x))`.
    pub monotone_up_along_w: f64,
    pub monotone_up_ok: bool,
    /// Largest per-step increase of `(f - u)(t, X_eps(t, x))`; reported only.
    pub monotone_down_along_x: f64,
    /// Smallest `f - u` at the last sampled time.
    pub final_gap_min: f64,
    pub c_used: f64,
}

pub struct ComparisonInputs<'a> {
    pub f: &'a (dyn Fn(f64, f64) -> f64 + Sync),
    pub u: &'a (dyn Fn(f64, f64) -> f64 + Sync),
    /// The straight-line flow and its horizon.
    pub w: &'a (dyn Fn(f64, f64) -> f64 + Sync),
    pub w_horizon: f64,
    /// Times at which `f - u` is sampled along `W`.
    pub w_times: &'a [f64],
}

pub fn flow_diagnostics(ensemble: &FlowEnsemble, cmp: &ComparisonInputs<'_>, c: f64) -> Result<FlowDiagnostics> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::invalid(format!("c = {c} must be finite and non-negative")));
    }
    let t0 = ensemble.t_start;
    let mut det_worst = f64::NEG_INFINITY;
    for lj in &ensemble.log_jacobians {
        for (&l, &t) in lj.iter().zip(&ensemble.times) {
            det_worst = det_worst.max((-l - c * (t - t0)).exp() - 1.0);
        }
    }

    // repulsion over neighbouring starts, which bound all other pairs
    let mut order: Vec<usize> = (0..ensemble.starts.len()).collect();
    order.sort_by(|&a, &b| ensemble.starts[a].total_cmp(&ensemble.starts[b]));
    let mut kappa: f64 = 0.0;
    for w in order.windows(2) {
        let (i, j) = (w[0], w[1]);
        let d0 = ensemble.starts[j] - ensemble.starts[i];
        if d0 <= 0.0 {
            continue;
        }
        for (s, &t) in ensemble.times.iter().enumerate().skip(1) {
            let d = (ensemble.trajectories[j][s] - ensemble.trajectories[i][s]).abs();
            let shrink = (d0 / d).ln();
            if shrink > 0.0 {
                let ct = c * (t - t0);
                kappa = kappa.max(if ct > 0.0 { shrink / ct } else { f64::INFINITY });
            }
        }
    }

    let mut up: f64 = 0.0;
    let mut final_gap = f64::INFINITY;
    let times: Vec<f64> = cmp.w_times.iter().copied().filter(|&t| t < cmp.w_horizon).collect();
    for &x in &ensemble.starts {
        let gaps: Vec<f64> = times
            .iter()
            .map(|&t| {
                let y = (cmp.w)(t, x);
                (cmp.f)(t, y) - (cmp.u)(t, y)
            })
            .collect();
        for g in gaps.windows(2) {
            up = up.max(g[0] - g[1]);
        }
        if let Some(&g) = gaps.last() {
            final_gap = final_gap.min(g);
        }
    }

    let mut down: f64 = 0.0;
    for tr in &ensemble.trajectories {
        let gaps: Vec<f64> = tr
            .iter()
            .zip(&ensemble.times)
            .map(|(&y, &t)| (cmp.f)(t, y) - (cmp.u)(t, y))
            .collect();
        for g in gaps.windows(2) {
            down = down.max(g[1] - g[0]);
        }
    }

    Ok(FlowDiagnostics {
        det_bound_ok: det_worst <= DET_TOL,
        det_worst_margin: det_worst,
        repulsion_kappa: kappa,
        // separation follows from the determinant bound with kappa = 1
        repulsion_ok: kappa <= 1.0 + DET_TOL,
        monotone_up_along_w: up,
        monotone_up_ok: up <= MONOTONE_TOL,
        monotone_down_along_x: down,
        final_gap_min: final_gap,
        c_used: c,
    })
}

/// Fraction of a uniform start grid that lands in `[a, b]` at sample `s`,
/// with the bound `e^{ct} |A| / span + 3 / sqrt(N)`.
pub fn preimage_fraction(ensemble: &FlowEnsemble, s: usize, target: (f64, f64), c: f64) -> (f64, f64) {
    let n = ensemble.starts.len() as f64;
    let hits = ensemble
        .trajectories
        .iter()
        .filter(|tr| tr[s] >= target.0 && tr[s] <= target.1)
        .count() as f64;
    let (lo, hi) = ensemble
        .starts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let t = ensemble.times[s] - ensemble.t_start;
    let bound = (c * t).exp() * (target.1 - target.0) / (hi - lo) + 3.0 / n.sqrt();
    (hits / n, bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::ensemble::integrate_flow;
    use crate::flow::field::{mollify_profile, Potential};
    use approx::assert_abs_diff_eq;
    use std::sync::Arc;

    fn quad_x() -> PiecewiseLinearProfile {
        PiecewiseLinearProfile::new(vec![-50.0, 50.0], vec![-50.0, 50.0], -50.0, 50.0).unwrap()
    }

    #[test]
    fn w_flow_examples() {
        let h = PiecewiseCubicFlux::quadratic();
        let g = quad_x();
        for &x in &[-2.0, 0.3, 1.0] {
            assert_eq!(w_flow(&h, &g, 0.0, x), x);
            assert_abs_diff_eq!(w_flow(&h, &g, 0.4, x), x * 0.6, epsilon = 1e-12);
            // u_x(t, W) = W / (1 - t) = x along the flow
            for &t in &[0.1, 0.5, 0.9] {
                assert_abs_diff_eq!(w_flow(&h, &g, t, x) / (1.0 - t), x, epsilon = 1e-12);
            }
        }
        assert_abs_diff_eq!(w_horizon(&h, &g, None), 1.0, epsilon = 1e-15);
        assert_eq!(w_horizon(&h, &g, Some(0.5)), 0.5);
        let v0 = PiecewiseLinearProfile::symmetric_counterexample();
        assert_abs_diff_eq!(
            w_horizon(&PiecewiseCubicFlux::paper(), &v0, None),
            2.0 / 13.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn linear_field_bound_is_tight() {
        let k = 0.8;
        let m = mollify_profile(
            Potential::Function(Arc::new(move |_, x: f64| 0.5 * k * x * x)),
            &PiecewiseCubicFlux::quadratic(),
            0.1,
        )
        .unwrap();
        let starts: Vec<f64> = (0..11).map(|i| -1.0 + 0.2 * i as f64).collect();
        let e = integrate_flow(&m, &starts, 0.0, 1.0, 0.01).unwrap();
        let zero = |_: f64, _: f64| 0.0;
        let id = |_: f64, x: f64| x;
        let cmp = ComparisonInputs {
            f: &zero,
            u: &zero,
            w: &id,
            w_horizon: 1.0,
            w_times: &[0.0, 0.5],
        };
        let d = flow_diagnostics(&e, &cmp, k).unwrap();
        assert!(d.det_bound_ok);
        assert!(d.det_worst_margin.abs() < 1e-9);
        assert_abs_diff_eq!(d.repulsion_kappa, 1.0, epsilon = 1e-8);
        assert!(d.repulsion_ok);
        assert_eq!(d.monotone_up_along_w, 0.0);
        let smaller = flow_diagnostics(&e, &cmp, 0.5 * k).unwrap();
        assert!(!smaller.det_bound_ok);
    }

    #[test]
    fn preimage_fraction_under_contraction() {
        let m = mollify_profile(
            Potential::Function(Arc::new(|_, x: f64| 0.25 * x * x)),
            &PiecewiseCubicFlux::quadratic(),
            0.1,
        )
        .unwrap();
        let starts: Vec<f64> = (0..401).map(|i| -2.0 + 0.01 * i as f64).collect();
        let e = integrate_flow(&m, &starts, 0.0, 1.0, 0.01).unwrap();
        let last = e.times.len() - 1;
        let (frac, bound) = preimage_fraction(&e, last, (-0.2, 0.2), 0.5);
        assert!(frac <= bound, "{frac} > {bound}");
        assert!(frac > 0.1);
    }
}
