//! Hopf-Lax formula for `u_t - H(u_x) = 0` with convex `H`.
//!
//! With `w = -u` the equation becomes `w_t + H(-w_x) = 0`, whose Lax-Oleinik
//! solution is `w = inf_y [w0(y) + t L((x - y)/t)]` for the Lagrangian of
//! `p -> H(-p)`. Undoing both sign flips gives
//! `u(t, x) = sup_y [u0(y) - t H*((y - x)/t)]`.

use crate::error::{Error, Result};
use crate::flux::{ConvexConjugate, PiecewiseCubicFlux};
use crate::optimize::{bracketed_max, golden_max};

const SCAN_NODES: usize = 401;

/// Reusable evaluator: the conjugate bracket is the slope range of `u0`.
#[derive(Clone, Debug)]
pub struct HopfLax<'a> {
    conjugate: ConvexConjugate<'a>,
    search: (f64, f64),
    tol: f64,
}

impl<'a> HopfLax<'a> {
    pub fn new(flux: &'a PiecewiseCubicFlux, slope_range: (f64, f64), search: (f64, f64), tol: f64) -> Result<Self> {
        if !(search.1 > search.0) {
            return Err(Error::invalid(format!(
                "search interval [{}, {}] is empty",
                search.0, search.1
            )));
        }
        if !(tol > 0.0) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        Ok(Self {
            conjugate: ConvexConjugate::new(flux, slope_range.0, slope_range.1)?,
            search,
            tol,
        })
    }

    pub fn conjugate(&self) -> &ConvexConjugate<'a> {
        &self.conjugate
    }

    /// Maximizer `y*` and value `u(t, x)`.
    pub fn solve<F: Fn(f64) -> f64>(&self, u0: F, t: f64, x: f64) -> Result<(f64, f64)> {
        if !(t > 0.0) {
            return Err(Error::invalid(format!("Hopf-Lax needs t > 0, got {t}")));
        }
        let inner_tol = 1e-3 * self.tol;
        let objective = |y: f64| u0(y) - t * self.conjugate.eval((y - x) / t, inner_tol);
        let (lo, hi) = self.search;
        let (y, mut v) = bracketed_max(objective, lo, hi, SCAN_NODES, self.tol);
        if y - lo <= self.tol || hi - y <= self.tol {
            return Err(Error::SearchIntervalTooSmall { lo, hi, argmax: y });
        }
        // polish the value with a tight local search around y*
        let h = (hi - lo) / (SCAN_NODES - 1) as f64;
        let (_, polished) = golden_max(objective, (y - h).max(lo), (y + h).min(hi), 1e-3 * self.tol);
        v = v.max(polished);
        Ok((y, v))
    }

    pub fn eval<F: Fn(f64) -> f64>(&self, u0: F, t: f64, x: f64) -> Result<f64> {
        self.solve(u0, t, x).map(|(_, v)| v)
    }
}

/// `u(t, x) = sup_y [u0(y) - t H*((y - x)/t)]` with `H*` restricted to the
/// slope range of `u0`, estimated from difference quotients on the search
/// interval.
pub fn hopf_lax_eval<F: Fn(f64) -> f64>(
    flux: &PiecewiseCubicFlux,
    u0: F,
    t: f64,
    x: f64,
    search_interval: (f64, f64),
    tol: f64,
) -> Result<f64> {
    let (lo, hi) = search_interval;
    let n = 4 * SCAN_NODES;
    let h = (hi - lo) / n as f64;
    let mut lip: f64 = 0.0;
    let mut prev = u0(lo);
    for i in 1..=n {
        let cur = u0(lo + i as f64 * h);
        lip = lip.max(((cur - prev) / h).abs());
        prev = cur;
    }
    let half = lip * 1.05 + 1e-6;
    HopfLax::new(flux, (-half, half), search_interval, tol)?.eval(u0, t, x)
}
