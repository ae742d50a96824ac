use super::PiecewiseCubicFlux;
use crate::error::{Error, Result};
use crate::optimize::golden_max;

const CONCAVITY_PROBES: usize = 64;

/// Legendre-Fenchel conjugate of a flux restricted to a compact bracket,
/// `H*(q) = sup_{p in [lo, hi]} (p q - H(p))`.
///
/// Construction verifies that the objective is concave on the bracket, so
/// repeated evaluations (as inside the Hopf-Lax formula) pay for the check
/// once.
#[derive(Clone, Debug)]
pub struct ConvexConjugate<'a> {
    flux: &'a PiecewiseCubicFlux,
    lo: f64,
    hi: f64,
}

impl<'a> ConvexConjugate<'a> {
    pub fn new(flux: &'a PiecewiseCubicFlux, lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::invalid(format!("conjugate bracket [{lo}, {hi}] is empty")));
        }
        // second differences of p q - H(p) do not depend on q
        let h = (hi - lo) / CONCAVITY_PROBES as f64;
        let scale = flux
            .value(lo)
            .abs()
            .max(flux.value(hi).abs())
            .max(flux.value(0.5 * (lo + hi)).abs())
            .max(1.0);
        for i in 1..CONCAVITY_PROBES {
            let p = lo + i as f64 * h;
            let d2 = -(flux.value(p + h) - 2.0 * flux.value(p) + flux.value(p - h));
            if d2 > 1e-10 * h * h + 64.0 * f64::EPSILON * scale {
                return Err(Error::NonConcaveObjective {
                    lo,
                    hi,
                    at: p,
                    second_difference: d2,
                });
            }
        }
        Ok(Self { flux, lo, hi })
    }

    pub fn bracket(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Value of the conjugate at `q`; `tol` bounds the maximizer location.
    pub fn eval(&self, q: f64, tol: f64) -> f64 {
        let tol = tol.min(1e-9 * (self.hi - self.lo));
        let (_, v) = golden_max(|p| p * q - self.flux.value(p), self.lo, self.hi, tol);
        v
    }

    /// Maximizing slope `p*(q)`.
    pub fn argmax(&self, q: f64, tol: f64) -> f64 {
        let tol = tol.min(1e-9 * (self.hi - self.lo));
        golden_max(|p| p * q - self.flux.value(p), self.lo, self.hi, tol).0
    }
}

pub fn legendre_conjugate(flux: &PiecewiseCubicFlux, q: f64, interval: (f64, f64), tol: f64) -> Result<f64> {
    Ok(ConvexConjugate::new(flux, interval.0, interval.1)?.eval(q, tol))
}
