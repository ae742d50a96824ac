//! Piecewise cubic fluxes (Hamiltonians) in one variable.
//!
//! A flux is stored as ordered breakpoints plus one cubic per interval,
//! including the two unbounded end intervals. At a breakpoint the value of
//! the left segment is returned.

mod conjugate;
mod theta;

pub use conjugate::{legendre_conjugate, ConvexConjugate};
pub use theta::{theta_slice, theta_slice_analysis, DoubleWellReport};

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::quadratic_roots;

/// Tolerance used for the breakpoint smoothness check.
pub const SMOOTHNESS_TOL: f64 = 1e-12;

/// Cubic coefficients `(c3, c2, c1, c0)` of `c3 p^3 + c2 p^2 + c1 p + c0`.
pub type Cubic = [f64; 4];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseCubicFlux {
    pub breakpoints: Vec<f64>,
    pub segments: Vec<Cubic>,
    #[serde(default = "default_smoothness")]
    pub declared_smoothness: u8,
    #[serde(skip)]
    exact: Option<ExactCoefficients>,
}

fn default_smoothness() -> u8 {
    2
}

#[derive(Clone, Debug, PartialEq)]
struct ExactCoefficients {
    breakpoints: Vec<Rational64>,
    segments: Vec<[Rational64; 4]>,
}

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

fn to_f64(q: Rational64) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

#[inline]
fn cubic_eval(c: &Cubic, p: f64, order: u8) -> f64 {
    let [c3, c2, c1, c0] = *c;
    match order {
        0 => ((c3 * p + c2) * p + c1) * p + c0,
        1 => (3.0 * c3 * p + 2.0 * c2) * p + c1,
        2 => 6.0 * c3 * p + 2.0 * c2,
        3 => 6.0 * c3,
        _ => 0.0,
    }
}

fn cubic_eval_exact(c: &[Rational64; 4], p: Rational64, order: u8) -> Rational64 {
    let [c3, c2, c1, c0] = *c;
    match order {
        0 => ((c3 * p + c2) * p + c1) * p + c0,
        1 => (r(3, 1) * c3 * p + r(2, 1) * c2) * p + c1,
        2 => r(6, 1) * c3 * p + r(2, 1) * c2,
        3 => r(6, 1) * c3,
        _ => r(0, 1),
    }
}

/// Summary of the convexity of a flux on a compact interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub interval: [f64; 2],
    pub is_convex: bool,
    pub is_strictly_convex: bool,
    pub inflection_points: Vec<f64>,
    pub argmax_on_interval: f64,
    pub max_value: f64,
}

impl PiecewiseCubicFlux {
    /// Builds a flux and checks its structural invariants together with the
    /// declared continuity order at every breakpoint.
    pub fn new(breakpoints: Vec<f64>, segments: Vec<Cubic>, declared_smoothness: u8) -> Result<Self> {
        let flux = Self {
            breakpoints,
            segments,
            declared_smoothness,
            exact: None,
        };
        flux.validate()?;
        Ok(flux)
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.len() != self.breakpoints.len() + 1 {
            return Err(Error::invalid(format!(
                "{} breakpoints need {} segments, got {}",
                self.breakpoints.len(),
                self.breakpoints.len() + 1,
                self.segments.len()
            )));
        }
        if self.breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("breakpoints must be strictly increasing"));
        }
        if self
            .breakpoints
            .iter()
            .chain(self.segments.iter().flatten())
            .any(|v| !v.is_finite())
        {
            return Err(Error::invalid("flux data must be finite"));
        }
        let gaps = self.breakpoint_gaps();
        for (i, gap) in gaps.iter().enumerate() {
            for (order, &jump) in gap
                .iter()
                .enumerate()
                .take(self.declared_smoothness.min(2) as usize + 1)
            {
                if jump > SMOOTHNESS_TOL {
                    return Err(Error::invalid(format!(
                        "derivative of order {order} jumps by {:e} at breakpoint {}",
                        jump, self.breakpoints[i]
                    )));
                }
            }
        }
        Ok(())
    }

    /// The non-convex even Hamiltonian of the counter-example, assembled from
    /// exact rational coefficients.
    pub fn paper() -> Self {
        let exact = ExactCoefficients {
            breakpoints: vec![r(-1, 2), r(1, 2)],
            segments: vec![
                [r(5, 4), r(19, 8), r(15, 16), r(5, 32)],
                [r(0, 1), r(1, 2), r(0, 1), r(0, 1)],
                [r(-5, 4), r(19, 8), r(-15, 16), r(5, 32)],
            ],
        };
        Self::from_exact(exact)
    }

    /// `H(p) = p^2 / 2`, the convex control.
    pub fn quadratic() -> Self {
        Self::from_exact(ExactCoefficients {
            breakpoints: vec![],
            segments: vec![[r(0, 1), r(1, 2), r(0, 1), r(0, 1)]],
        })
    }

    fn from_exact(exact: ExactCoefficients) -> Self {
        let flux = Self {
            breakpoints: exact.breakpoints.iter().copied().map(to_f64).collect(),
            segments: exact
                .segments
                .iter()
                .map(|s| [to_f64(s[0]), to_f64(s[1]), to_f64(s[2]), to_f64(s[3])])
                .collect(),
            declared_smoothness: 2,
            exact: Some(exact),
        };
        debug_assert!(flux.validate().is_ok());
        flux
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let flux: Self = serde_json::from_str(s)?;
        flux.validate()?;
        Ok(flux)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("flux serializes")
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Index of the segment used at `p`; breakpoints belong to the segment on
    /// their left.
    #[inline]
    pub fn segment_index(&self, p: f64) -> usize {
        self.breakpoints.partition_point(|&b| b < p)
    }

    /// Derivative of order `order` at `p` (order 0 is the value).
    #[inline]
    pub fn eval(&self, p: f64, order: u8) -> f64 {
        cubic_eval(&self.segments[self.segment_index(p)], p, order)
    }

    #[inline]
    pub fn value(&self, p: f64) -> f64 {
        self.eval(p, 0)
    }

    #[inline]
    pub fn deriv(&self, p: f64) -> f64 {
        self.eval(p, 1)
    }

    #[inline]
    pub fn second_deriv(&self, p: f64) -> f64 {
        self.eval(p, 2)
    }

    /// Exact evaluation, available for fluxes built from rational coefficients.
    pub fn eval_exact(&self, p: Rational64, order: u8) -> Option<Rational64> {
        let exact = self.exact.as_ref()?;
        let idx = exact.breakpoints.partition_point(|&b| b < p);
        Some(cubic_eval_exact(&exact.segments[idx], p, order))
    }

    /// One-sided mismatch `[|dH0|, |dH1|, |dH2|]` at each breakpoint.
    pub fn breakpoint_gaps(&self) -> Vec<[f64; 3]> {
        self.breakpoints
            .iter()
            .enumerate()
            .map(|(i, &b)| {
                let (l, rgt) = (&self.segments[i], &self.segments[i + 1]);
                [0u8, 1, 2].map(|k| (cubic_eval(l, b, k) - cubic_eval(rgt, b, k)).abs())
            })
            .collect()
    }

    /// Pieces `(lo, hi, segment)` of the flux restricted to `[lo, hi]`.
    pub fn pieces_on(&self, lo: f64, hi: f64) -> Vec<(f64, f64, usize)> {
        let mut cuts = vec![lo];
        cuts.extend(self.breakpoints.iter().copied().filter(|&b| b > lo && b < hi));
        cuts.push(hi.max(lo));
        cuts.windows(2)
            .map(|w| (w[0], w[1], self.segment_index(0.5 * (w[0] + w[1]))))
            .collect()
    }

    /// Minimum and maximum of the flux on `[lo, hi]`, from endpoints and the
    /// exact critical points of each cubic piece. Returns `((pmin, hmin), (pmax, hmax))`.
    pub fn extrema_on(&self, lo: f64, hi: f64) -> ((f64, f64), (f64, f64)) {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let v = self.value(lo);
        let mut min = (lo, v);
        let mut max = (lo, v);
        let mut consider = |p: f64, v: f64| {
            if v < min.1 {
                min = (p, v);
            }
            if v > max.1 {
                max = (p, v);
            }
        };
        consider(hi, self.value(hi));
        let (first, last) = (self.segment_index(lo), self.segment_index(hi));
        for k in first..=last {
            let a = if k == 0 { lo } else { lo.max(self.breakpoints[k - 1]) };
            let b = if k == self.breakpoints.len() {
                hi
            } else {
                hi.min(self.breakpoints[k])
            };
            let c = &self.segments[k];
            if k > first {
                consider(a, cubic_eval(c, a, 0));
            }
            if c[0] == 0.0 {
                if c[1] != 0.0 {
                    let p = -c[2] / (2.0 * c[1]);
                    if p > a && p < b {
                        consider(p, cubic_eval(c, p, 0));
                    }
                }
                continue;
            }
            for root in quadratic_roots(3.0 * c[0], 2.0 * c[1], c[2]) {
                if root > a && root < b {
                    consider(root, cubic_eval(c, root, 0));
                }
            }
        }
        (min, max)
    }

    /// Largest `|H'|` on `[lo, hi]`.
    pub fn max_abs_deriv(&self, lo: f64, hi: f64) -> f64 {
        let mut best = self.deriv(lo).abs().max(self.deriv(hi).abs());
        for (a, b, k) in self.pieces_on(lo, hi) {
            let c = &self.segments[k];
            best = best.max(cubic_eval(c, a, 1).abs()).max(cubic_eval(c, b, 1).abs());
            if c[0] != 0.0 {
                let p = -c[1] / (3.0 * c[0]);
                if p > a && p < b {
                    best = best.max(cubic_eval(c, p, 1).abs());
                }
            }
        }
        best
    }

    /// Largest `|H''|` on `[lo, hi]` (H'' is piecewise linear).
    pub fn max_abs_second_deriv(&self, lo: f64, hi: f64) -> f64 {
        self.pieces_on(lo, hi)
            .into_iter()
            .flat_map(|(a, b, k)| {
                let c = self.segments[k];
                [cubic_eval(&c, a, 2).abs(), cubic_eval(&c, b, 2).abs()]
            })
            .fold(0.0, f64::max)
    }

    pub fn convexity_report(&self, lo: f64, hi: f64) -> Result<ConvexityReport> {
        if !(lo < hi) {
            return Err(Error::invalid(format!("empty interval [{lo}, {hi}]")));
        }
        let mut inflections: Vec<f64> = Vec::new();
        let mut min_second = f64::INFINITY;
        let mut flat_piece = false;
        let mut argmax = (lo, self.value(lo));
        let hv = self.value(hi);
        if hv > argmax.1 {
            argmax = (hi, hv);
        }
        for (a, b, k) in self.pieces_on(lo, hi) {
            let c = &self.segments[k];
            let (sa, sb) = (cubic_eval(c, a, 2), cubic_eval(c, b, 2));
            min_second = min_second.min(sa).min(sb);
            let (slope, intercept) = (6.0 * c[0], 2.0 * c[1]);
            if slope == 0.0 {
                if intercept == 0.0 && b > a {
                    flat_piece = true;
                }
            } else {
                let root = -intercept / slope;
                if root > lo && root < hi && root >= a && root <= b {
                    inflections.push(root);
                }
            }
            for root in quadratic_roots(3.0 * c[0], 2.0 * c[1], c[2]) {
                if root > a && root < b {
                    let v = cubic_eval(c, root, 0);
                    if v > argmax.1 {
                        argmax = (root, v);
                    }
                }
            }
        }
        inflections.sort_by(f64::total_cmp);
        inflections.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
        let is_convex = min_second >= -SMOOTHNESS_TOL;
        Ok(ConvexityReport {
            interval: [lo, hi],
            is_convex,
            is_strictly_convex: is_convex && !flat_piece && inflections.is_empty(),
            inflection_points: inflections,
            argmax_on_interval: argmax.0,
            max_value: argmax.1,
        })
    }

    /// `H(q) - [H(p) + H'(p)(q - p)]`: height of the graph above the tangent at `p`.
    pub fn tangent_gap(&self, p: f64, q: f64) -> f64 {
        self.value(q) - (self.value(p) + self.deriv(p) * (q - p))
    }

    pub fn tangent_gap_exact(&self, p: Rational64, q: Rational64) -> Option<Rational64> {
        Some(self.eval_exact(q, 0)? - (self.eval_exact(p, 0)? + self.eval_exact(p, 1)? * (q - p)))
    }
}

/// Exact location of the maximum of the paper flux on `[1/2, 3/2]`, the larger
/// root of `60 p^2 - 76 p + 15`.
pub fn paper_argmax() -> f64 {
    (76.0 + 8.0 * 34f64.sqrt()) / 120.0
}
