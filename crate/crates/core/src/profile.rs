//! Continuous piecewise linear initial data with constant extensions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinearProfile {
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
    pub left_extension: f64,
    pub right_extension: f64,
}

/// Linear piece `value = slope * x + intercept` on `[lo, hi]` (ends may be infinite).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearPiece {
    pub lo: f64,
    pub hi: f64,
    pub slope: f64,
    pub intercept: f64,
}

impl LinearPiece {
    #[inline]
    pub fn at(&self, x: f64) -> f64 {
        if self.slope == 0.0 {
            self.intercept
        } else {
            self.slope * x + self.intercept
        }
    }
}

impl PiecewiseLinearProfile {
    pub fn new(knots: Vec<f64>, values: Vec<f64>, left_extension: f64, right_extension: f64) -> Result<Self> {
        let p = Self {
            knots,
            values,
            left_extension,
            right_extension,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.knots.is_empty() || self.knots.len() != self.values.len() {
            return Err(Error::invalid("profile needs matching, non-empty knots and values"));
        }
        if self.knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("profile knots must be strictly increasing"));
        }
        let all = self
            .knots
            .iter()
            .chain(&self.values)
            .chain([&self.left_extension, &self.right_extension]);
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("profile data must be finite"));
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }

    /// Initial datum of the counter-example with ramp position `l`:
    /// `-3/2` plateau, identity ramp on `[-3/2, 3/2]`, `3/2` plateau up to `l`,
    /// descending ramp to `1/2` on `[l, l + 1]`.
    pub fn counterexample(l: f64) -> Result<Self> {
        if !(l > 1.5) {
            return Err(Error::invalid(format!("ramp position L = {l} must exceed 3/2")));
        }
        Self::new(vec![-1.5, 1.5, l, l + 1.0], vec![-1.5, 1.5, 1.5, 0.5], -1.5, 0.5)
    }

    /// The counter-example datum with the descending ramp pushed to infinity.
    pub fn symmetric_counterexample() -> Self {
        Self::new(vec![-1.5, 1.5], vec![-1.5, 1.5], -1.5, 1.5).expect("valid")
    }

    /// `v(x) = hi` for `x <= a`, linear down to `lo` at `b`, `lo` afterwards.
    pub fn ramp(a: f64, b: f64, left: f64, right: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![left, right], left, right)
    }

    pub fn constant(k: f64) -> Self {
        Self::new(vec![0.0], vec![k], k, k).expect("valid")
    }

    /// `-v`, e.g. the gradient `u0' = -v0` of the HJ datum.
    pub fn negated(&self) -> Self {
        Self {
            knots: self.knots.clone(),
            values: self.values.iter().map(|v| -v).collect(),
            left_extension: -self.left_extension,
            right_extension: -self.right_extension,
        }
    }

    pub fn is_continuous(&self) -> bool {
        self.left_extension == self.values[0] && self.right_extension == *self.values.last().unwrap()
    }

    /// All linear pieces including the unbounded ends, in order.
    pub fn pieces(&self) -> Vec<LinearPiece> {
        let n = self.knots.len();
        let mut out = Vec::with_capacity(n + 1);
        out.push(LinearPiece {
            lo: f64::NEG_INFINITY,
            hi: self.knots[0],
            slope: 0.0,
            intercept: self.left_extension,
        });
        for i in 0..n - 1 {
            let (x0, x1) = (self.knots[i], self.knots[i + 1]);
            let (v0, v1) = (self.values[i], self.values[i + 1]);
            let slope = (v1 - v0) / (x1 - x0);
            out.push(LinearPiece {
                lo: x0,
                hi: x1,
                slope,
                intercept: v0 - slope * x0,
            });
        }
        out.push(LinearPiece {
            lo: self.knots[n - 1],
            hi: f64::INFINITY,
            slope: 0.0,
            intercept: self.right_extension,
        });
        out
    }

    pub fn value(&self, x: f64) -> f64 {
        let n = self.knots.len();
        if x <= self.knots[0] {
            return if x < self.knots[0] {
                self.left_extension
            } else {
                self.values[0]
            };
        }
        if x >= self.knots[n - 1] {
            return if x > self.knots[n - 1] {
                self.right_extension
            } else {
                self.values[n - 1]
            };
        }
        let i = self.knots.partition_point(|&k| k <= x) - 1;
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let w = (x - x0) / (x1 - x0);
        self.values[i] + w * (self.values[i + 1] - self.values[i])
    }

    /// Slope of the piece containing `x` (the right piece at a knot).
    pub fn slope(&self, x: f64) -> f64 {
        let n = self.knots.len();
        if x < self.knots[0] || x >= self.knots[n - 1] {
            return 0.0;
        }
        let i = self.knots.partition_point(|&k| k <= x) - 1;
        (self.values[i + 1] - self.values[i]) / (self.knots[i + 1] - self.knots[i])
    }

    pub fn lipschitz(&self) -> f64 {
        self.pieces().iter().map(|p| p.slope.abs()).fold(0.0, f64::max)
    }

    pub fn value_range(&self) -> (f64, f64) {
        self.values
            .iter()
            .chain([&self.left_extension, &self.right_extension])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Exact `\int_a^b v(x) dx`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if b < a {
            return -self.integral(b, a);
        }
        self.pieces()
            .iter()
            .filter_map(|p| {
                let lo = p.lo.max(a);
                let hi = p.hi.min(b);
                (hi > lo).then(|| 0.5 * (p.at(lo) + p.at(hi)) * (hi - lo))
            })
            .sum()
    }

    /// Total variation.
    pub fn total_variation(&self) -> f64 {
        let mut tv = (self.values[0] - self.left_extension).abs()
            + (self.right_extension - self.values[self.values.len() - 1]).abs();
        tv += self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>();
        tv
    }
}
