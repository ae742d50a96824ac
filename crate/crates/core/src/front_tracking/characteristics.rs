//! The straight-line characteristic map `X^t(x) = x + t H'(v0(x))`.
//!
//! On each linear piece of `v0` and each cubic segment of `H` the map is a
//! quadratic in `x`, so foot points are found as exact quadratic roots.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::PiecewiseCubicFlux;
use crate::optimize::{golden_min, quadratic_roots};
use crate::profile::PiecewiseLinearProfile;

const ROOT_SLACK: f64 = 1e-12;

/// `v0 = m x + b` on `[lo, hi]` with `H'(v) = q2 v^2 + q1 v + q0` there.
#[derive(Clone, Copy, Debug)]
struct SubPiece {
    lo: f64,
    hi: f64,
    m: f64,
    b: f64,
    q2: f64,
    q1: f64,
    q0: f64,
}

impl SubPiece {
    #[inline]
    fn v(&self, x: f64) -> f64 {
        if self.m == 0.0 {
            self.b
        } else {
            self.m * x + self.b
        }
    }

    /// `d/dx H'(v0(x))`, linear in `x`.
    #[inline]
    fn speed_slope(&self, x: f64) -> f64 {
        (2.0 * self.q2 * self.v(x) + self.q1) * self.m
    }

    fn contains(&self, x: f64) -> bool {
        let tol = ROOT_SLACK * (1.0 + x.abs());
        x >= self.lo - tol && x <= self.hi + tol
    }
}

/// A maximal foot interval on which characteristics converge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompressiveCluster {
    pub x_lo: f64,
    pub x_hi: f64,
    /// First time two characteristics from the cluster meet.
    pub t_c: f64,
    /// Foot point where the focusing happens first.
    pub x_c: f64,
}

#[derive(Clone, Debug)]
pub struct CharacteristicMap {
    flux: PiecewiseCubicFlux,
    v0: PiecewiseLinearProfile,
    pieces: Vec<SubPiece>,
}

impl CharacteristicMap {
    pub fn new(flux: &PiecewiseCubicFlux, v0: &PiecewiseLinearProfile) -> Self {
        let mut pieces = Vec::new();
        for p in v0.pieces() {
            if p.slope == 0.0 {
                let c = flux.segments[flux.segment_index(p.intercept)];
                pieces.push(SubPiece {
                    lo: p.lo,
                    hi: p.hi,
                    m: 0.0,
                    b: p.intercept,
                    q2: 3.0 * c[0],
                    q1: 2.0 * c[1],
                    q0: c[2],
                });
                continue;
            }
            // cut the x-interval where v crosses a flux breakpoint
            let mut cuts = vec![p.lo];
            let mut inner: Vec<f64> = flux
                .breakpoints
                .iter()
                .map(|&beta| (beta - p.intercept) / p.slope)
                .filter(|&x| x > p.lo && x < p.hi)
                .collect();
            inner.sort_by(f64::total_cmp);
            cuts.extend(inner);
            cuts.push(p.hi);
            for w in cuts.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                let c = flux.segments[flux.segment_index(p.slope * mid + p.intercept)];
                pieces.push(SubPiece {
                    lo: w[0],
                    hi: w[1],
                    m: p.slope,
                    b: p.intercept,
                    q2: 3.0 * c[0],
                    q1: 2.0 * c[1],
                    q0: c[2],
                });
            }
        }
        Self {
            flux: flux.clone(),
            v0: v0.clone(),
            pieces,
        }
    }

    pub fn flux(&self) -> &PiecewiseCubicFlux {
        &self.flux
    }

    pub fn profile(&self) -> &PiecewiseLinearProfile {
        &self.v0
    }

    /// Characteristic speed `H'(v0(x))`.
    pub fn speed(&self, x: f64) -> f64 {
        self.flux.deriv(self.v0.value(x))
    }

    pub fn position(&self, t: f64, x: f64) -> f64 {
        x + t * self.speed(x)
    }

    /// All foot points `x` with `X^t(x) = y`, ascending.
    pub fn feet(&self, t: f64, y: f64) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::with_capacity(4);
        for sp in &self.pieces {
            // X^t(x) - y = a x^2 + b x + c on the sub-piece
            let a = t * sp.q2 * sp.m * sp.m;
            let b = 1.0 + t * (2.0 * sp.q2 * sp.m * sp.b + sp.q1 * sp.m);
            let c = t * ((sp.q2 * sp.b + sp.q1) * sp.b + sp.q0) - y;
            let scale = a.abs().max(b.abs()).max(c.abs());
            if scale <= 1e-15 * (1.0 + y.abs()) {
                // the whole sub-piece focuses onto y
                out.extend([sp.lo, sp.hi].into_iter().filter(|x| x.is_finite()));
                continue;
            }
            for r in quadratic_roots(a, b, c) {
                if sp.contains(r) {
                    out.push(r.clamp(sp.lo, sp.hi));
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup_by(|x, y| (*x - *y).abs() <= ROOT_SLACK * (1.0 + x.abs()));
        out
    }

    /// Compressive foot intervals, where `d/dx H'(v0(x)) < 0`, with the
    /// time and foot of their first crossing.
    pub fn clusters(&self) -> Vec<CompressiveCluster> {
        let mut out: Vec<CompressiveCluster> = Vec::new();
        for sp in &self.pieces {
            if sp.m == 0.0 || !sp.lo.is_finite() || !sp.hi.is_finite() {
                continue;
            }
            let (ca, cb) = (sp.speed_slope(sp.lo), sp.speed_slope(sp.hi));
            // c' is linear on the sub-piece: keep the negative part
            let (lo, hi) = match (ca < 0.0, cb < 0.0) {
                (false, false) => continue,
                (true, true) => (sp.lo, sp.hi),
                (true, false) => (sp.lo, sp.lo + (sp.hi - sp.lo) * ca / (ca - cb)),
                (false, true) => (sp.lo + (sp.hi - sp.lo) * ca / (ca - cb), sp.hi),
            };
            let (x_c, worst) = if sp.speed_slope(lo) <= sp.speed_slope(hi) {
                (lo, sp.speed_slope(lo))
            } else {
                (hi, sp.speed_slope(hi))
            };
            let t_c = -1.0 / worst;
            match out.last_mut() {
                Some(prev) if (lo - prev.x_hi).abs() <= ROOT_SLACK * (1.0 + lo.abs()) => {
                    prev.x_hi = hi;
                    if t_c < prev.t_c {
                        prev.t_c = t_c;
                        prev.x_c = x_c;
                    }
                }
                _ => out.push(CompressiveCluster {
                    x_lo: lo,
                    x_hi: hi,
                    t_c,
                    x_c,
                }),
            }
        }
        out
    }
}

/// `X^t(x) = x + t H'(v0(x))`.
pub fn characteristic_position(flux: &PiecewiseCubicFlux, v0: &PiecewiseLinearProfile, t: f64, x: f64) -> f64 {
    x + t * flux.deriv(v0.value(x))
}

/// Counter-example datum with ramp position `l`.
pub fn build_initial_profile(l: f64) -> Result<PiecewiseLinearProfile> {
    PiecewiseLinearProfile::counterexample(l)
}

/// Earliest focusing time `inf -1/c'(x)` over a scan of `c(x) = H'(v0(x))`,
/// refined locally. Returns `(t_c, x_c)`.
pub fn first_crossing(
    flux: &PiecewiseCubicFlux,
    v0: &PiecewiseLinearProfile,
    scan_interval: (f64, f64),
    n_scan: usize,
) -> Result<(f64, f64)> {
    if n_scan < 1000 {
        return Err(Error::invalid("first_crossing needs at least 1000 scan points"));
    }
    let (lo, hi) = scan_interval;
    if !(hi > lo) {
        return Err(Error::invalid("empty scan interval"));
    }
    // right-sided derivative of c; positive infinity where c does not decrease
    let focus_time = |x: f64| {
        let d = flux.second_deriv(v0.value(x)) * v0.slope(x);
        if d < 0.0 {
            -1.0 / d
        } else {
            f64::INFINITY
        }
    };
    let h = (hi - lo) / (n_scan - 1) as f64;
    let mut candidates: Vec<f64> = (0..n_scan).map(|i| lo + i as f64 * h).collect();
    candidates.extend(v0.knots.iter().copied().filter(|&k| k >= lo && k < hi));
    let mut best = (f64::NAN, f64::INFINITY);
    for x in candidates {
        let t = focus_time(x);
        if t < best.1 {
            best = (x, t);
        }
    }
    if !best.1.is_finite() {
        return Err(Error::NoCrossing);
    }
    let (a, b) = ((best.0 - h).max(lo), (best.0 + h).min(hi));
    let refined = golden_min(focus_time, a, b, 1e-13 * (1.0 + best.0.abs()));
    if refined.1 < best.1 {
        best = refined;
    }
    Ok((best.1, best.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_map(l: f64) -> CharacteristicMap {
        CharacteristicMap::new(&PiecewiseCubicFlux::paper(), &build_initial_profile(l).unwrap())
    }

    #[test]
    fn positions_per_region() {
        let h = PiecewiseCubicFlux::paper();
        let v0 = build_initial_profile(5.0).unwrap();
        for &t in &[0.0, 0.3, 2.0] {
            assert_eq!(characteristic_position(&h, &v0, t, -4.0), -4.0 + 2.25 * t);
            let x = 0.3;
            assert!((characteristic_position(&h, &v0, t, x) - x * (1.0 + t)).abs() < 1e-15);
        }
        assert_eq!(characteristic_position(&h, &v0, 0.0, 1.1), 1.1);
    }

    #[test]
    fn feet_invert_the_map() {
        let m = paper_map(5.0);
        for &(t, y) in &[(0.1, 0.2), (0.5, -2.0), (3.0, 6.0), (0.1, -1.2)] {
            let feet = m.feet(t, y);
            assert!(!feet.is_empty());
            for x in feet {
                assert!((m.position(t, x) - y).abs() < 1e-10, "t={t} y={y} x={x}");
            }
        }
    }

    #[test]
    fn fold_produces_three_feet() {
        let m = paper_map(5.0);
        // just after 2/13 the left cubic branch has folded over the plateau
        let t = 0.2;
        let y = m.position(t, -1.5) - 1e-3;
        assert_eq!(m.feet(t, y).len(), 3);
        assert_eq!(m.feet(0.1, y).len(), 1);
    }

    #[test]
    fn clusters_of_counterexample() {
        let l = 5.0;
        let c = paper_map(l).clusters();
        assert_eq!(c.len(), 3);
        assert!((c[0].x_lo + 1.5).abs() < 1e-14 && (c[0].x_hi + 19.0 / 30.0).abs() < 1e-12);
        assert!((c[0].t_c - 2.0 / 13.0).abs() < 1e-14);
        assert!((c[1].x_lo - 19.0 / 30.0).abs() < 1e-12 && (c[1].x_hi - 1.5).abs() < 1e-14);
        assert!((c[2].x_lo - (l + 13.0 / 15.0)).abs() < 1e-12);
        assert!((c[2].t_c - 1.0).abs() < 1e-14 && (c[2].x_c - (l + 1.0)).abs() < 1e-14);
    }

    #[test]
    fn first_crossing_cases() {
        let h = PiecewiseCubicFlux::paper();
        let v0 = build_initial_profile(5.0).unwrap();
        let (t, x) = first_crossing(&h, &v0, (-3.0, 3.0), 2000).unwrap();
        assert!((t - 2.0 / 13.0).abs() < 1e-12);
        assert!((x + 1.5).abs() < 1e-9);

        let q = PiecewiseCubicFlux::quadratic();
        let comp = PiecewiseLinearProfile::ramp(-1.0, 1.0, 1.0, -1.0).unwrap();
        let (t, _) = first_crossing(&q, &comp, (-2.0, 2.0), 1000).unwrap();
        assert!((t - 1.0).abs() < 1e-12);

        let rar = PiecewiseLinearProfile::ramp(-1.0, 1.0, -1.0, 1.0).unwrap();
        assert!(matches!(
            first_crossing(&q, &rar, (-2.0, 2.0), 1000),
            Err(Error::NoCrossing)
        ));
        assert!(first_crossing(&q, &rar, (-2.0, 2.0), 10).is_err());
    }
}
