//! Grid estimates of the hypotheses of the uniqueness theorem: Lipschitz and
//! semiconcavity constants, one-sided Lipschitz bounds and a.e. residuals.
//!
//! Semiconcavity uses the `c|x|^2` convention: `f` is semiconcave with
//! constant `c` when `f'' <= 2c`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::PiecewiseCubicFlux;
use crate::front_tracking::ShockCurve;
use crate::grid::{GridKind, GridSolution};
use crate::viscosity::hj_to_cl;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzEstimate {
    pub space: f64,
    pub time: f64,
    /// Largest quotient over neighbours in either direction.
    pub joint: f64,
}

pub fn lipschitz_constant(g: &GridSolution) -> LipschitzEstimate {
    let space = g
        .values
        .par_iter()
        .map(|r| r.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max) / g.dx)
        .reduce(|| 0.0, f64::max);
    let time = if g.nt() < 2 {
        0.0
    } else {
        g.values
            .par_windows(2)
            .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (b - a).abs()).fold(0.0, f64::max) / g.dt)
            .reduce(|| 0.0, f64::max)
    };
    LipschitzEstimate {
        space,
        time,
        joint: space.max(time),
    }
}

/// Half the largest positive centred second difference quotient.
pub fn semiconcavity_constant(row: &[f64], dx: f64) -> f64 {
    row.windows(3)
        .map(|w| (w[2] - 2.0 * w[1] + w[0]) / (dx * dx))
        .fold(0.0, f64::max)
        * 0.5
}

/// Largest negative part of `(v(x) - v(y)) / (x - y)` over pairs `dx`,
/// `2 dx`, `4 dx`, ... apart.
pub fn one_sided_lipschitz_constant(v: &[f64], dx: f64) -> f64 {
    let mut worst: f64 = 0.0;
    let mut s = 1;
    while s < v.len() {
        for j in 0..v.len() - s {
            worst = worst.max(-(v[j + s] - v[j]) / (s as f64 * dx));
        }
        s *= 2;
    }
    worst
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualQuantiles {
    pub median: f64,
    pub p95: f64,
    pub max: f64,
    pub excluded_fraction: f64,
    pub probes: usize,
}

/// `|f_t - H(f_x)|` by centred differences at interior nodes, skipping nodes
/// within `radius` of a shock at any of the three stencil times.
pub fn pde_residual(
    f: &GridSolution,
    flux: &PiecewiseCubicFlux,
    shocks: &[ShockCurve],
    radius: f64,
) -> Result<ResidualQuantiles> {
    if f.kind != GridKind::Nodal {
        return Err(Error::invalid("pde_residual expects nodal values"));
    }
    if f.nt() < 3 || f.nx() < 3 {
        return Err(Error::invalid("need at least three rows and three nodes"));
    }
    let per_row: Vec<(Vec<f64>, usize)> = (1..f.nt() - 1)
        .into_par_iter()
        .map(|k| {
            let ts = [f.t(k - 1), f.t(k), f.t(k + 1)];
            let zs: Vec<f64> = shocks
                .iter()
                .flat_map(|c| ts.iter().filter(|&&t| c.is_active(t)).map(|&t| c.position_at(t)))
                .collect();
            let (prev, row, next) = (f.row(k - 1), f.row(k), f.row(k + 1));
            let mut out = Vec::with_capacity(row.len());
            let mut skipped = 0;
            for j in 1..row.len() - 1 {
                let x = f.x(j);
                if zs.iter().any(|z| (x - z).abs() <= radius) {
                    skipped += 1;
                    continue;
                }
                let ft = (next[j] - prev[j]) / (2.0 * f.dt);
                let fx = (row[j + 1] - row[j - 1]) / (2.0 * f.dx);
                out.push((ft - flux.value(fx)).abs());
            }
            (out, skipped)
        })
        .collect();
    let skipped: usize = per_row.iter().map(|r| r.1).sum();
    let mut all: Vec<f64> = per_row.into_iter().flat_map(|r| r.0).collect();
    let total = all.len() + skipped;
    if all.is_empty() {
        return Err(Error::invalid("every probe lies inside a shock tube"));
    }
    all.sort_by(f64::total_cmp);
    let q = |p: f64| all[((p * (all.len() - 1) as f64).round() as usize).min(all.len() - 1)];
    Ok(ResidualQuantiles {
        median: q(0.5),
        p95: q(0.95),
        max: all[all.len() - 1],
        excluded_fraction: skipped as f64 / total as f64,
        probes: total,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub lipschitz: f64,
    pub lipschitz_time: f64,
    /// Max over rows of the per-row semiconcavity constant.
    pub semiconcavity_c: f64,
    pub semiconcavity_by_row: Vec<f64>,
    /// Max over rows, from `v = -f_x`.
    pub one_sided_lipschitz: f64,
    pub pde_residual_quantiles: (f64, f64, f64),
    pub excluded_fraction: f64,
}

/// Every estimate for a nodal HJ grid at once.
pub fn regularity_report(
    f: &GridSolution,
    flux: &PiecewiseCubicFlux,
    shocks: &[ShockCurve],
    radius: f64,
) -> Result<RegularityReport> {
    let lip = lipschitz_constant(f);
    let by_row: Vec<f64> = f.values.iter().map(|r| semiconcavity_constant(r, f.dx)).collect();
    let v = hj_to_cl(f)?;
    let osl = v
        .values
        .iter()
        .map(|r| one_sided_lipschitz_constant(r, v.dx))
        .fold(0.0, f64::max);
    let res = pde_residual(f, flux, shocks, radius)?;
    Ok(RegularityReport {
        lipschitz: lip.space,
        lipschitz_time: lip.time,
        semiconcavity_c: by_row.iter().copied().fold(0.0, f64::max),
        semiconcavity_by_row: by_row,
        one_sided_lipschitz: osl,
        pde_residual_quantiles: (res.median, res.p95, res.max),
        excluded_fraction: res.excluded_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid(f: impl Fn(f64, f64) -> f64, x: (f64, f64), nx: usize, t: (f64, f64), nt: usize) -> GridSolution {
        let dx = (x.1 - x.0) / (nx - 1) as f64;
        let dt = (t.1 - t.0) / (nt - 1) as f64;
        let rows = (0..nt)
            .map(|k| (0..nx).map(|j| f(t.0 + k as f64 * dt, x.0 + j as f64 * dx)).collect())
            .collect();
        GridSolution::new(GridKind::Nodal, x.0, dx, t.0, dt, rows).unwrap()
    }

    #[test]
    fn lipschitz_examples() {
        let g = grid(|t, x| x + 0.5 * t, (-1.0, 1.0), 201, (0.0, 1.0), 101);
        let l = lipschitz_constant(&g);
        assert_abs_diff_eq!(l.space, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(l.time, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(l.joint, 1.0, epsilon = 1e-12);
        let c = grid(|_, _| 3.0, (0.0, 1.0), 11, (0.0, 1.0), 3);
        assert_eq!(lipschitz_constant(&c).joint, 0.0);
    }

    #[test]
    fn kinks() {
        let h = 0.01;
        let xs: Vec<f64> = (0..201).map(|j| -1.0 + j as f64 * h).collect();
        let down: Vec<f64> = xs.iter().map(|x| -x.abs()).collect();
        let up: Vec<f64> = xs.iter().map(|x| x.abs()).collect();
        assert!(semiconcavity_constant(&down, h) < 1e-9);
        assert_abs_diff_eq!(semiconcavity_constant(&up, h), 1.0 / h, epsilon = 1e-6);
        let coarse: Vec<f64> = up.iter().step_by(2).copied().collect();
        assert_abs_diff_eq!(semiconcavity_constant(&coarse, 2.0 * h), 0.5 / h, epsilon = 1e-6);
        let quad: Vec<f64> = xs.iter().map(|x| 1.5 * x * x).collect();
        assert_abs_diff_eq!(semiconcavity_constant(&quad, h), 1.5, epsilon = 1e-9);
    }

    #[test]
    fn one_sided_examples() {
        let xs: Vec<f64> = (0..100).map(|j| j as f64 * 0.1).collect();
        let up: Vec<f64> = xs.iter().map(|x| x.sqrt()).collect();
        assert_eq!(one_sided_lipschitz_constant(&up, 0.1), 0.0);
        let down: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert_abs_diff_eq!(one_sided_lipschitz_constant(&down, 0.1), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn residual_of_classical_solutions() {
        let h = PiecewiseCubicFlux::quadratic();
        let affine = grid(|t, x| 2.0 * x + 2.0 * t, (-1.0, 1.0), 101, (0.0, 1.0), 51);
        let r = pde_residual(&affine, &h, &[], 0.0).unwrap();
        assert!(r.max <= 1e-12, "{}", r.max);
        assert_eq!(r.excluded_fraction, 0.0);

        let coarse = grid(|t, x| x * x / (2.0 * (1.0 - t)), (-1.0, 1.0), 101, (0.0, 0.4), 41);
        let fine = grid(|t, x| x * x / (2.0 * (1.0 - t)), (-1.0, 1.0), 201, (0.0, 0.4), 81);
        let (rc, rf) = (
            pde_residual(&coarse, &h, &[], 0.0).unwrap().max,
            pde_residual(&fine, &h, &[], 0.0).unwrap().max,
        );
        assert!(rc < 1e-3);
        // second order
        assert!(rf < 0.3 * rc, "{rc} {rf}");
    }

    #[test]
    fn report_scales_with_f() {
        let h = PiecewiseCubicFlux::quadratic();
        let g = grid(|_, x: f64| -x.abs() + 0.3 * x * x, (-1.0, 1.0), 101, (0.0, 1.0), 5);
        let mut g2 = g.clone();
        for r in &mut g2.values {
            r.iter_mut().for_each(|v| *v *= 2.0);
        }
        let a = regularity_report(&g, &h, &[], 0.0).unwrap();
        let b = regularity_report(&g2, &h, &[], 0.0).unwrap();
        assert_abs_diff_eq!(b.lipschitz, 2.0 * a.lipschitz, epsilon = 1e-9);
        assert_abs_diff_eq!(b.semiconcavity_c, 2.0 * a.semiconcavity_c, epsilon = 1e-9);
        assert_abs_diff_eq!(a.semiconcavity_c, 0.3, epsilon = 1e-9);
    }
}
