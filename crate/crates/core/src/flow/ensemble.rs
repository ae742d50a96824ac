//! Flow-map ensembles `X' = b(t, X)`, `J' = b_x(t, X) J`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::MollifiedField;
use crate::error::{Error, Result};

/// Step-halving tolerance on final positions and log-Jacobians.
pub const HALVING_TOL: f64 = 1e-6;

/// Retained samples per trajectory, at most.
const STORED: usize = 2000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowEnsemble {
    pub starts: Vec<f64>,
    pub epsilon: f64,
    pub t_start: f64,
    /// Integration step.
    pub dt: f64,
    /// Times of the retained samples, shared by all members.
    pub times: Vec<f64>,
    /// `(member, sample)` positions.
    pub trajectories: Vec<Vec<f64>>,
    pub jacobian_dets: Vec<Vec<f64>>,
    pub log_jacobians: Vec<Vec<f64>>,
    /// `int_0^t b_x(s, X(s)) ds` by Simpson's rule on the RK4 stages.
    pub divergence_integrals: Vec<Vec<f64>>,
    /// Largest step-halving disagreement.
    pub halving_gap: f64,
}

impl FlowEnsemble {
    /// `max |log J - int div b|` over all members and samples.
    pub fn jacobian_identity_defect(&self) -> f64 {
        self.log_jacobians
            .iter()
            .zip(&self.divergence_integrals)
            .flat_map(|(l, d)| l.iter().zip(d).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }

    /// `max |X(t, x) - x| - (t - t_start) * bound` over all samples.
    pub fn tube_excess(&self, bound: f64) -> f64 {
        self.trajectories
            .iter()
            .zip(&self.starts)
            .flat_map(|(tr, &x)| {
                tr.iter()
                    .zip(&self.times)
                    .map(move |(&y, &t)| (y - x).abs() - (t - self.t_start) * bound)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

struct Member {
    xs: Vec<f64>,
    log_j: Vec<f64>,
    div: Vec<f64>,
}

/// RK4 on `(X, log J)` with the divergence integral carried as a third
/// component. `log J` stays finite under strong compression where `J`
/// underflows.
fn integrate_one<B>(b: &B, x0: f64, t0: f64, dt: f64, steps: usize, every: usize) -> Member
where
    B: Fn(f64, f64) -> (f64, f64),
{
    let cap = steps / every + 1;
    let mut m = Member {
        xs: Vec::with_capacity(cap),
        log_j: Vec::with_capacity(cap),
        div: Vec::with_capacity(cap),
    };
    let (mut x, mut lj, mut dv) = (x0, 0.0, 0.0);
    m.xs.push(x);
    m.log_j.push(lj);
    m.div.push(dv);
    let (mut v1, mut d1) = b(t0, x);
    for n in 0..steps {
        let t = t0 + n as f64 * dt;
        let h = dt;
        let (v2, d2) = b(t + 0.5 * h, x + 0.5 * h * v1);
        let (v3, d3) = b(t + 0.5 * h, x + 0.5 * h * v2);
        let (v4, d4) = b(t + h, x + h * v3);
        let x_new = x + h / 6.0 * (v1 + 2.0 * v2 + 2.0 * v3 + v4);
        lj += h / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
        // Simpson along the accepted path; the midpoint comes from the cubic
        // Hermite interpolant and the end value seeds the next step
        let (ve, de) = b(t + h, x_new);
        let x_mid = 0.5 * (x + x_new) + h / 8.0 * (v1 - ve);
        let (_, dm) = b(t + 0.5 * h, x_mid);
        dv += h / 6.0 * (d1 + 4.0 * dm + de);
        (x, v1, d1) = (x_new, ve, de);
        if (n + 1) % every == 0 {
            m.xs.push(x);
            m.log_j.push(lj);
            m.div.push(dv);
        }
    }
    m
}

/// RK4 ensemble from `t_start` to `t_max`, checked against a half-step rerun.
pub fn integrate_flow(
    field: &MollifiedField,
    starts: &[f64],
    t_start: f64,
    t_max: f64,
    dt: f64,
) -> Result<FlowEnsemble> {
    if starts.is_empty() {
        return Err(Error::invalid("no start points"));
    }
    if !(dt > 0.0 && t_max > t_start) {
        return Err(Error::invalid(format!("need dt > 0 and t_max > t_start (dt = {dt})")));
    }
    let steps = ((t_max - t_start) / dt).round() as usize;
    if steps == 0 || ((steps as f64 * dt) - (t_max - t_start)).abs() > 1e-9 * (t_max - t_start) {
        return Err(Error::invalid(format!("dt = {dt} does not divide the interval")));
    }
    let every = steps.div_ceil(STORED).max(1);
    let steps = steps.div_ceil(every) * every;
    let b = |t: f64, x: f64| field.velocity_and_divergence(t, x);
    let members: Vec<Member> = starts
        .par_iter()
        .map(|&x| integrate_one(&b, x, t_start, dt, steps, every))
        .collect();
    let fine: Vec<Member> = starts
        .par_iter()
        .map(|&x| integrate_one(&b, x, t_start, 0.5 * dt, 2 * steps, 2 * steps))
        .collect();
    let halving_gap = members
        .iter()
        .zip(&fine)
        .map(|(c, f)| {
            let (xc, xf) = (c.xs[c.xs.len() - 1], f.xs[f.xs.len() - 1]);
            let (lc, lf) = (c.log_j[c.log_j.len() - 1], f.log_j[f.log_j.len() - 1]);
            (xc - xf).abs().max((lc - lf).abs())
        })
        .fold(0.0, f64::max);
    if halving_gap > HALVING_TOL {
        return Err(Error::StepTooLarge(halving_gap));
    }
    let times = (0..=steps / every).map(|i| t_start + (i * every) as f64 * dt).collect();
    let mut e = FlowEnsemble {
        starts: starts.to_vec(),
        epsilon: field.epsilon,
        t_start,
        dt,
        times,
        trajectories: Vec::with_capacity(starts.len()),
        jacobian_dets: Vec::with_capacity(starts.len()),
        log_jacobians: Vec::with_capacity(starts.len()),
        divergence_integrals: Vec::with_capacity(starts.len()),
        halving_gap,
    };
    for m in members {
        e.jacobian_dets.push(m.log_j.iter().map(|l| l.exp()).collect());
        e.trajectories.push(m.xs);
        e.log_jacobians.push(m.log_j);
        e.divergence_integrals.push(m.div);
    }
    Ok(e)
}

/// `integrate_flow`, halving `dt` up to `halvings` times while the
/// step-halving check fails.
pub fn integrate_flow_refined(
    field: &MollifiedField,
    starts: &[f64],
    t_start: f64,
    t_max: f64,
    dt: f64,
    halvings: usize,
) -> Result<FlowEnsemble> {
    let mut dt = dt;
    for _ in 0..halvings {
        match integrate_flow(field, starts, t_start, t_max, dt) {
            Err(Error::StepTooLarge(_)) => dt *= 0.5,
            other => return other,
        }
    }
    integrate_flow(field, starts, t_start, t_max, dt)
}

/// Heuristic step `eps / (10 max |b_x|)` from probes on a window.
pub fn suggested_step(field: &MollifiedField, window: (f64, f64), times: (f64, f64), probes: usize) -> f64 {
    let n = probes.max(2);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let t = times.0 + (times.1 - times.0) * i as f64 / (n - 1) as f64;
        for j in 0..n {
            let x = window.0 + (window.1 - window.0) * j as f64 / (n - 1) as f64;
            worst = worst.max(field.velocity_and_divergence(t, x).1.abs());
        }
    }
    if worst == 0.0 {
        field.epsilon
    } else {
        field.epsilon / (10.0 * worst)
    }
}

/// `sup_t |gamma(t) - x - int_0^t b(s, gamma(s)) ds|` by the trapezoid rule.
/// Samples where `b` returns `None` are skipped and the quadrature bridges
/// the gap.
pub fn integral_residual<B>(times: &[f64], path: &[f64], b: B) -> f64
where
    B: Fn(f64, f64) -> Option<f64>,
{
    if times.is_empty() {
        return 0.0;
    }
    let x0 = path[0];
    let mut acc = 0.0;
    let mut worst: f64 = 0.0;
    let mut last: Option<(f64, f64)> = None;
    for (&t, &y) in times.iter().zip(path) {
        if let Some(v) = b(t, y) {
            if let Some((tp, vp)) = last {
                acc += 0.5 * (t - tp) * (v + vp);
            } else if t > times[0] {
                // no value yet at the start: extend the first one backwards
                acc += (t - times[0]) * v;
            }
            last = Some((t, v));
            worst = worst.max((y - x0 - acc).abs());
        }
    }
    worst
}
