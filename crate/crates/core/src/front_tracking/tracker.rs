//! Synchronous multi-shock tracking on a common time grid.
//!
//! Every live shock carries its foot interval `(x_left, x_right)`. Feet are
//! recomputed at each RK4 stage as the outermost roots of `X^t(x) = z` that
//! lie between the feet of the neighbouring shocks.

use super::characteristics::CharacteristicMap;
use super::shock::{rk4_step, shock_speed, ShockCurve, ShockLabel, ShockSample, Termination};
use crate::error::{Error, Result};

/// Symmetry tolerance under which a merge point is snapped onto the axis.
const SNAP_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub(crate) struct Birth {
    pub t: f64,
    pub z: f64,
    pub feet: (f64, f64),
    pub label: ShockLabel,
    pub name: String,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct TrackerOptions {
    pub dt: f64,
    pub t_end: f64,
    pub snap_axis: bool,
    pub stop_on_first_merge: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct MergeEvent {
    pub t: f64,
    pub z: f64,
    /// `z_left + z_right` at the last common sample before the merge.
    pub asymmetry: f64,
}

#[derive(Debug)]
pub(crate) struct Tracked {
    pub curves: Vec<ShockCurve>,
    pub merges: Vec<MergeEvent>,
}

/// Shock states at `(t, z)` from the outermost feet inside `window`.
pub(crate) fn sample_at(map: &CharacteristicMap, t: f64, z: f64, window: (f64, f64)) -> Result<ShockSample> {
    let feet = map.feet(t, z);
    let tol = 1e-12;
    let mut inside = feet
        .iter()
        .copied()
        .filter(|&x| x > window.0 + tol && x < window.1 - tol);
    let Some(xl) = inside.next() else {
        return Err(Error::StateReconstructionFailed {
            t,
            x: z,
            reason: format!("no foot point between {} and {}", window.0, window.1),
        });
    };
    let xr = inside.next_back().unwrap_or(xl);
    let v0 = map.profile();
    let (v_minus, v_plus) = (v0.value(xl), v0.value(xr));
    Ok(ShockSample {
        t,
        z,
        v_minus,
        v_plus,
        speed: shock_speed(map.flux(), v_minus, v_plus),
        foot_left: xl,
        foot_right: xr,
    })
}

fn born(map: &CharacteristicMap, b: &Birth) -> ShockCurve {
    let v0 = map.profile();
    let (v_minus, v_plus) = (v0.value(b.feet.0), v0.value(b.feet.1));
    ShockCurve {
        label: b.label,
        name: b.name.clone(),
        samples: vec![ShockSample {
            t: b.t,
            z: b.z,
            v_minus,
            v_plus,
            speed: shock_speed(map.flux(), v_minus, v_plus),
            foot_left: b.feet.0,
            foot_right: b.feet.1,
        }],
        origin: (b.t, b.z),
        termination: Termination::ReachedTEnd,
    }
}

fn last(c: &ShockCurve) -> &ShockSample {
    &c.samples[c.samples.len() - 1]
}

fn merged_label(a: ShockLabel, b: ShockLabel) -> ShockLabel {
    if (a, b) == (ShockLabel::A, ShockLabel::B) {
        ShockLabel::C
    } else {
        ShockLabel::Detected
    }
}

pub(crate) fn track(map: &CharacteristicMap, mut births: Vec<Birth>, opts: TrackerOptions) -> Result<Tracked> {
    let TrackerOptions { dt, t_end, .. } = opts;
    if !(dt > 0.0 && dt <= 1e-3) {
        return Err(Error::invalid(format!("shock step {dt} must lie in (0, 1e-3]")));
    }
    births.sort_by(|a, b| a.t.total_cmp(&b.t));
    births.retain(|b| b.t < t_end);
    let mut out = Tracked {
        curves: Vec::new(),
        merges: Vec::new(),
    };
    let Some(first) = births.first() else {
        return Ok(out);
    };
    let t_begin = first.t;
    let min_step = 1e-3 * dt;
    let mut pending = births.into_iter().peekable();
    let mut active: Vec<ShockCurve> = Vec::new();
    let mut k: u64 = 0;
    loop {
        let target = (t_begin + (k + 1) as f64 * dt).min(t_end);
        while let Some(b) = pending.next_if(|b| b.t < target) {
            active.push(born(map, &b));
        }
        active.sort_by(|a, b| last(a).z.total_cmp(&last(b).z));
        let windows: Vec<(f64, f64)> = (0..active.len())
            .map(|i| {
                let lo = if i == 0 {
                    f64::NEG_INFINITY
                } else {
                    last(&active[i - 1]).foot_right
                };
                let hi = if i + 1 == active.len() {
                    f64::INFINITY
                } else {
                    last(&active[i + 1]).foot_left
                };
                (lo, hi)
            })
            .collect();
        for (curve, &window) in active.iter_mut().zip(&windows) {
            let prev = *last(curve);
            let h = target - prev.t;
            if h < min_step {
                continue;
            }
            let z = rk4_step(
                |t, z| sample_at(map, t, z, window).map(|s| s.speed),
                prev.t,
                prev.z,
                h,
                prev.speed,
            )?;
            curve.samples.push(sample_at(map, target, z, window)?);
        }

        if let Some(i) = find_merge(&active, target, dt) {
            let right = active.remove(i + 1);
            let left = active.remove(i);
            let window = (windows[i].0, windows[i + 1].1);
            let (left, right, birth, event) = merge(map, left, right, window, opts)?;
            out.curves.push(left);
            out.curves.push(right);
            out.merges.push(event);
            if opts.stop_on_first_merge {
                out.curves.extend(active);
                return Ok(out);
            }
            active.push(born(map, &birth));
        }

        if target >= t_end {
            break;
        }
        k += 1;
    }
    out.curves.extend(active);
    out.curves.sort_by(|a, b| {
        a.t_start()
            .total_cmp(&b.t_start())
            .then(a.origin.1.total_cmp(&b.origin.1))
    });
    Ok(out)
}

/// Adjacent pair, both sampled at `t`, closer than two steps of approach.
fn find_merge(active: &[ShockCurve], t: f64, dt: f64) -> Option<usize> {
    (0..active.len().saturating_sub(1)).find(|&i| {
        let (a, b) = (last(&active[i]), last(&active[i + 1]));
        a.t == t && b.t == t && a.speed > b.speed && b.z - a.z <= 2.0 * dt * (a.speed.abs() + b.speed.abs())
    })
}

fn merge(
    map: &CharacteristicMap,
    mut left: ShockCurve,
    mut right: ShockCurve,
    window: (f64, f64),
    opts: TrackerOptions,
) -> Result<(ShockCurve, ShockCurve, Birth, MergeEvent)> {
    let (a, b) = (*last(&left), *last(&right));
    // constant-speed extrapolation to the meeting time
    let delta = (b.z - a.z).max(0.0) / (a.speed - b.speed);
    let t_m = a.t + delta;
    let (za, zb) = (a.z + a.speed * delta, b.z + b.speed * delta);
    let asymmetry = a.z + b.z;
    let mut z_m = 0.5 * (za + zb);
    if opts.snap_axis && asymmetry.abs() <= SNAP_TOL {
        z_m = 0.0;
    }
    if delta > 0.0 {
        for (curve, z, s) in [(&mut left, za, a), (&mut right, zb, b)] {
            // terminal sample keeps the last foot window
            let end = ShockSample { t: t_m, z, ..s };
            curve.samples.push(end);
        }
    }
    left.termination = Termination::Merged;
    right.termination = Termination::Merged;
    // outermost feet of the merged shock, falling back to the parents' feet
    let feet = sample_at(map, t_m, z_m, window)
        .map(|s| (s.foot_left, s.foot_right))
        .unwrap_or((a.foot_left, b.foot_right));
    let birth = Birth {
        t: t_m,
        z: z_m,
        feet,
        label: merged_label(left.label, right.label),
        name: "merged".into(),
    };
    Ok((
        left,
        right,
        birth,
        MergeEvent {
            t: t_m,
            z: z_m,
            asymmetry,
        },
    ))
}
