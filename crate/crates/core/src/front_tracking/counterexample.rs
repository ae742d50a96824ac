//! Orchestration of the non-convex counter-example.

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use super::characteristics::{build_initial_profile, CharacteristicMap, CompressiveCluster};
use super::shock::{ShockCurve, ShockLabel};
use super::tracker::{track, Birth, TrackerOptions};
use crate::error::{Error, Result};
use crate::flux::{paper_argmax, PiecewiseCubicFlux};
use crate::profile::PiecewiseLinearProfile;

/// Default final time; comfortably past the state crossing near t = 106.
pub const DEFAULT_T_END: f64 = 120.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuildMode {
    /// Shocks launched where the extreme characteristics of the central
    /// ramp meet, as in the original construction.
    Paper,
    /// Shocks launched at the first focusing time of every compressive
    /// cluster.
    Detect,
}

impl std::str::FromStr for BuildMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(BuildMode::Paper),
            "detect" => Ok(BuildMode::Detect),
            other => Err(Error::invalid(format!(
                "unknown mode `{other}` (expected paper or detect)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleConfig {
    pub mode: BuildMode,
    pub dt: f64,
    pub t_end: f64,
}

impl CounterexampleConfig {
    pub fn new(mode: BuildMode, dt: f64) -> Self {
        Self {
            mode,
            dt,
            t_end: DEFAULT_T_END,
        }
    }

    pub fn with_t_end(mut self, t_end: f64) -> Self {
        self.t_end = t_end;
        self
    }
}

/// Constants of the construction. Times refer to the chosen mode except
/// `t_c_detected`, which is always the genuine first crossing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// `H'(-3/2)`.
    pub a: f64,
    pub x0: f64,
    pub t0: f64,
    pub launch_speed: f64,
    pub t_c_detected: f64,
    pub x_c_detected: f64,
    pub t1: f64,
    #[serde(rename = "L")]
    pub l: f64,
    /// Merge point of the two central shocks.
    pub merge_z: f64,
    /// Asymmetry `z_left + z_right` just before the merge.
    pub merge_asymmetry: f64,
    /// Argmax of the flux on `[1/2, 3/2]`.
    pub z_argmax: f64,
    /// First time the right state of the merged shock reaches `z_argmax`.
    pub t3: Option<f64>,
    pub z_c_at_t3: Option<f64>,
}

/// Closed-form rationals of the construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactConstants {
    pub a: String,
    pub x0: String,
    pub t0: String,
    pub launch_speed: String,
    pub t_c: String,
    /// Merge time of the launch-point construction.
    pub t1: String,
    #[serde(rename = "L")]
    pub l: String,
}

fn show(q: Rational64) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Rational constants of the launch-point construction.
///
/// While the right state of the left shock is `v = z/(1+t)` in the quadratic
/// core `H = p^2/2` and the left state is `-3/2`, the product `D(v)(1 + t)`
/// with `D(v) = -v^2/2 - 3v/2 + 1/8` is conserved; the merge happens at `v = 0`.
pub fn exact_constants(flux: &PiecewiseCubicFlux) -> Option<ExactConstants> {
    let q = |n, d| Rational64::new(n, d);
    let a = flux.eval_exact(q(-3, 2), 1)?;
    let edge = -flux.eval_exact(q(-1, 2), 1)?;
    let t0 = q(1, 1) / (a + edge);
    let x0 = q(3, 2) - a * t0;
    let speed = (flux.eval_exact(q(-1, 2), 0)? - flux.eval_exact(q(-3, 2), 0)?) / q(1, 1);
    let t_c = q(-1, 1) / flux.eval_exact(q(-3, 2), 2)?;
    let d = |v: Rational64| -v * v / 2 - q(3, 2) * v + q(1, 8);
    let t1 = (q(1, 1) + t0) * d(q(-1, 2)) / d(q(0, 1)) - q(1, 1);
    Some(ExactConstants {
        a: show(a),
        x0: show(x0),
        t0: show(t0),
        launch_speed: show(speed),
        t_c: show(t_c),
        t1: show(t1),
        l: show(a * t1),
    })
}

#[derive(Clone, Debug)]
pub struct FrontTrackedSolution {
    pub flux: PiecewiseCubicFlux,
    pub v0: PiecewiseLinearProfile,
    pub shocks: Vec<ShockCurve>,
    pub t_end: f64,
    pub dt: f64,
    pub mode: BuildMode,
    pub derived_constants: DerivedConstants,
    pub(crate) map: CharacteristicMap,
}

impl FrontTrackedSolution {
    /// Generic tracking: one shock per compressive cluster of `v0`.
    pub fn detect(flux: &PiecewiseCubicFlux, v0: &PiecewiseLinearProfile, dt: f64, t_end: f64) -> Result<Self> {
        let map = CharacteristicMap::new(flux, v0);
        let clusters = map.clusters();
        let births = clusters
            .iter()
            .enumerate()
            .map(|(i, c)| cluster_birth(&map, c, format!("cluster-{i}")))
            .collect();
        let tracked = track(&map, births, options(dt, t_end, false))?;
        let (t_c, x_c) = clusters
            .iter()
            .map(|c| (c.t_c, c.x_c))
            .fold((f64::INFINITY, f64::NAN), |a, b| if b.0 < a.0 { b } else { a });
        let merge = tracked.merges.first();
        let constants = DerivedConstants {
            a: flux.deriv(v0.left_extension),
            x0: f64::NAN,
            t0: f64::NAN,
            launch_speed: f64::NAN,
            t_c_detected: t_c,
            x_c_detected: x_c,
            t1: merge.map_or(f64::NAN, |m| m.t),
            l: f64::NAN,
            merge_z: merge.map_or(f64::NAN, |m| m.z),
            merge_asymmetry: merge.map_or(f64::NAN, |m| m.asymmetry),
            z_argmax: f64::NAN,
            t3: None,
            z_c_at_t3: None,
        };
        Ok(Self {
            flux: flux.clone(),
            v0: v0.clone(),
            shocks: tracked.curves,
            t_end,
            dt,
            mode: BuildMode::Detect,
            derived_constants: constants,
            map,
        })
    }

    pub fn characteristic_map(&self) -> &CharacteristicMap {
        &self.map
    }

    pub fn shock(&self, label: ShockLabel) -> Option<&ShockCurve> {
        self.shocks.iter().find(|s| s.label == label)
    }

    pub fn shock_named(&self, name: &str) -> Option<&ShockCurve> {
        self.shocks.iter().find(|s| s.name == name)
    }

    /// The shock born from the merge of the two central shocks.
    pub fn merged_shock(&self) -> Option<&ShockCurve> {
        self.shock_named("merged")
    }

    /// Largest RK consistency defect over all curves.
    pub fn rh_residual(&self) -> f64 {
        self.shocks.iter().map(ShockCurve::rh_residual).fold(0.0, f64::max)
    }
}

fn options(dt: f64, t_end: f64, stop_on_first_merge: bool) -> TrackerOptions {
    TrackerOptions {
        dt,
        t_end,
        snap_axis: true,
        stop_on_first_merge,
    }
}

fn cluster_birth(map: &CharacteristicMap, c: &CompressiveCluster, name: String) -> Birth {
    let z = map.position(c.t_c, c.x_c);
    // a linear cluster focuses all at once; otherwise only x_c arrives
    let slack = 1e-9 * (1.0 + c.x_lo.abs().max(c.x_hi.abs()));
    let roots: Vec<f64> = map
        .feet(c.t_c, z)
        .into_iter()
        .filter(|&x| x >= c.x_lo - slack && x <= c.x_hi + slack)
        .collect();
    let feet = match (roots.first(), roots.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => (c.x_c, c.x_c),
    };
    Birth {
        t: c.t_c,
        z,
        feet,
        label: ShockLabel::Detected,
        name,
    }
}

/// Central shocks of the chosen mode for the given map.
fn central_births(map: &CharacteristicMap, mode: BuildMode, t0: f64, x0: f64) -> Vec<Birth> {
    match mode {
        BuildMode::Paper => vec![
            Birth {
                t: t0,
                z: -x0,
                feet: (-1.5, -0.5),
                label: ShockLabel::A,
                name: "left".into(),
            },
            Birth {
                t: t0,
                z: x0,
                feet: (0.5, 1.5),
                label: ShockLabel::B,
                name: "right".into(),
            },
        ],
        BuildMode::Detect => map
            .clusters()
            .iter()
            .filter(|c| c.x_hi <= 1.5 + 1e-12)
            .map(|c| {
                let name = if c.x_hi <= 0.0 { "left" } else { "right" };
                cluster_birth(map, c, name.into())
            })
            .collect(),
    }
}

pub fn build_counterexample(dt: f64, mode: BuildMode) -> Result<FrontTrackedSolution> {
    build_counterexample_with(&CounterexampleConfig::new(mode, dt))
}

/// Two passes: the central shocks are first traced on the datum without the
/// descending ramp to find their merge time `t1`; the ramp is then placed at
/// `L = a t1` and the whole picture is traced to `t_end`.
pub fn build_counterexample_with(cfg: &CounterexampleConfig) -> Result<FrontTrackedSolution> {
    let CounterexampleConfig { mode, dt, t_end } = *cfg;
    if !(dt > 0.0 && dt <= 1e-3) {
        return Err(Error::invalid(format!("dt = {dt} must lie in (0, 1e-3]")));
    }
    let flux = PiecewiseCubicFlux::paper();
    let a = flux.deriv(-1.5);
    let edge = -flux.deriv(-0.5);
    let t0 = 1.0 / (a + edge);
    let x0 = 1.5 - a * t0;

    let sym = CharacteristicMap::new(&flux, &PiecewiseLinearProfile::symmetric_counterexample());
    let first = track(&sym, central_births(&sym, mode, t0, x0), options(dt, t_end, true))?;
    let merge = *first
        .merges
        .first()
        .ok_or_else(|| Error::invalid(format!("central shocks do not merge before t_end = {t_end}")))?;
    let t1 = merge.t;
    let l = a * t1;

    let v0 = build_initial_profile(l)?;
    let map = CharacteristicMap::new(&flux, &v0);
    let clusters = map.clusters();
    let (t_c, x_c) = clusters
        .iter()
        .map(|c| (c.t_c, c.x_c))
        .fold((f64::INFINITY, f64::NAN), |a, b| if b.0 < a.0 { b } else { a });
    let mut births = central_births(&map, mode, t0, x0);
    births.extend(
        clusters
            .iter()
            .filter(|c| c.x_lo > 1.5)
            .map(|c| cluster_birth(&map, c, "ramp".into())),
    );
    let tracked = track(&map, births, options(dt, t_end, false))?;

    let z_argmax = paper_argmax();
    let mut constants = DerivedConstants {
        a,
        x0,
        t0,
        launch_speed: (flux.value(-0.5) - flux.value(-1.5)) / (-0.5 - -1.5),
        t_c_detected: t_c,
        x_c_detected: x_c,
        t1,
        l,
        merge_z: merge.z,
        merge_asymmetry: merge.asymmetry,
        z_argmax,
        t3: None,
        z_c_at_t3: None,
    };
    if let Some(c) = tracked.curves.iter().find(|s| s.name == "merged") {
        if let Some((t3, z3)) = state_crossing(c, z_argmax) {
            constants.t3 = Some(t3);
            constants.z_c_at_t3 = Some(z3);
        }
    }
    Ok(FrontTrackedSolution {
        flux,
        v0,
        shocks: tracked.curves,
        t_end,
        dt,
        mode,
        derived_constants: constants,
        map,
    })
}

/// First time the right state of `curve` falls to `level`, with the shock
/// position there.
pub fn state_crossing(curve: &ShockCurve, level: f64) -> Option<(f64, f64)> {
    let s = &curve.samples;
    let i = s.iter().position(|p| p.v_plus <= level)?;
    if i == 0 {
        return Some((s[0].t, s[0].z));
    }
    let (p, q) = (&s[i - 1], &s[i]);
    let w = (p.v_plus - level) / (p.v_plus - q.v_plus);
    let t = p.t + w * (q.t - p.t);
    Some((t, curve.position_at(t)))
}

/// Largest gap between the curves of `coarse` and those of a rerun at half
/// the step, compared at shared sample times.
pub fn step_halving_gap(coarse: &FrontTrackedSolution) -> Result<f64> {
    let fine = build_counterexample_with(&CounterexampleConfig {
        mode: coarse.mode,
        dt: 0.5 * coarse.dt,
        t_end: coarse.t_end,
    })?;
    let mut worst: f64 = 0.0;
    for c in &coarse.shocks {
        let Some(f) = fine.shock_named(&c.name) else {
            return Err(Error::StepTooLarge(f64::INFINITY));
        };
        let (lo, hi) = (c.t_start().max(f.t_start()), c.t_last().min(f.t_last()));
        for s in c.samples.iter().step_by(50) {
            if s.t >= lo && s.t <= hi {
                worst = worst.max((s.z - f.position_at(s.t)).abs());
            }
        }
    }
    Ok(worst)
}
