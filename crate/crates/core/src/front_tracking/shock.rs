use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::PiecewiseCubicFlux;

/// Jumps below this size are treated as a single characteristic.
pub const DEGENERATE_JUMP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ShockLabel {
    A,
    B,
    C,
    #[serde(rename = "detected")]
    Detected,
}

impl ShockLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            ShockLabel::A => "A",
            ShockLabel::B => "B",
            ShockLabel::C => "C",
            ShockLabel::Detected => "detected",
        }
    }
}

impl std::fmt::Display for ShockLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Merged,
    ReachedTEnd,
    Absorbed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShockSample {
    pub t: f64,
    pub z: f64,
    pub v_minus: f64,
    pub v_plus: f64,
    pub speed: f64,
    /// Feet of the characteristics arriving from the left and the right.
    /// Everything strictly between them has been absorbed.
    pub foot_left: f64,
    pub foot_right: f64,
}

impl ShockSample {
    pub fn jump(&self) -> f64 {
        self.v_plus - self.v_minus
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShockCurve {
    pub label: ShockLabel,
    /// Role in the construction: `left`, `right`, `merged`, `ramp`, ...
    pub name: String,
    pub samples: Vec<ShockSample>,
    pub origin: (f64, f64),
    pub termination: Termination,
}

impl ShockCurve {
    pub fn t_start(&self) -> f64 {
        self.samples[0].t
    }

    pub fn t_last(&self) -> f64 {
        self.samples[self.samples.len() - 1].t
    }

    pub fn is_active(&self, t: f64) -> bool {
        t >= self.t_start() && t <= self.t_last()
    }

    /// Index `i` with `samples[i].t <= t < samples[i+1].t` (clamped).
    fn bracket(&self, t: f64) -> usize {
        let i = self.samples.partition_point(|s| s.t <= t);
        i.saturating_sub(1).min(self.samples.len().saturating_sub(2))
    }

    /// Shock position at `t` by cubic Hermite interpolation of `(z, dz/dt)`.
    pub fn position_at(&self, t: f64) -> f64 {
        if self.samples.len() == 1 {
            return self.samples[0].z;
        }
        let i = self.bracket(t);
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        let h = b.t - a.t;
        let s = ((t - a.t) / h).clamp(0.0, 1.0);
        let (s2, s3) = (s * s, s * s * s);
        (2.0 * s3 - 3.0 * s2 + 1.0) * a.z
            + (s3 - 2.0 * s2 + s) * h * a.speed
            + (-2.0 * s3 + 3.0 * s2) * b.z
            + (s3 - s2) * h * b.speed
    }

    /// Linearly interpolated foot interval at `t`.
    pub fn feet_at(&self, t: f64) -> (f64, f64) {
        if self.samples.len() == 1 {
            return (self.samples[0].foot_left, self.samples[0].foot_right);
        }
        let i = self.bracket(t);
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        let w = ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0);
        (
            a.foot_left + w * (b.foot_left - a.foot_left),
            a.foot_right + w * (b.foot_right - a.foot_right),
        )
    }

    /// Sample nearest to `t`.
    pub fn nearest_sample(&self, t: f64) -> &ShockSample {
        let i = self.samples.partition_point(|s| s.t < t).min(self.samples.len() - 1);
        if i > 0 && (t - self.samples[i - 1].t).abs() < (self.samples[i].t - t).abs() {
            &self.samples[i - 1]
        } else {
            &self.samples[i]
        }
    }

    /// Largest deviation between the centred difference quotient of the
    /// stored positions and the stored speed. End samples are skipped.
    pub fn rh_residual(&self) -> f64 {
        let s = &self.samples;
        let mut worst: f64 = 0.0;
        for i in 1..s.len().saturating_sub(1) {
            let (h0, h1) = (s[i].t - s[i - 1].t, s[i + 1].t - s[i].t);
            // three-point derivative on a possibly uneven stencil
            let d = -h1 / (h0 * (h0 + h1)) * s[i - 1].z
                + (h1 - h0) / (h0 * h1) * s[i].z
                + h0 / (h1 * (h0 + h1)) * s[i + 1].z;
            worst = worst.max((d - s[i].speed).abs());
        }
        worst
    }
}

/// `(H(v+) - H(v-)) / (v+ - v-)`.
pub fn rh_speed(flux: &PiecewiseCubicFlux, v_minus: f64, v_plus: f64) -> Result<f64> {
    let jump = v_plus - v_minus;
    if jump.abs() < DEGENERATE_JUMP {
        return Err(Error::DegenerateJump(jump.abs()));
    }
    Ok((flux.value(v_plus) - flux.value(v_minus)) / jump)
}

/// Rankine-Hugoniot speed that falls back to the characteristic speed for a
/// vanishing jump.
#[inline]
pub fn shock_speed(flux: &PiecewiseCubicFlux, v_minus: f64, v_plus: f64) -> f64 {
    match rh_speed(flux, v_minus, v_plus) {
        Ok(s) => s,
        Err(_) => flux.deriv(0.5 * (v_minus + v_plus)),
    }
}

/// One classical RK4 step of `dz/dt = f(t, z)`; `k1` is the slope at the
/// start, which callers usually have from the previous sample.
pub(crate) fn rk4_step<F>(mut f: F, t: f64, z: f64, h: f64, k1: f64) -> Result<f64>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    let k2 = f(t + 0.5 * h, z + 0.5 * h * k1)?;
    let k3 = f(t + 0.5 * h, z + 0.5 * h * k2)?;
    let k4 = f(t + h, z + h * k3)?;
    Ok(z + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
}

/// States `(v-, v+)` and feet `(x_left, x_right)` at a point of the shock.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShockState {
    pub v_minus: f64,
    pub v_plus: f64,
    pub foot_left: f64,
    pub foot_right: f64,
}

impl ShockState {
    /// States given directly, without foot information.
    pub fn from_states(v_minus: f64, v_plus: f64) -> Self {
        Self {
            v_minus,
            v_plus,
            foot_left: f64::NAN,
            foot_right: f64::NAN,
        }
    }
}

/// Integrates one shock curve with fixed-step RK4 on
/// `dz/dt = rh_speed(v-(t, z), v+(t, z))` until `stop` fires on a fresh
/// sample or `t_max` is reached.
pub fn trace_shock<R, S>(
    flux: &PiecewiseCubicFlux,
    mut reconstruct: R,
    t_start: f64,
    z_start: f64,
    dt: f64,
    t_max: f64,
    mut stop: S,
) -> Result<ShockCurve>
where
    R: FnMut(f64, f64) -> Result<ShockState>,
    S: FnMut(&ShockSample) -> bool,
{
    if !(dt > 0.0 && dt <= 1e-3) {
        return Err(Error::invalid(format!("shock step {dt} must lie in (0, 1e-3]")));
    }
    let mut sample_at = |t: f64, z: f64| -> Result<ShockSample> {
        let st = reconstruct(t, z)?;
        Ok(ShockSample {
            t,
            z,
            v_minus: st.v_minus,
            v_plus: st.v_plus,
            speed: shock_speed(flux, st.v_minus, st.v_plus),
            foot_left: st.foot_left,
            foot_right: st.foot_right,
        })
    };
    let first = sample_at(t_start, z_start)?;
    let mut samples = vec![first];
    let mut termination = Termination::ReachedTEnd;
    let n = ((t_max - t_start) / dt).ceil().max(0.0) as usize;
    for k in 1..=n {
        let prev = samples[samples.len() - 1];
        let t_next = (t_start + k as f64 * dt).min(t_max);
        let h = t_next - prev.t;
        if h <= 0.0 {
            break;
        }
        let z = rk4_step(|t, z| sample_at(t, z).map(|s| s.speed), prev.t, prev.z, h, prev.speed)?;
        let s = sample_at(t_next, z)?;
        samples.push(s);
        if stop(&s) {
            termination = Termination::Absorbed;
            break;
        }
    }
    Ok(ShockCurve {
        label: ShockLabel::Detected,
        name: "traced".into(),
        samples,
        origin: (t_start, z_start),
        termination,
    })
}
