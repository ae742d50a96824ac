//! Oleinik chord test along tracked shocks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::counterexample::FrontTrackedSolution;
use super::shock::{ShockCurve, ShockLabel, ShockSample, DEGENERATE_JUMP};
use crate::error::{Error, Result};
use crate::flux::{paper_argmax, PiecewiseCubicFlux};

/// Chord inequalities may fail by this much before counting as violated.
pub const VIOLATION_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChordCheck {
    pub k: f64,
    pub lhs: f64,
    pub mid: f64,
    pub rhs: f64,
    pub ok: bool,
}

impl ChordCheck {
    /// Size of the worse of the two failures, with its side.
    pub fn violation(&self) -> (f64, Side) {
        let (l, r) = (self.lhs - self.mid, self.mid - self.rhs);
        if l >= r {
            (l, Side::Left)
        } else {
            (r, Side::Right)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// One chord test at a single `k` strictly between the states.
pub fn chord_at(flux: &PiecewiseCubicFlux, v_minus: f64, v_plus: f64, k: f64) -> ChordCheck {
    let (hm, hp, hk) = (flux.value(v_minus), flux.value(v_plus), flux.value(k));
    let lhs = (hp - hk) / (v_plus - k);
    let mid = (hp - hm) / (v_plus - v_minus);
    let rhs = (hk - hm) / (k - v_minus);
    ChordCheck {
        k,
        lhs,
        mid,
        rhs,
        ok: lhs <= mid + VIOLATION_TOL && mid <= rhs + VIOLATION_TOL,
    }
}

/// Chord inequalities `lhs <= mid <= rhs` at `n_k` equispaced interior
/// points. The same chain covers downward jumps, where it says the graph of
/// `H` lies below the chord.
pub fn oleinik_chord_check(
    flux: &PiecewiseCubicFlux,
    v_minus: f64,
    v_plus: f64,
    n_k: usize,
) -> Result<Vec<ChordCheck>> {
    if n_k < 100 {
        return Err(Error::invalid(format!("n_k = {n_k} must be at least 100")));
    }
    let jump = v_plus - v_minus;
    if !(jump.abs() >= DEGENERATE_JUMP) {
        return Err(Error::DegenerateJump(jump.abs()));
    }
    Ok((1..=n_k)
        .map(|i| chord_at(flux, v_minus, v_plus, v_minus + jump * i as f64 / (n_k + 1) as f64))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyViolationCertificate {
    pub time: f64,
    pub shock_label: ShockLabel,
    pub shock_name: String,
    pub position: f64,
    pub v_minus: f64,
    pub v_plus: f64,
    pub witness_k: f64,
    pub lhs_slope: f64,
    pub mid_slope: f64,
    pub rhs_slope: f64,
    pub violated_side: Side,
    pub margin: f64,
}

impl EntropyViolationCertificate {
    fn new(curve: &ShockCurve, t: f64, z: f64, v_minus: f64, v_plus: f64, c: ChordCheck) -> Self {
        let (margin, side) = c.violation();
        Self {
            time: t,
            shock_label: curve.label,
            shock_name: curve.name.clone(),
            position: z,
            v_minus,
            v_plus,
            witness_k: c.k,
            lhs_slope: c.lhs,
            mid_slope: c.mid,
            rhs_slope: c.rhs,
            violated_side: side,
            margin,
        }
    }

    /// Largest disagreement between the stored slopes and a fresh evaluation.
    pub fn recheck(&self, flux: &PiecewiseCubicFlux) -> f64 {
        let c = chord_at(flux, self.v_minus, self.v_plus, self.witness_k);
        [c.lhs - self.lhs_slope, c.mid - self.mid_slope, c.rhs - self.rhs_slope]
            .iter()
            .fold(0.0, |m, d| m.max(d.abs()))
    }
}

/// Earliest violation and the witness at the state crossing `v_+ = z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub onset: EntropyViolationCertificate,
    pub witness: Option<EntropyViolationCertificate>,
}

fn worst_chord(flux: &PiecewiseCubicFlux, s: &ShockSample, n_k: usize) -> Option<ChordCheck> {
    let checks = oleinik_chord_check(flux, s.v_minus, s.v_plus, n_k).ok()?;
    checks
        .into_iter()
        .filter(|c| !c.ok)
        .max_by(|a, b| a.violation().0.total_cmp(&b.violation().0))
}

/// First violating sample of one curve: strided scan, then a full-resolution
/// pass over the stride that contains the first hit.
fn first_violation(
    flux: &PiecewiseCubicFlux,
    curve: &ShockCurve,
    stride: usize,
    n_k: usize,
) -> Option<EntropyViolationCertificate> {
    let s = &curve.samples;
    let coarse: Vec<usize> = (0..s.len()).step_by(stride).chain([s.len() - 1]).collect();
    let hit = coarse
        .par_iter()
        .position_first(|&i| worst_chord(flux, &s[i], n_k).is_some())?;
    let lo = if hit == 0 { 0 } else { coarse[hit - 1] };
    (lo..=coarse[hit]).find_map(|i| {
        worst_chord(flux, &s[i], n_k)
            .map(|c| EntropyViolationCertificate::new(curve, s[i].t, s[i].z, s[i].v_minus, s[i].v_plus, c))
    })
}

/// Scans every shock for chord violations. `dt_scan` sets the coarse stride;
/// the first hit is refined at the full sample resolution.
pub fn entropy_certificate(
    sol: &FrontTrackedSolution,
    dt_scan: f64,
    n_k: usize,
) -> Result<EntropyViolationCertificate> {
    if !(dt_scan > 0.0) {
        return Err(Error::invalid(format!("dt_scan = {dt_scan} must be positive")));
    }
    if n_k < 100 {
        return Err(Error::invalid(format!("n_k = {n_k} must be at least 100")));
    }
    let stride = ((dt_scan / sol.dt).round() as usize).max(1);
    sol.shocks
        .iter()
        .filter(|c| !c.samples.is_empty())
        .filter_map(|c| first_violation(&sol.flux, c, stride, n_k))
        .min_by(|a, b| a.time.total_cmp(&b.time).then(b.margin.total_cmp(&a.margin)))
        .ok_or(Error::NoViolationFound)
}

/// The chord test at `k = 0` on the merged shock at the time its right state
/// falls to the argmax of `H` on `[1/2, 3/2]`.
pub fn paper_witness(sol: &FrontTrackedSolution) -> Option<EntropyViolationCertificate> {
    let curve = sol.merged_shock()?;
    let z = paper_argmax();
    let (t3, z3) = super::counterexample::state_crossing(curve, z)?;
    let v_minus = curve.nearest_sample(t3).v_minus;
    let c = chord_at(&sol.flux, v_minus, z, 0.0);
    (!c.ok).then(|| EntropyViolationCertificate::new(curve, t3, z3, v_minus, z, c))
}

pub fn entropy_report(sol: &FrontTrackedSolution, dt_scan: f64, n_k: usize) -> Result<EntropyReport> {
    Ok(EntropyReport {
        onset: entropy_certificate(sol, dt_scan, n_k)?,
        witness: paper_witness(sol),
    })
}
