//! The subcommands. Each reads its parameters, runs, writes artifacts into a
//! staged directory and commits it only when every artifact is in place.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::output::{num, write_file_atomic, StagedDir};
use super::params::{Params, SCHEMA_VERSION};
use super::svg::{characteristics_svg, line_plot_svg};
use super::{ExitKind, ExperimentManifest};
use crate::error::{Error, Result};
use crate::flow::{run_flow_study, FlowStudyConfig};
use crate::flux::PiecewiseCubicFlux;
use crate::front_tracking::{
    build_counterexample_with, entropy_report, exact_constants, BuildMode, CounterexampleConfig, EntropyReport,
    FrontTrackedSolution,
};
use crate::grid::{GridKind, GridSolution};
use crate::profile::PiecewiseLinearProfile;
use crate::regularity::regularity_report;
use crate::viscosity::{cl_to_hj, godunov_run, CorrespondenceAnchor, GodunovConfig};

pub const SUBCOMMANDS: [&str; 5] = ["counterexample", "solve", "flow", "verify", "report"];

pub struct RunOutcome {
    pub manifest: ExperimentManifest,
    pub exit: ExitKind,
    pub path: PathBuf,
}

/// `paper`, `quadratic` or the path of a flux JSON document.
pub fn resolve_flux(spec: &str) -> Result<PiecewiseCubicFlux> {
    match spec {
        "paper" => Ok(PiecewiseCubicFlux::paper()),
        "quadratic" => Ok(PiecewiseCubicFlux::quadratic()),
        path => {
            let s = std::fs::read_to_string(path).map_err(|e| {
                Error::invalid(format!(
                    "flux `{path}` is neither a built-in name nor a readable file: {e}"
                ))
            })?;
            PiecewiseCubicFlux::from_json_str(&s)
        }
    }
}

/// `a:b:n` for `n` evenly spaced points on `[a, b]`, `random:a:b:n` for `n`
/// sorted uniform draws from the seeded generator, or a comma list.
pub fn parse_starts(spec: &str, seed: u64) -> Result<Vec<f64>> {
    let bad = || Error::invalid(format!("bad starts spec `{spec}`"));
    let parts: Vec<&str> = spec.split(':').collect();
    let out = match parts.as_slice() {
        ["random", a, b, n] => {
            let (a, b): (f64, f64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
            let n: usize = n.parse().map_err(|_| bad())?;
            if !(b > a) {
                return Err(bad());
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(a..b)).collect();
            v.sort_by(f64::total_cmp);
            v
        }
        [a, b, n] => {
            let (a, b): (f64, f64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
            let n: usize = n.parse().map_err(|_| bad())?;
            match n {
                0 => Vec::new(),
                1 => vec![a],
                _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
            }
        }
        [list] => list
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?,
        _ => return Err(bad()),
    };
    if out.is_empty() || out.iter().any(|x| !x.is_finite()) {
        return Err(bad());
    }
    Ok(out)
}

pub fn run_subcommand(name: &str, params: Params, out: &Path) -> Result<RunOutcome> {
    match name {
        "counterexample" => run_counterexample_cmd(params, out),
        "solve" => run_solve_cmd(params, out),
        "flow" => run_flow_cmd(params, out),
        "verify" => run_verify_cmd(params, out),
        "report" => run_report_cmd(params, out),
        other => Err(Error::invalid(format!("unknown subcommand `{other}`"))),
    }
}

fn finish(
    mut dir: StagedDir,
    subcommand: &str,
    params: &Params,
    derived: BTreeMap<String, Value>,
    status: ExitKind,
    started: Instant,
) -> Result<RunOutcome> {
    let mut artifacts = dir.artifacts().to_vec();
    artifacts.push("manifest.json".into());
    let manifest = ExperimentManifest {
        schema_version: SCHEMA_VERSION,
        config_hash: params.hash(subcommand),
        subcommand: subcommand.into(),
        parameters: params.to_json(),
        derived_constants: derived,
        artifact_paths: artifacts,
        status: match status {
            ExitKind::CertificateNotFound => "certificate_not_found".into(),
            _ => "ok".into(),
        },
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    dir.write_json("manifest.json", &manifest)?;
    let path = dir.commit()?;
    Ok(RunOutcome {
        manifest,
        exit: status,
        path,
    })
}

/// Output directory, optionally restricted to the formats of a `report` run.
fn staged(out: &Path, params: &Params) -> Result<StagedDir> {
    let dir = StagedDir::new(out)?;
    Ok(match params.str_opt("formats")? {
        Some(f) => dir.with_formats(f.split(',').map(|s| s.trim().to_string()).collect()),
        None => dir,
    })
}

const COMMON: [&str; 2] = ["seed", "formats"];

fn keys(specific: &[&'static str]) -> Vec<&'static str> {
    specific.iter().chain(COMMON.iter()).copied().collect()
}

/// The two-pass construction for the built-in `paper` flux; for any other
/// flux, generic tracking of the same initial datum.
fn build_solution(flux_spec: &str, mode: BuildMode, dt: f64, t_end: f64) -> Result<FrontTrackedSolution> {
    let cfg = CounterexampleConfig::new(mode, dt).with_t_end(t_end);
    if flux_spec == "paper" {
        return build_counterexample_with(&cfg);
    }
    let flux = resolve_flux(flux_spec)?;
    let paper = build_counterexample_with(&cfg)?;
    FrontTrackedSolution::detect(&flux, &paper.v0, dt, t_end)
}

/// A window holding every wave of `sol` up to its final time, with the
/// left end inside the left far field.
fn solution_window(sol: &FrontTrackedSolution) -> (f64, f64) {
    let knots = &sol.v0.knots;
    let mut lo = knots[0];
    let mut hi = knots[knots.len() - 1];
    for s in &sol.shocks {
        for p in [&s.samples[0], &s.samples[s.samples.len() - 1]] {
            lo = lo.min(p.z);
            hi = hi.max(p.z);
        }
    }
    // fans open from the far-field states at their characteristic speeds
    let left = (-sol.flux.deriv(sol.v0.left_extension)).max(0.0) * sol.t_end;
    let right = sol.flux.deriv(sol.v0.right_extension).max(0.0) * sol.t_end;
    ((lo - left - 10.0).floor(), (hi + right + 10.0).ceil())
}

fn certificate_json(report: &EntropyReport) -> Result<Value> {
    let head = report.witness.as_ref().unwrap_or(&report.onset);
    let mut v = serde_json::to_value(head)?;
    if let Value::Object(m) = &mut v {
        m.insert("witness_found".into(), Value::Bool(report.witness.is_some()));
        m.insert("onset".into(), serde_json::to_value(&report.onset)?);
    }
    Ok(v)
}

pub fn run_counterexample_cmd(mut p: Params, out: &Path) -> Result<RunOutcome> {
    let started = Instant::now();
    p.check_keys(&keys(&[
        "mode",
        "dt",
        "t_end",
        "flux",
        "dt_scan",
        "n_k",
        "grid_dx",
        "grid_dt",
        "n_characteristics",
        "shock_stride",
    ]))?;
    let mode: BuildMode = p.str_or("mode", "paper")?.parse()?;
    let dt = p.f64_or("dt", 1e-3)?;
    let t_end = p.f64_or("t_end", crate::front_tracking::DEFAULT_T_END)?;
    let flux_spec = p.str_or("flux", "paper")?;
    let dt_scan = p.f64_or("dt_scan", 0.05)?;
    let n_k = p.usize_or("n_k", 200)?;
    let grid_dx = p.f64_or("grid_dx", 0.05)?;
    let grid_dt = p.f64_or("grid_dt", 0.5)?;
    let n_chars = p.usize_or("n_characteristics", 60)?;
    let stride = p.usize_or("shock_stride", 10)?.max(1);
    p.u64_or("seed", 0)?;
    if !(dt > 0.0 && t_end > 0.0 && grid_dx > 0.0 && grid_dt > 0.0) {
        return Err(Error::invalid("dt, t_end, grid_dx and grid_dt must be positive"));
    }

    let sol = build_solution(&flux_spec, mode, dt, t_end)?;
    let paper_flux = flux_spec == "paper";
    if paper_flux && mode == BuildMode::Paper && sol.derived_constants.t3.is_none() {
        return Err(Error::invalid(format!(
            "t_end = {t_end} ends before the merged shock's right state reaches the flux argmax"
        )));
    }
    let entropy = match entropy_report(&sol, dt_scan, n_k) {
        Ok(r) => Some(r),
        Err(Error::NoViolationFound) => None,
        Err(e) => return Err(e),
    };

    // regularity of the HJ potential, starting after the launch time
    let (x_lo, x_hi) = solution_window(&sol);
    let cells = ((x_hi - x_lo) / grid_dx).round() as usize;
    let dx = (x_hi - x_lo) / cells as f64;
    let t_min = grid_dt.min(0.5 * t_end);
    let rows = ((t_end - t_min) / grid_dt).floor() as usize + 1;
    let f = sol.potential_grid(x_lo, dx, cells, t_min, grid_dt, rows, 2)?;
    let regularity = regularity_report(&f, &sol.flux, &sol.shocks, 3.0 * dx)?;

    // Godunov reference at the last grid time, on a window padded by the
    // fastest wave so that entropy waves stay clear of both ends
    let t_ref = f.t_max();
    let (vlo, vhi) = sol.v0.value_range();
    let pad = (sol.flux.max_abs_deriv(vlo, vhi) * t_ref / dx).ceil() as usize + 1;
    let g_lo = x_lo - pad as f64 * dx;
    let god = godunov_run(
        &sol.flux,
        &sol.v0,
        &GodunovConfig::new((g_lo, x_hi + pad as f64 * dx), t_ref, cells + 2 * pad).with_stored_intervals(Some(1)),
    )?;
    let anchor = CorrespondenceAnchor {
        x_anchor: g_lo,
        u_at_anchor_t0: sol.v0.integral(g_lo, 0.0),
        anchor_state: sol.v0.left_extension,
    };
    let u = cl_to_hj(&god.grid, &anchor, &sol.flux)?;
    let f_last = f.last_row();
    let u_last = &u.last_row()[pad..pad + f_last.len()];
    let mut dir = staged(out, &p)?;
    let shock_rows = sol.shocks.iter().flat_map(|c| {
        c.samples
            .iter()
            .step_by(stride)
            .chain(
                (c.samples.len() % stride != 1 || stride == 1)
                    .then(|| c.samples.last())
                    .flatten(),
            )
            .map(move |s| {
                vec![
                    c.name.clone(),
                    c.label.to_string(),
                    num(s.t),
                    num(s.z),
                    num(s.v_minus),
                    num(s.v_plus),
                    num(s.speed),
                ]
            })
    });
    dir.write_csv(
        "shocks.csv",
        &["curve", "label", "t", "z", "v_minus", "v_plus", "speed"],
        shock_rows,
    )?;

    let d = &sol.derived_constants;
    let exact = if paper_flux { exact_constants(&sol.flux) } else { None };
    let margin = entropy.as_ref().map(|r| r.witness.as_ref().unwrap_or(&r.onset).margin);
    let constants = json!({
        "flux": flux_spec,
        "mode": mode,
        "a": d.a,
        "x0": d.x0,
        "t0": d.t0,
        "launch_speed": d.launch_speed,
        "t_c": d.t_c_detected,
        "x_c": d.x_c_detected,
        "t1": d.t1,
        "L": d.l,
        "merge_z": d.merge_z,
        "merge_asymmetry": d.merge_asymmetry,
        "z_argmax": d.z_argmax,
        "t3": d.t3,
        "z_c_at_t3": d.z_c_at_t3,
        "rh_residual": sol.rh_residual(),
        "certificate_margin": margin,
        "exact": exact,
    });
    dir.write_json("constants.json", &constants)?;
    match &entropy {
        Some(r) => dir.write_json("certificate.json", &certificate_json(r)?)?,
        None => dir.write_json(
            "certificate.json",
            &json!({ "status": "no_violation_found", "flux": flux_spec, "n_k": n_k }),
        )?,
    }
    dir.write_bytes(
        "characteristics.svg",
        characteristics_svg(&sol, (x_lo.max(-25.0), x_hi.min(60.0)), t_end, n_chars).as_bytes(),
    )?;
    dir.write_json("regularity.json", &regularity)?;
    let xs = f.xs();
    dir.write_csv(
        "gap.csv",
        &["x", "f", "u", "gap"],
        xs.iter()
            .zip(f_last)
            .zip(u_last)
            .map(|((&x, &a), &b)| [num(x), num(a), num(b), num(a - b)]),
    )?;
    let gap: Vec<(f64, f64)> = xs
        .iter()
        .zip(f_last)
        .zip(u_last)
        .map(|((&x, &a), &b)| (x, a - b))
        .collect();
    dir.write_bytes(
        "gap.svg",
        line_plot_svg(
            &format!("f - u against the Godunov reference at t = {t_ref}"),
            "x",
            "f - u",
            &[("f - u", gap)],
        )
        .as_bytes(),
    )?;

    let mut derived = BTreeMap::new();
    for (k, v) in [
        ("a", json!(d.a)),
        ("x0", json!(d.x0)),
        ("t0", json!(d.t0)),
        ("t_c", json!(d.t_c_detected)),
        ("t1", json!(d.t1)),
        ("L", json!(d.l)),
        ("t3", json!(d.t3)),
        ("certificate_margin", json!(margin)),
        ("rh_residual", json!(sol.rh_residual())),
        ("semiconcavity_c", json!(regularity.semiconcavity_c)),
    ] {
        derived.insert(k.to_string(), v);
    }
    let status = if entropy.is_some() {
        ExitKind::Ok
    } else {
        ExitKind::CertificateNotFound
    };
    finish(dir, "counterexample", &p, derived, status, started)
}

pub fn run_solve_cmd(mut p: Params, out: &Path) -> Result<RunOutcome> {
    let started = Instant::now();
    p.check_keys(&keys(&[
        "flux", "ic", "t_max", "cells", "cfl", "x_min", "x_max", "rows",
    ]))?;
    let flux_spec = p.str_or("flux", "paper")?;
    let flux = resolve_flux(&flux_spec)?;
    let ic = p.str_or("ic", "counterexample")?;
    let v0 = if ic == "counterexample" {
        PiecewiseLinearProfile::counterexample(711.0 / 44.0)?
    } else {
        let s = std::fs::read_to_string(&ic).map_err(|e| Error::invalid(format!("cannot read ic `{ic}`: {e}")))?;
        PiecewiseLinearProfile::from_json_str(&s)?
    };
    let t_max = p.f64_or("t_max", 1.0)?;
    let cells = p.usize_or("cells", 2000)?;
    let cfl = p.f64_or("cfl", crate::viscosity::DEFAULT_CFL)?;
    let speed = flux.max_abs_deriv(v0.value_range().0, v0.value_range().1);
    let x_min = p.f64_or("x_min", (v0.knots[0] - 5.0 - speed * t_max).floor())?;
    let x_max = p.f64_or("x_max", (v0.knots[v0.knots.len() - 1] + 5.0 + speed * t_max).ceil())?;
    let rows = p.usize_or("rows", 100)?;
    p.u64_or("seed", 0)?;
    let mut cfg = GodunovConfig::new((x_min, x_max), t_max, cells)
        .with_cfl(cfl)
        .with_stored_intervals(Some(rows.max(1)));
    cfg.flux_id = Some(flux_spec.clone());
    let run = godunov_run(&flux, &v0, &cfg)?;

    let mut dir = staged(out, &p)?;
    let mut csv = Vec::new();
    run.grid.write_csv(&mut csv)?;
    dir.write_bytes("grid.csv", &csv)?;
    dir.write_bytes("grid.json", run.grid.to_json_envelope().as_bytes())?;
    let mut derived = BTreeMap::new();
    derived.insert("dx".into(), json!(run.grid.dx));
    derived.insert("scheme_dt".into(), json!(run.scheme_dt));
    derived.insert("steps".into(), json!(run.steps));
    derived.insert("mass_relative_error".into(), json!(run.ledger.relative_error));
    finish(dir, "solve", &p, derived, ExitKind::Ok, started)
}

pub fn run_flow_cmd(mut p: Params, out: &Path) -> Result<RunOutcome> {
    let started = Instant::now();
    p.check_keys(&keys(&[
        "flux",
        "mode",
        "track_dt",
        "t_end",
        "epsilon",
        "starts",
        "t_max",
        "dt",
        "grid_dx",
        "grid_dt",
        "x_min",
        "x_max",
        "samples_per_member",
    ]))?;
    let flux_spec = p.str_or("flux", "paper")?;
    let mode: BuildMode = p.str_or("mode", "detect")?.parse()?;
    let track_dt = p.f64_or("track_dt", 1e-3)?;
    let t_end = p.f64_or("t_end", 12.0)?;
    let eps = p.f64_list_or("epsilon", &[0.2, 0.1, 0.05])?;
    let seed = p.u64_or("seed", 0)?;
    let starts = parse_starts(&p.str_or("starts", "-4:24:57")?, seed)?;
    let t_max = p.f64_or("t_max", 0.5)?;
    let dt = match p.raw("dt") {
        None | Some(Value::Null) => None,
        Some(_) => Some(p.f64_or("dt", 0.0)?),
    };
    let mut cfg = FlowStudyConfig::new(eps, starts, t_max);
    cfg.dt = dt;
    cfg.dx = p.f64_or("grid_dx", cfg.dx)?;
    cfg.grid_dt = p.f64_or("grid_dt", cfg.grid_dt)?;
    cfg.x_range = (p.f64_or("x_min", cfg.x_range.0)?, p.f64_or("x_max", cfg.x_range.1)?);
    let per_member = p.usize_or("samples_per_member", 101)?.max(2);
    cfg.validate()?;
    if !(track_dt > 0.0) {
        return Err(Error::invalid("track_dt must be positive"));
    }

    let sol = build_solution(&flux_spec, mode, track_dt, t_end.max(t_max))?;
    let study = run_flow_study(&sol, &cfg)?;

    let mut dir = staged(out, &p)?;
    let mut rows = Vec::new();
    for r in &study.runs {
        let e = &r.ensemble;
        let stride = (e.times.len() - 1).div_ceil(per_member - 1).max(1);
        for (m, (tr, j)) in e.trajectories.iter().zip(&e.jacobian_dets).enumerate() {
            let idx = (0..e.times.len())
                .step_by(stride)
                .chain(((e.times.len() - 1) % stride != 0).then_some(e.times.len() - 1));
            for s in idx {
                rows.push([num(r.epsilon), m.to_string(), num(e.times[s]), num(tr[s]), num(j[s])]);
            }
        }
    }
    dir.write_csv("ensemble.csv", &["epsilon", "member", "t", "x", "J"], rows)?;
    let runs: Vec<Value> = study
        .runs
        .iter()
        .map(|r| {
            let mut d = serde_json::to_value(&r.diagnostics).unwrap_or(Value::Null);
            if let Value::Object(m) = &mut d {
                m.insert("epsilon".into(), json!(r.epsilon));
                m.insert("dt".into(), json!(r.ensemble.dt));
                m.insert("halving_gap".into(), json!(r.ensemble.halving_gap));
                m.insert("jacobian_identity_defect".into(), json!(r.identity_defect));
                m.insert("tube_excess".into(), json!(r.tube_excess));
                m.insert(
                    "near_shock_members".into(),
                    json!(r.near_shock.iter().filter(|n| **n).count()),
                );
            }
            d
        })
        .collect();
    let diagnostics = json!({
        "c0": study.c0,
        "max_second_deriv": study.max_second_deriv,
        "c_used": study.c,
        "w_horizon": study.w_horizon,
        "residual_trend": study.trend,
        "runs": runs,
    });
    dir.write_json("diagnostics.json", &diagnostics)?;
    let mut res = Vec::new();
    for r in &study.runs {
        for ((x, v), near) in cfg.starts.iter().zip(&r.residuals).zip(&r.near_shock) {
            res.push([num(r.epsilon), num(*x), num(*v), near.to_string()]);
        }
    }
    dir.write_csv("residuals.csv", &["epsilon", "start", "residual", "near_shock"], res)?;

    let mut derived = BTreeMap::new();
    derived.insert("c0".into(), json!(study.c0));
    derived.insert("c_used".into(), json!(study.c));
    derived.insert("w_horizon".into(), json!(study.w_horizon));
    derived.insert("residual_trend_fraction".into(), json!(study.trend.fraction));
    finish(dir, "flow", &p, derived, ExitKind::Ok, started)
}

/// Nodal potentials pass through; cell averages are integrated from the left
/// end, which must hold a constant state.
fn as_potential(g: GridSolution, flux: &PiecewiseCubicFlux) -> Result<GridSolution> {
    match g.kind {
        GridKind::Nodal => Ok(g),
        GridKind::CellAverage => {
            let anchor = CorrespondenceAnchor {
                x_anchor: g.x_min,
                u_at_anchor_t0: 0.0,
                anchor_state: g.values[0][0],
            };
            let shifted = GridSolution {
                t_min: 0.0,
                ..g.clone()
            };
            let mut u = cl_to_hj(&shifted, &anchor, flux)?;
            u.t_min = g.t_min;
            Ok(u)
        }
    }
}

/// `verify` writes `report.json` into `out`, or straight to `out` when it
/// names a `.json` file.
pub fn run_verify_cmd(mut p: Params, out: &Path) -> Result<RunOutcome> {
    let started = Instant::now();
    p.check_keys(&keys(&["input", "flux", "radius"]))?;
    let input = p
        .str_opt("input")?
        .ok_or_else(|| Error::invalid("verify needs --input grid.json"))?;
    let flux_spec = p.str_or("flux", "paper")?;
    let flux = resolve_flux(&flux_spec)?;
    let s = std::fs::read_to_string(&input).map_err(|e| Error::invalid(format!("cannot read `{input}`: {e}")))?;
    let g = GridSolution::from_json_envelope(&s)?;
    let radius = p.f64_or("radius", 3.0 * g.dx)?;
    p.u64_or("seed", 0)?;
    let f = as_potential(g, &flux)?;
    let report = regularity_report(&f, &flux, &[], radius)?;
    let mut derived = BTreeMap::new();
    derived.insert("lipschitz".into(), json!(report.lipschitz));
    derived.insert("semiconcavity_c".into(), json!(report.semiconcavity_c));
    derived.insert("one_sided_lipschitz".into(), json!(report.one_sided_lipschitz));
    if out.extension().is_some_and(|e| e == "json") {
        let mut body = serde_json::to_string_pretty(&report)?;
        body.push('\n');
        write_file_atomic(out, body.as_bytes())?;
        let manifest = ExperimentManifest {
            schema_version: SCHEMA_VERSION,
            config_hash: p.hash("verify"),
            subcommand: "verify".into(),
            parameters: p.to_json(),
            derived_constants: derived,
            artifact_paths: vec![out.display().to_string()],
            status: "ok".into(),
            wall_time_s: started.elapsed().as_secs_f64(),
        };
        return Ok(RunOutcome {
            manifest,
            exit: ExitKind::Ok,
            path: out.to_path_buf(),
        });
    }
    let mut dir = staged(out, &p)?;
    dir.write_json("report.json", &report)?;
    finish(dir, "verify", &p, derived, ExitKind::Ok, started)
}

/// Re-runs the command recorded in `input/manifest.json` with its recorded
/// parameters and keeps only the artifacts of the requested formats.
pub fn run_report_cmd(mut p: Params, out: &Path) -> Result<RunOutcome> {
    p.check_keys(&keys(&["input", "format"]))?;
    let input = p
        .str_opt("input")?
        .ok_or_else(|| Error::invalid("report needs --input DIR"))?;
    let format = p.str_or("format", "all")?;
    let path = Path::new(&input).join("manifest.json");
    let s =
        std::fs::read_to_string(&path).map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
    let m: ExperimentManifest = serde_json::from_str(&s)?;
    if m.subcommand == "report" || !SUBCOMMANDS.contains(&m.subcommand.as_str()) {
        return Err(Error::invalid(format!("cannot report on a `{}` run", m.subcommand)));
    }
    let Value::Object(map) = m.parameters else {
        return Err(Error::invalid("manifest parameters are not an object"));
    };
    let mut inner = Params::default();
    for (k, v) in map {
        if k != "formats" {
            inner.set(&k, v);
        }
    }
    let formats = match format.as_str() {
        "all" => None,
        "csv" | "json" | "svg" => Some(format.clone()),
        other => {
            return Err(Error::invalid(format!(
                "unknown format `{other}` (csv, json, svg or all)"
            )))
        }
    };
    if let Some(f) = formats {
        inner.set("formats", f);
    }
    run_subcommand(&m.subcommand, inner, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starts_specs() {
        assert_eq!(parse_starts("0:1:3", 0).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_starts("1.5, -2", 0).unwrap(), vec![1.5, -2.0]);
        let a = parse_starts("random:-1:1:20", 7).unwrap();
        assert_eq!(a, parse_starts("random:-1:1:20", 7).unwrap());
        assert_ne!(a, parse_starts("random:-1:1:20", 8).unwrap());
        assert!(a.windows(2).all(|w| w[0] <= w[1]));
        assert!(a.iter().all(|x| (-1.0..1.0).contains(x)));
        for bad in ["", "a:b:c", "0:1:0", "random:1:0:3"] {
            assert!(parse_starts(bad, 0).is_err(), "{bad}");
        }
    }

    #[test]
    fn flux_specs() {
        assert!(resolve_flux("paper").is_ok());
        assert!(resolve_flux("quadratic").is_ok());
        assert!(matches!(
            resolve_flux("/no/such/flux.json"),
            Err(Error::InvalidInput(_))
        ));
    }
}
