//! Acceptance suite: one PASS/FAIL line per criterion at the pinned
//! tolerances. Criteria listed in `KNOWN_UNATTAINABLE` are expected to fail
//! (see "Known failures" in the README); they are still run and printed, and
//! only an unexpected failure makes the process exit nonzero.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use hjselect::flow::{
    flow_diagnostics, integrate_flow, mollify_profile, run_flow_study, ComparisonInputs, FlowStudy, FlowStudyConfig,
    Potential,
};
use hjselect::flux::{paper_argmax, theta_slice, theta_slice_analysis};
use hjselect::front_tracking::*;
use hjselect::report::{run_counterexample_cmd, Params};
use hjselect::viscosity::{godunov_run, hopf_lax_eval, GodunovConfig};
use hjselect::{Error, GridSolution, PiecewiseCubicFlux};
use num_rational::Rational64;

const KNOWN_UNATTAINABLE: [(u32, &str); 2] = [
    (
        8,
        "the exponential Jacobian bound needs b_x >= -c, which fails where shocks compress and H'' < 0",
    ),
    (
        9,
        "first-order Godunov smears the compressive ramp kink; the decrease along W halves with dx",
    ),
];

/// Named sub-checks of one criterion.
#[derive(Default)]
struct Checks(Vec<(String, bool)>);

impl Checks {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        self.0.push((what.into(), ok));
    }

    fn pass(&self) -> bool {
        self.0.iter().all(|(_, ok)| *ok)
    }

    fn summary(&self) -> String {
        let failed: Vec<&str> = self.0.iter().filter(|(_, ok)| !ok).map(|(s, _)| s.as_str()).collect();
        if failed.is_empty() {
            self.0.iter().map(|(s, _)| s.as_str()).collect::<Vec<_>>().join("; ")
        } else {
            format!("failed: {}", failed.join("; "))
        }
    }
}

/// Independent closed form of the paper flux.
fn h_oracle(p: f64) -> f64 {
    let q = p.abs();
    if q <= 0.5 {
        0.5 * q * q
    } else {
        -1.25 * q * q * q + 2.375 * q * q - 0.9375 * q + 0.15625
    }
}

fn show(q: Option<Rational64>) -> String {
    q.map_or("none".into(), |q| q.to_string())
}

fn paper() -> &'static FrontTrackedSolution {
    static S: OnceLock<FrontTrackedSolution> = OnceLock::new();
    S.get_or_init(|| build_counterexample(1e-3, BuildMode::Paper).unwrap())
}

fn studies() -> &'static (FlowStudy, FlowStudy) {
    static S: OnceLock<(FlowStudy, FlowStudy)> = OnceLock::new();
    S.get_or_init(|| {
        let sol =
            build_counterexample_with(&CounterexampleConfig::new(BuildMode::Detect, 1e-3).with_t_end(12.0)).unwrap();
        let convex = FrontTrackedSolution::detect(&PiecewiseCubicFlux::quadratic(), &sol.v0, 1e-3, 12.0).unwrap();
        let starts: Vec<f64> = (0..57).map(|i| -4.0 + 0.5 * i as f64).collect();
        let cfg = FlowStudyConfig::new(vec![0.2, 0.1, 0.05], starts, 0.5);
        (
            run_flow_study(&sol, &cfg).unwrap(),
            run_flow_study(&convex, &cfg).unwrap(),
        )
    })
}

fn c1_constants() -> Checks {
    let mut c = Checks::default();
    let flux = PiecewiseCubicFlux::paper();
    let a = flux.eval_exact(Rational64::new(-3, 2), 1);
    c.check(a == Some(Rational64::new(9, 4)), format!("a = {} exact", show(a)));
    let d = &paper().derived_constants;
    c.check((d.t0 - 0.36).abs() <= 0.005, format!("t0 = {:.6}", d.t0));
    c.check((d.x0 - 0.68).abs() <= 0.005, format!("x0 = {:.6}", d.x0));
    // Rankine-Hugoniot chord between -3/2 and -1/2
    let launch = (h_oracle(-0.5) - h_oracle(-1.5)) / 1.0;
    c.check(
        (d.launch_speed - launch).abs() <= 1e-9,
        format!("launch speed {:.12} vs {launch}", d.launch_speed),
    );
    c
}

fn c2_flux() -> Checks {
    let mut c = Checks::default();
    let flux = PiecewiseCubicFlux::paper();
    let gap = flux
        .breakpoint_gaps()
        .iter()
        .flatten()
        .fold(0.0f64, |m, g| m.max(g.abs()));
    c.check(gap <= 1e-12, format!("C2 matching gap {gap:.1e}"));
    let odd = (0..=3000)
        .map(|i| -3.0 + 0.002 * i as f64)
        .map(|p| {
            (0..=2)
                .map(|k| (flux.eval(p, k) - (-1f64).powi(k as i32) * flux.eval(-p, k)).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    c.check(odd <= 1e-12, format!("evenness defect {odd:.1e}"));
    let tg = flux.tangent_gap_exact(Rational64::new(1, 2), Rational64::new(3, 2));
    c.check(
        tg == Some(Rational64::new(-3, 4)),
        format!("tangent gap {} exact", show(tg)),
    );
    c
}

fn c3_certificate() -> Checks {
    let mut c = Checks::default();
    let r = entropy_report(paper(), 0.05, 200).unwrap();
    let Some(w) = r.witness else {
        c.check(false, "no witness");
        return c;
    };
    let z = paper_argmax();
    c.check(w.v_minus == -1.5, format!("v- = {}", w.v_minus));
    c.check((w.v_plus - z).abs() <= 1e-6, format!("v+ = {:.9} vs {z:.9}", w.v_plus));
    c.check(
        w.witness_k == 0.0 && w.violated_side == Side::Left,
        "k = 0, left inequality",
    );
    let (vm, vp, k) = (w.v_minus, w.v_plus, w.witness_k);
    let oracle = (h_oracle(vp) - h_oracle(k)) / (vp - k) - (h_oracle(vp) - h_oracle(vm)) / (vp - vm);
    c.check(
        (w.margin - oracle).abs() <= 1e-9,
        format!("margin {:.6} vs chord oracle {oracle:.6}", w.margin),
    );
    c.check((w.margin - 0.151).abs() <= 0.002, "margin within 0.151 +- 0.002");
    let control = FrontTrackedSolution::detect(&PiecewiseCubicFlux::quadratic(), &paper().v0, 1e-3, 120.0).unwrap();
    let none = matches!(entropy_report(&control, 0.05, 200), Err(Error::NoViolationFound));
    c.check(none, "convex control: NoViolationFound");
    c
}

fn c4_rankine_hugoniot() -> Checks {
    let mut c = Checks::default();
    let build =
        |dt| build_counterexample_with(&CounterexampleConfig::new(BuildMode::Paper, dt).with_t_end(120.0)).unwrap();
    let (coarse, fine) = (build(2e-4), build(1e-4));
    for label in [ShockLabel::A, ShockLabel::B, ShockLabel::C] {
        let (rc, rf) = (
            coarse.shock(label).unwrap().rh_residual(),
            fine.shock(label).unwrap().rh_residual(),
        );
        c.check(rf <= 1e-5, format!("{label}: {rf:.2e} at dt = 1e-4"));
        c.check(rc / rf >= 1.8, format!("{label}: ratio {:.2} under halving", rc / rf));
    }
    c
}

fn c5_merge() -> Checks {
    let mut c = Checks::default();
    let dt = 1e-3;
    let sol = paper();
    let (a, b) = (sol.shock(ShockLabel::A).unwrap(), sol.shock(ShockLabel::B).unwrap());
    let asym = a
        .samples
        .iter()
        .zip(&b.samples)
        .map(|(p, q)| {
            assert_eq!(p.t, q.t);
            (p.z + q.z).abs()
        })
        .fold(0.0, f64::max);
    c.check(asym <= 1e-8, format!("max |zA + zB| = {asym:.1e}"));
    let d = &sol.derived_constants;
    let speed = sol.flux.max_abs_deriv(-1.5, 1.5);
    c.check(
        d.merge_z.abs() <= 2.0 * dt * speed,
        format!("merge at x = {:.1e}", d.merge_z),
    );
    let arrival = d.l / -sol.flux.deriv(sol.v0.value(d.l));
    let pos = characteristic_position(&sol.flux, &sol.v0, d.t1, d.l);
    c.check(
        (arrival - d.t1).abs() <= 2.0 * dt,
        format!("x = L reaches 0 at {arrival:.6}, t1 = {:.6}", d.t1),
    );
    c.check(
        pos.abs() <= 2.0 * dt * speed,
        format!("characteristic from L at t1: {pos:.1e}"),
    );
    c
}

fn c6_gap() -> Checks {
    let mut c = Checks::default();
    let (lo, hi, window) = (-300.0, 320.0, (-5.0, 30.0));
    let times = [40.0, 60.0, 80.0, 110.0];
    let cells = [6200usize, 12400, 24800];
    let onset = entropy_report(paper(), 0.05, 200).unwrap().onset.time;
    let l1 = |a: &[f64], b: &[f64], g: &GridSolution| -> f64 {
        a.iter()
            .zip(b)
            .enumerate()
            .filter(|(j, _)| (window.0..window.1).contains(&(g.x_min + (*j as f64 + 0.5) * g.dx)))
            .map(|(_, (p, q))| (p - q).abs() * g.dx)
            .sum()
    };
    let coarsen = |fine: &[f64]| -> Vec<f64> { fine.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect() };
    let control = FrontTrackedSolution::detect(&PiecewiseCubicFlux::quadratic(), &paper().v0, 1e-3, 120.0).unwrap();
    for (name, sol) in [("paper", paper()), ("quadratic", &control)] {
        let grids: Vec<GridSolution> = cells
            .iter()
            .map(|&n| {
                let cfg = GodunovConfig::new((lo, hi), 120.0, n).with_stored_intervals(Some(24));
                godunov_run(&sol.flux, &sol.v0, &cfg).unwrap().grid
            })
            .collect();
        for &t in &times {
            let k = grids[0].nearest_row(t);
            let rows: Vec<&[f64]> = grids.iter().map(|g| g.row(k)).collect();
            // Richardson estimate of the finest scheme error with the observed order
            let d1 = l1(rows[0], &coarsen(rows[1]), &grids[0]);
            let d2 = l1(rows[1], &coarsen(rows[2]), &grids[1]);
            let order = (d1 / d2).log2();
            let err = d2 / (2f64.powf(order) - 1.0);
            let g = &grids[2];
            let ft = sol.sample_cells(g.x_min, g.dx, g.nx(), g.t(k), 1.0, 1, 4).unwrap();
            let gap = l1(ft.last_row(), rows[2], g);
            if name == "paper" {
                c.check(
                    g.t(k) > onset && gap > 10.0 * err,
                    format!("paper t = {t}: L1 {gap:.3} > 10 x {err:.2e}"),
                );
            } else {
                c.check(gap <= err, format!("quadratic t = {t}: L1 {gap:.2e} <= {err:.2e}"));
            }
        }
    }
    c
}

fn c7_hopf_lax() -> Checks {
    let mut c = Checks::default();
    let q = PiecewiseCubicFlux::quadratic();
    let mut worst = 0.0f64;
    for &(t, x) in &[(0.1, 0.0), (0.5, -1.3), (1.0, 2.0), (2.0, 0.7)] {
        let u = hopf_lax_eval(&q, |y| y, t, x, (x - 10.0, x + 10.0), 1e-12).unwrap();
        worst = worst.max((u - (x + t / 2.0)).abs());
    }
    c.check(worst <= 1e-9, format!("affine error {worst:.1e}"));
    let mut worst = 0.0f64;
    for i in 0..20 {
        let t = 0.04 * (i + 1) as f64;
        let x = -2.0 + 4.0 * ((i * 7) % 20) as f64 / 19.0;
        let u = hopf_lax_eval(&q, |y| 0.5 * y * y, t, x, (-30.0, 30.0), 1e-12).unwrap();
        worst = worst.max((u - x * x / (2.0 * (1.0 - t))).abs());
    }
    c.check(worst <= 1e-6, format!("quadratic data error {worst:.1e} at 20 points"));
    c
}

fn c8_flow_bounds() -> Checks {
    let mut c = Checks::default();
    let k = 0.8;
    let m = mollify_profile(
        Potential::Function(Arc::new(move |_, x: f64| 0.5 * k * x * x)),
        &PiecewiseCubicFlux::quadratic(),
        0.1,
    )
    .unwrap();
    let starts: Vec<f64> = (0..11).map(|i| -1.0 + 0.2 * i as f64).collect();
    let e = integrate_flow(&m, &starts, 0.0, 1.0, 0.01).unwrap();
    let eq = e
        .jacobian_dets
        .iter()
        .flat_map(|j| j.iter().zip(&e.times).map(|(j, t)| (1.0 / j - (k * t).exp()).abs()))
        .fold(0.0, f64::max);
    c.check(eq <= 1e-9, format!("linear field |1/J - e^kt| {eq:.1e}"));
    let zero = |_: f64, _: f64| 0.0;
    let id = |_: f64, x: f64| x;
    let cmp = ComparisonInputs {
        f: &zero,
        u: &zero,
        w: &id,
        w_horizon: 1.0,
        w_times: &[0.0],
    };
    let d = flow_diagnostics(&e, &cmp, k).unwrap();
    c.check(
        d.det_bound_ok,
        format!("linear field bound margin {:.1e}", d.det_worst_margin),
    );
    let study = &studies().0;
    for r in &study.runs {
        c.check(
            r.diagnostics.det_bound_ok,
            format!(
                "eps = {}: 1/J <= e^(ct)(1 + 1e-6) with c = {:.3}, margin {:.2e}",
                r.epsilon, study.c, r.diagnostics.det_worst_margin
            ),
        );
        c.check(
            r.identity_defect <= 1e-6,
            format!("eps = {}: log-J identity {:.1e}", r.epsilon, r.identity_defect),
        );
    }
    c
}

fn c9_comparison() -> Checks {
    let mut c = Checks::default();
    let (cx, convex) = studies();
    for (name, s) in [("counter-example", cx), ("convex", convex)] {
        for r in &s.runs {
            let d = &r.diagnostics;
            c.check(
                d.monotone_up_ok,
                format!(
                    "{name} eps = {}: worst step decrease {:.2e}",
                    r.epsilon, d.monotone_up_along_w
                ),
            );
            c.check(
                d.final_gap_min >= -1e-6,
                format!("{name} eps = {}: final min f - u {:.2e}", r.epsilon, d.final_gap_min),
            );
        }
    }
    c
}

fn c10_residual_trend() -> Checks {
    let mut c = Checks::default();
    let t = &studies().0.trend;
    c.check(
        t.kept > 0 && t.fraction >= 0.9,
        format!("{}/{} kept starts non-increasing", t.non_increasing, t.kept),
    );
    c
}

fn c11_theta() -> Checks {
    let mut c = Checks::default();
    let r = theta_slice_analysis(2001).unwrap();
    c.check(theta_slice(0.5) == 0.875, format!("g(1/2) = {}", theta_slice(0.5)));
    c.check(
        (r.local_max_at - 0.5).abs() <= 1e-6 && (r.barrier_value - 0.875).abs() <= 1e-12,
        format!("refined barrier {} at {:.7}", r.barrier_value, r.local_max_at),
    );
    let sym = (r.minimizers.0 + r.minimizers.1 - 1.0).abs();
    c.check(
        sym <= 1e-6,
        format!("minimizers {:.7}, {:.7}", r.minimizers.0, r.minimizers.1),
    );
    let grid = (0..=1_000_000)
        .map(|i| theta_slice(i as f64 * 1e-6))
        .fold(f64::INFINITY, f64::min);
    c.check(
        (r.well_value - grid).abs() <= 1e-3,
        format!("well {:.6} vs grid {grid:.6}", r.well_value),
    );
    c.check((r.well_value - 0.8333).abs() <= 1e-3, "well within 0.8333 +- 1e-3");
    c
}

fn c12_determinism() -> Checks {
    let mut c = Checks::default();
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let mut p = Params::default();
        p.set("t_end", 120.0);
        p.set("dt", 1e-3);
        let out = dir.path().join(name);
        run_counterexample_cmd(p, &out).unwrap();
        out
    };
    let (a, b) = (run("a"), run("b"));
    for f in ["constants.json", "certificate.json"] {
        let same = std::fs::read(a.join(f)).unwrap() == std::fs::read(b.join(f)).unwrap();
        c.check(same, format!("{f} byte-identical"));
    }
    c
}

type Criterion = (u32, &'static str, fn() -> Checks);

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        (1, "construction constants", c1_constants),
        (2, "flux regularity", c2_flux),
        (3, "entropy-violation certificate", c3_certificate),
        (4, "Rankine-Hugoniot fidelity", c4_rankine_hugoniot),
        (5, "merge symmetry", c5_merge),
        (6, "non-entropy vs entropy gap", c6_gap),
        (7, "Hopf-Lax oracle", c7_hopf_lax),
        (8, "flow bounds", c8_flow_bounds),
        (9, "monotone comparison", c9_comparison),
        (10, "integral-residual trend", c10_residual_trend),
        (11, "theta slice", c11_theta),
        (12, "determinism", c12_determinism),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = 0;
    for (n, name, run) in criteria {
        if !filter.is_empty() && !filter.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = match catch_unwind(AssertUnwindSafe(run)) {
            Ok(c) => (c.pass(), c.summary()),
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        let known = KNOWN_UNATTAINABLE.iter().find(|(k, _)| *k == n);
        let secs = start.elapsed().as_secs_f64();
        println!(
            "{} {n:>2} {name} ({secs:.1} s): {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
        match (pass, known) {
            (false, Some((_, why))) => println!("        expected failure: {why}"),
            (true, Some(_)) => println!("        note: passed although listed as unattainable"),
            (false, None) => unexpected += 1,
            (true, None) => {}
        }
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected failure(s)");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
