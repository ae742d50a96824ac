use std::sync::OnceLock;

use approx::assert_abs_diff_eq;
use hjselect::flux::paper_argmax;
use hjselect::front_tracking::*;
use hjselect::{Error, PiecewiseCubicFlux, PiecewiseLinearProfile};
use proptest::prelude::*;

fn paper() -> &'static FrontTrackedSolution {
    static SOL: OnceLock<FrontTrackedSolution> = OnceLock::new();
    SOL.get_or_init(|| build_counterexample(1e-3, BuildMode::Paper).unwrap())
}

fn curve(name: &str) -> &'static ShockCurve {
    paper().shock_named(name).unwrap()
}

#[test]
fn merge_time_matches_conserved_quantity() {
    let c = &paper().derived_constants;
    // D(v)(1+t) with D(-1/2) = 3/4 at t0 = 4/11 and D(0) = 1/8 at the merge
    let t1 = (1.0 + 4.0 / 11.0) * (3.0 / 4.0) / (1.0 / 8.0) - 1.0;
    assert_abs_diff_eq!(c.t1, t1, epsilon = 2e-3);
    assert_abs_diff_eq!(c.l, 2.25 * c.t1, epsilon = 1e-12);
    assert!(c.merge_z.abs() <= 2.0 * 1e-3 * 0.5);
    // the characteristic from x = L reaches the axis at t1
    let h = PiecewiseCubicFlux::paper();
    assert_abs_diff_eq!(c.l / -h.deriv(1.5), c.t1, epsilon = 2e-3);
}

#[test]
fn exact_constants_are_rational_closed_forms() {
    let e = exact_constants(&PiecewiseCubicFlux::paper()).unwrap();
    assert_eq!(
        (e.a.as_str(), e.x0.as_str(), e.t0.as_str(), e.launch_speed.as_str()),
        ("9/4", "15/22", "4/11", "1/4")
    );
    assert_eq!(
        (e.t_c.as_str(), e.t1.as_str(), e.l.as_str()),
        ("2/13", "79/11", "711/44")
    );
    assert!(exact_constants(&PiecewiseCubicFlux::quadratic()).is_some());
}

#[test]
fn central_shocks_are_mirror_images() {
    let (a, b) = (curve("left"), curve("right"));
    assert_eq!(a.samples.len(), b.samples.len());
    for (p, q) in a.samples.iter().zip(&b.samples) {
        assert_eq!(p.t, q.t);
        assert!((p.z + q.z).abs() <= 1e-8, "t = {}: {} vs {}", p.t, p.z, q.z);
        assert!((p.v_minus + q.v_plus).abs() <= 1e-8);
    }
}

#[test]
fn jumps_of_labelled_shocks_are_nonnegative() {
    for label in [ShockLabel::A, ShockLabel::B, ShockLabel::C] {
        let c = paper().shock(label).unwrap();
        assert!(c.samples.iter().all(|s| s.jump() >= 0.0), "{label}");
    }
}

#[test]
fn left_shock_moves_right() {
    assert!(curve("left").samples.iter().all(|s| s.speed >= 0.0));
}

#[test]
fn merged_shock_accelerates_while_state_falls() {
    let c = curve("merged");
    let z = paper_argmax();
    let window: Vec<_> = c.samples.iter().filter(|s| s.v_plus >= z && s.v_plus <= 1.5).collect();
    assert!(window.len() > 1000);
    for w in window.windows(2) {
        assert!(w[0].speed >= -1e-12);
        assert!(w[1].speed >= w[0].speed - 1e-6, "t = {}", w[1].t);
    }
}

#[test]
fn state_crossing_defines_t3() {
    let c = &paper().derived_constants;
    let t3 = c.t3.unwrap();
    assert!(t3 > c.t1 && t3 < paper().t_end);
    let s = curve("merged").nearest_sample(t3);
    assert!((s.v_plus - paper_argmax()).abs() < 1e-4);
}

#[test]
fn ramp_shock_is_downward_and_entropic() {
    let r = curve("ramp");
    assert_abs_diff_eq!(r.t_start(), 1.0, epsilon = 1e-9);
    let h = PiecewiseCubicFlux::paper();
    for s in r.samples.iter().skip(1).step_by(997) {
        assert!(s.jump() < 0.0);
        let checks = oleinik_chord_check(&h, s.v_minus, s.v_plus, 100).unwrap();
        assert!(checks.iter().all(|c| c.ok), "t = {}", s.t);
    }
}

#[test]
fn rh_residual_small() {
    assert!(paper().rh_residual() <= 1e-5, "{}", paper().rh_residual());
}

#[test]
fn eval_examples() {
    let sol = paper();
    let c = &sol.derived_constants;
    assert_eq!(sol.eval(0.1, 0.0).unwrap(), 0.0);
    let d = 1e-7;
    assert_abs_diff_eq!(sol.eval(c.t0, -c.x0 - d).unwrap(), -1.5, epsilon = 1e-12);
    assert_abs_diff_eq!(sol.eval(c.t0, -c.x0 + d).unwrap(), -0.5, epsilon = 1e-6);
    let z = curve("merged").position_at(50.0);
    assert!(matches!(sol.eval(50.0, z), Err(Error::OnShock { .. })));
    assert!(sol.eval(sol.t_end + 1.0, 0.0).is_err());
}

#[test]
fn paper_mode_is_ambiguous_before_launch() {
    // folded cubic branch between the first crossing and the launch time
    let sol = paper();
    let t = 0.3;
    let hits = (0..400)
        .map(|i| -2.0 + i as f64 * 0.005)
        .filter(|&x| matches!(sol.eval(t, x), Err(Error::StateReconstructionFailed { .. })))
        .count();
    assert!(hits > 0);
}

#[test]
fn detect_mode_starts_at_first_crossing() {
    let sol = build_counterexample(1e-3, BuildMode::Detect).unwrap();
    let c = &sol.derived_constants;
    assert_abs_diff_eq!(c.t_c_detected, 2.0 / 13.0, epsilon = 1e-12);
    assert!(c.t_c_detected < 4.0 / 11.0);
    let left = sol.shock_named("left").unwrap();
    assert_abs_diff_eq!(left.t_start(), 2.0 / 13.0, epsilon = 1e-12);
    assert_abs_diff_eq!(left.origin.1, -15.0 / 13.0, epsilon = 1e-12);
    // single valued everywhere, including the paper's blind interval
    for i in 0..200 {
        sol.eval_near(0.3, -2.0 + i as f64 * 0.02).unwrap();
    }
}

#[test]
fn entropy_violation_certified() {
    let r = entropy_report(paper(), 0.05, 200).unwrap();
    let w = r.witness.unwrap();
    assert_eq!(w.shock_label, ShockLabel::C);
    assert_eq!(w.witness_k, 0.0);
    assert_eq!(w.violated_side, Side::Left);
    assert_abs_diff_eq!(w.margin, 0.151, epsilon = 2e-3);
    assert!(w.recheck(&PiecewiseCubicFlux::paper()) <= 1e-12);
    assert!(r.onset.margin > 0.0);
    assert!(r.onset.time < w.time);
    assert!(r.onset.recheck(&PiecewiseCubicFlux::paper()) <= 1e-12);
}

#[test]
fn convex_control_has_no_violation() {
    let h = PiecewiseCubicFlux::quadratic();
    let v0 = PiecewiseLinearProfile::ramp(-1.0, 1.0, 1.0, -1.0).unwrap();
    let sol = FrontTrackedSolution::detect(&h, &v0, 1e-3, 5.0).unwrap();
    assert_eq!(sol.shocks.len(), 1);
    let s = &sol.shocks[0];
    assert_abs_diff_eq!(s.t_start(), 1.0, epsilon = 1e-12);
    let drift = s.samples.iter().map(|p| p.z.abs()).fold(0.0, f64::max);
    assert!(drift < 1e-12, "drift {drift} {:?}", &s.samples[..3]);
    assert!(matches!(
        entropy_certificate(&sol, 0.05, 100),
        Err(Error::NoViolationFound)
    ));
}

#[test]
fn step_halving_agrees() {
    let coarse =
        build_counterexample_with(&CounterexampleConfig::new(BuildMode::Paper, 1e-3).with_t_end(20.0)).unwrap();
    let gap = step_halving_gap(&coarse).unwrap();
    assert!(gap <= 1e-6, "{gap}");
}

fn bump(s: f64) -> (f64, f64) {
    if s.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let w = 1.0 - s * s;
    (w * w * w, -6.0 * s * w * w)
}

/// `int int v phi_t + H(v) phi_x` by the midpoint rule on an `n x n` grid
/// over the support of a product bump centred at `(tc, xc)`.
fn weak_residual(sol: &FrontTrackedSolution, tc: f64, xc: f64, rt: f64, rx: f64, n: usize) -> (f64, f64) {
    let (ht, hx) = (2.0 * rt / n as f64, 2.0 * rx / n as f64);
    let xs: Vec<f64> = (0..n).map(|j| xc - rx + (j as f64 + 0.5) * hx).collect();
    let mut acc = 0.0;
    for k in 0..n {
        let t = tc - rt + (k as f64 + 0.5) * ht;
        let (pt, dpt) = bump((t - tc) / rt);
        let v = sol.eval_row(t, &xs).unwrap();
        for (x, v) in xs.iter().zip(v) {
            let (px, dpx) = bump((x - xc) / rx);
            acc += v * dpt / rt * px + sol.flux.value(v) * pt * dpx / rx;
        }
    }
    (acc * ht * hx, ht + hx)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn weak_formulation_holds(
        which in 0usize..3,
        u in 0.0f64..1.0,
        dx in -0.5f64..0.5,
        rt in 0.05f64..0.5,
        rx in 0.2f64..1.5,
    ) {
        let sol = paper();
        let c = [curve("left"), curve("merged"), curve("ramp")][which];
        let lo = c.t_start().max(0.4) + rt;
        let hi = c.t_last().min(sol.t_end) - rt;
        let tc = lo + u * (hi - lo).max(0.0);
        let xc = c.position_at(tc) + dx;
        let (r, h) = weak_residual(sol, tc, xc, rt, rx, 200);
        // one O(h) defect per cell row cut by a discontinuity of size <= 3
        let budget = 3.0 * 4.0 * h * (2.0 * rt + 2.0 * rx);
        prop_assert!(r.abs() <= budget, "residual {} budget {}", r, budget);
    }

    #[test]
    fn values_stay_in_initial_range(t in 0.4f64..120.0, x in -20.0f64..100.0) {
        let v = paper().eval_near(t, x).unwrap();
        prop_assert!((-1.5..=1.5).contains(&v));
    }

    #[test]
    fn one_sided_lipschitz_left_of_ramp(t in 0.4f64..120.0) {
        let sol = paper();
        let right = curve("ramp").position_at(t.max(1.0)) - 0.5;
        let xs: Vec<f64> = (0..4000).map(|i| -10.0 + i as f64 * (right + 10.0) / 3999.0).collect();
        let v = sol.eval_row(t, &xs).unwrap();
        let worst = xs
            .windows(2)
            .zip(v.windows(2))
            .map(|(x, v)| (v[1] - v[0]) / (x[1] - x[0]))
            .fold(f64::INFINITY, f64::min);
        prop_assert!(worst >= -1.0 - 1e-6, "slope {} at t = {}", worst, t);
    }
}

#[test]
fn weak_residual_detects_wrong_shock_speed() {
    // same data with the merged shock shifted sideways no longer conserves
    let mut sol = paper().clone();
    for c in sol.shocks.iter_mut().filter(|c| c.name == "merged") {
        for s in &mut c.samples {
            s.z += 0.01 * (s.t - c.origin.0);
        }
    }
    let tc = 40.0;
    let xc = curve("merged").position_at(tc);
    let (good, h) = weak_residual(paper(), tc, xc, 0.5, 1.0, 200);
    let (bad, _) = weak_residual(&sol, tc, xc, 0.5, 1.0, 200);
    assert!(good.abs() < 0.1 * bad.abs(), "good {good} bad {bad} h {h}");
}
