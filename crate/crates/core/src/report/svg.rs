//! Hand-written SVG: polylines and text only, with fixed decimal places so
//! the bytes do not depend on the platform.

use std::fmt::Write;

use crate::front_tracking::{FrontTrackedSolution, ShockCurve, ShockLabel};

const W: f64 = 800.0;
const H: f64 = 520.0;
const PAD: f64 = 50.0;

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * PAD)
    }

    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * PAD)
    }

    fn points(&self, pts: &[(f64, f64)]) -> String {
        let mut s = String::new();
        for (i, &(x, y)) in pts.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{:.2},{:.2}", self.px(x), self.py(y));
        }
        s
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="24" font-size="16" text-anchor="middle">{}</text>"#,
        W / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let (x0, x1, y0, y1) = (f.px(f.x.0), f.px(f.x.1), f.py(f.y.0), f.py(f.y.1));
    let _ = writeln!(
        out,
        r#"<polyline points="{x0:.2},{y1:.2} {x0:.2},{y0:.2} {x1:.2},{y0:.2}" fill="none" stroke="black"/>"#
    );
    for (v, anchor, x, y) in [(f.x.0, "start", x0, y0 + 18.0), (f.x.1, "end", x1, y0 + 18.0)] {
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{y:.2}" font-size="11" text-anchor="{anchor}">{v:.2}</text>"#
        );
    }
    for (v, y) in [(f.y.0, y0), (f.y.1, y1)] {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{v:.2}</text>"#,
            x0 - 4.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        H - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// `Γ_A`, `Γ_B`, `Γ_C` for the labelled curves, the role name otherwise.
pub fn shock_caption(c: &ShockCurve) -> String {
    match c.label {
        ShockLabel::Detected => format!("Γ ({})", c.name),
        l => format!("Γ_{l}"),
    }
}

/// Characteristic lines from `n_chars` evenly spaced feet, each cut where it
/// first meets a live shock, with the shock curves on top.
pub fn characteristics_svg(sol: &FrontTrackedSolution, x_range: (f64, f64), t_max: f64, n_chars: usize) -> String {
    let f = Frame {
        x: x_range,
        y: (0.0, t_max),
    };
    let map = sol.characteristic_map();
    let mut out = String::new();
    header(&mut out, "Characteristics and shock curves");
    axes(&mut out, &f, "x", "t");
    let steps = 400;
    for i in 0..n_chars {
        let x0 = x_range.0 + (x_range.1 - x_range.0) * (i as f64 + 0.5) / n_chars as f64;
        let mut pts = vec![(x0, 0.0)];
        let mut prev: Vec<Option<f64>> = sol.shocks.iter().map(|_| None).collect();
        for k in 1..=steps {
            let t = t_max * k as f64 / steps as f64;
            let x = map.position(t, x0);
            let mut hit = false;
            for (s, p) in sol.shocks.iter().zip(prev.iter_mut()) {
                if !s.is_active(t) {
                    *p = None;
                    continue;
                }
                let side = x - s.position_at(t);
                if let Some(q) = *p {
                    if q * side <= 0.0 {
                        hit = true;
                    }
                } else if k > 1 && side.abs() < (x_range.1 - x_range.0) * 1e-3 {
                    hit = true;
                }
                *p = Some(side);
            }
            if x < x_range.0 || x > x_range.1 {
                break;
            }
            pts.push((x, t));
            if hit {
                break;
            }
        }
        let _ = writeln!(
            out,
            r##"<polyline points="{}" fill="none" stroke="#8aa" stroke-width="0.6"/>"##,
            f.points(&pts)
        );
    }
    for s in &sol.shocks {
        let stride = (s.samples.len() / 600).max(1);
        let pts: Vec<(f64, f64)> = s
            .samples
            .iter()
            .step_by(stride)
            .chain(s.samples.last())
            .filter(|p| p.t <= t_max)
            .map(|p| (p.z.clamp(x_range.0, x_range.1), p.t))
            .collect();
        if pts.is_empty() {
            continue;
        }
        let _ = writeln!(
            out,
            r##"<polyline points="{}" fill="none" stroke="#c22" stroke-width="1.8"/>"##,
            f.points(&pts)
        );
        let (x, t) = pts[pts.len() / 2];
        let _ = writeln!(
            out,
            r##"<text x="{:.2}" y="{:.2}" font-size="13" fill="#c22">{}</text>"##,
            f.px(x) + 5.0,
            f.py(t),
            escape(&shock_caption(s))
        );
    }
    // launch and merge points
    let mut marks: Vec<(&str, f64, f64)> = Vec::new();
    for (label, name) in [(ShockLabel::A, "A"), (ShockLabel::B, "B"), (ShockLabel::C, "C")] {
        if let Some(s) = sol.shock(label) {
            marks.push((name, s.origin.1, s.origin.0));
        }
    }
    for (name, x, t) in marks {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="black"/><text x="{:.2}" y="{:.2}" font-size="13">{name}</text>"#,
            f.px(x),
            f.py(t),
            f.px(x) - 14.0,
            f.py(t) - 4.0
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Line plot of several named series on shared axes.
pub fn line_plot_svg(title: &str, x_label: &str, y_label: &str, series: &[(&str, Vec<(f64, f64)>)]) -> String {
    let (mut x, mut y) = ((f64::INFINITY, f64::NEG_INFINITY), (f64::INFINITY, f64::NEG_INFINITY));
    for (_, pts) in series {
        for &(a, b) in pts.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
            x = (x.0.min(a), x.1.max(a));
            y = (y.0.min(b), y.1.max(b));
        }
    }
    if !x.0.is_finite() {
        x = (0.0, 1.0);
        y = (0.0, 1.0);
    }
    if x.1 <= x.0 {
        x.1 = x.0 + 1.0;
    }
    if y.1 <= y.0 {
        y = (y.0 - 0.5, y.0 + 0.5);
    }
    let f = Frame { x, y };
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &f, x_label, y_label);
    const COLORS: [&str; 4] = ["#1f5fa8", "#c22", "#2a2", "#a6a"];
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<(f64, f64)> = pts
            .iter()
            .copied()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.2"/>"#,
            f.points(&pts)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" fill="{color}">{}</text>"#,
            W - PAD - 120.0,
            PAD + 16.0 * i as f64,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}
