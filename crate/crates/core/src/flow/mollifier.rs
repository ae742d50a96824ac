//! The bump `eta(s) = C exp(1/(s^2 - 1))` on `(-1, 1)` and its primitive.

use std::sync::OnceLock;

use quadrature::double_exponential;

/// Cells of the primitive table on `[-1, 1]`.
const TABLE: usize = 4096;

/// `1 - s^2` below which the bump and its derivatives are flushed to zero.
const EDGE: f64 = 1e-3;

fn raw(s: f64) -> f64 {
    let w = 1.0 - s * s;
    if w <= EDGE {
        0.0
    } else {
        (-1.0 / w).exp()
    }
}

/// Normalization `C` with `int eta = 1`, by double-exponential quadrature.
pub fn mollifier_constant() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| 1.0 / double_exponential::integrate(raw, -1.0, 1.0, 1e-14).integral)
}

struct Primitive {
    h: f64,
    values: Vec<f64>,
}

fn primitive() -> &'static Primitive {
    static P: OnceLock<Primitive> = OnceLock::new();
    P.get_or_init(|| {
        let c = mollifier_constant();
        let h = 2.0 / TABLE as f64;
        let mut values = Vec::with_capacity(TABLE + 1);
        let mut acc = 0.0;
        values.push(0.0);
        for i in 0..TABLE {
            let a = -1.0 + i as f64 * h;
            acc += c * double_exponential::integrate(raw, a, a + h, 1e-17).integral;
            values.push(acc);
        }
        Primitive { h, values }
    })
}

/// Unit-width mollifier; `eps`-scaled versions divide by powers of `eps`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Mollifier;

impl Mollifier {
    pub fn eta(s: f64) -> f64 {
        mollifier_constant() * raw(s)
    }

    pub fn eta_prime(s: f64) -> f64 {
        let w = s * s - 1.0;
        if -w <= EDGE {
            return 0.0;
        }
        Self::eta(s) * (-2.0 * s / (w * w))
    }

    pub fn eta_second(s: f64) -> f64 {
        let w = s * s - 1.0;
        if -w <= EDGE {
            return 0.0;
        }
        let (w2, w3) = (w * w, w * w * w);
        Self::eta(s) * (4.0 * s * s / (w2 * w2) - 2.0 / w2 + 8.0 * s * s / w3)
    }

    /// `int_{-1}^{s} eta`, cubic Hermite on a table with exact slopes.
    pub fn cdf(s: f64) -> f64 {
        if s <= -1.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return 1.0;
        }
        let p = primitive();
        let u = (s + 1.0) / p.h;
        let i = (u.floor() as usize).min(TABLE - 1);
        let a = -1.0 + i as f64 * p.h;
        let r = u - i as f64;
        let (r2, r3) = (r * r, r * r * r);
        (2.0 * r3 - 3.0 * r2 + 1.0) * p.values[i]
            + (r3 - 2.0 * r2 + r) * p.h * Self::eta(a)
            + (-2.0 * r3 + 3.0 * r2) * p.values[i + 1]
            + (r3 - r2) * p.h * Self::eta(a + p.h)
    }
}
