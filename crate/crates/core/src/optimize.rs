//! Small scalar search helpers shared by the conjugate, Hopf-Lax and
//! double-well routines.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
///
/// Returns `(argmax, max)`. Iterates until the bracket is narrower than `tol`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let tol = tol.max(f64::EPSILON * (lo.abs() + hi.abs()).max(1.0));
    for _ in 0..400 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    let fm = f(mid);
    // the probes may beat the midpoint on plateaus
    [(mid, fm), (c, fc), (d, fd)]
        .into_iter()
        .fold((mid, fm), |best, cand| if cand.1 > best.1 { cand } else { best })
}

pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (x, v) = golden_max(|x| -f(x), lo, hi, tol);
    (x, -v)
}

/// Grid scan followed by golden-section refinement around the best node.
pub fn bracketed_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, nodes: usize, tol: f64) -> (f64, f64) {
    let nodes = nodes.max(3);
    let h = (hi - lo) / (nodes - 1) as f64;
    let mut best = (lo, f(lo));
    let mut best_i = 0;
    for i in 1..nodes {
        let x = if i == nodes - 1 { hi } else { lo + i as f64 * h };
        let v = f(x);
        if v > best.1 {
            best = (x, v);
            best_i = i;
        }
    }
    let a = if best_i == 0 { lo } else { lo + (best_i - 1) as f64 * h };
    let b = if best_i + 1 >= nodes {
        hi
    } else {
        lo + (best_i + 1) as f64 * h
    };
    let refined = golden_max(&mut f, a, b, tol);
    if refined.1 >= best.1 {
        refined
    } else {
        best
    }
}

/// Up to two real roots, ascending.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Roots {
    r: [f64; 2],
    n: usize,
}

impl Roots {
    fn none() -> Self {
        Self { r: [0.0; 2], n: 0 }
    }

    fn one(x: f64) -> Self {
        Self { r: [x, 0.0], n: 1 }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.r[..self.n]
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.as_slice().to_vec()
    }
}

impl IntoIterator for Roots {
    type Item = f64;
    type IntoIter = std::iter::Take<std::array::IntoIter<f64, 2>>;

    fn into_iter(self) -> Self::IntoIter {
        self.r.into_iter().take(self.n)
    }
}

/// Real roots of `a x^2 + b x + c = 0`. Degenerate leading coefficients fall
/// back to the linear equation.
pub fn quadratic_roots(a: f64, b: f64, c: f64) -> Roots {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return Roots::none();
    }
    if a.abs() <= 1e-14 * scale {
        if b.abs() <= 1e-14 * scale {
            return Roots::none();
        }
        return Roots::one(-c / b);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        if disc > -1e-14 * b * b {
            return Roots::one(-b / (2.0 * a));
        }
        return Roots::none();
    }
    let sq = disc.sqrt();
    // cancellation-free form
    let q = if b >= 0.0 { -0.5 * (b + sq) } else { -0.5 * (b - sq) };
    if q == 0.0 {
        return Roots::one(0.0);
    }
    let (r1, r2) = (q / a, c / q);
    if r1 == r2 {
        Roots::one(r1)
    } else {
        Roots {
            r: [r1.min(r2), r1.max(r2)],
            n: 2,
        }
    }
}

/// Bisection on a sign change of `f` in `[a, b]`.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, v) = golden_max(|x| -(x - 0.3) * (x - 0.3) + 2.0, -1.0, 1.0, 1e-10);
        // argmax resolution is limited to sqrt(eps) on a flat peak
        assert!((x - 0.3).abs() < 1e-7);
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn bracketed_handles_multimodal() {
        let f = |x: f64| (3.0 * x).sin() - 0.1 * x * x;
        let (x, _) = bracketed_max(f, -4.0, 4.0, 400, 1e-10);
        let mut best = f64::MIN;
        let mut bx = 0.0;
        for i in 0..=800_000 {
            let y = -4.0 + 8.0 * i as f64 / 800_000.0;
            if f(y) > best {
                best = f(y);
                bx = y;
            }
        }
        assert!((x - bx).abs() < 1e-4);
    }

    #[test]
    fn quadratic_roots_cases() {
        assert_eq!(quadratic_roots(1.0, -3.0, 2.0).to_vec(), vec![1.0, 2.0]);
        assert_eq!(quadratic_roots(0.0, 2.0, -1.0).to_vec(), vec![0.5]);
        assert!(quadratic_roots(1.0, 0.0, 1.0).as_slice().is_empty());
        let r = quadratic_roots(1e-3, 1.0, -1e-8).to_vec();
        // small root of a x^2 + x - c is c - a c^2 + ...
        assert!((r[1] - (1e-8 - 1e-19)).abs() < 1e-22);
    }
}
