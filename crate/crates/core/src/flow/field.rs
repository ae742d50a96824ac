//! Mollified potentials and the velocity field `b = -H'(f_eps_x)`.

use std::fmt;
use std::sync::Arc;

use quadrature::double_exponential;

use super::mollifier::{mollifier_constant, Mollifier};
use crate::error::{Error, Result};
use crate::flux::PiecewiseCubicFlux;
use crate::grid::{GridKind, GridSolution};

pub type PotentialFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// The function `f(t, x)` being mollified in `x`.
#[derive(Clone)]
pub enum Potential {
    /// Nodal values, linear in `x` between nodes and in `t` between rows,
    /// extended outside the nodes with the end slopes.
    Grid(GridSolution),
    /// A callable, convolved by quadrature.
    Function(PotentialFn),
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Grid(g) => write!(f, "Grid({} x {})", g.nt(), g.nx()),
            Potential::Function(_) => f.write_str("Function(..)"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MollifiedField {
    pub epsilon: f64,
    pub base: Potential,
    pub flux: PiecewiseCubicFlux,
    /// `C` in `eta = C exp(1/(|x|^2 - 1))`.
    pub normalization: f64,
    /// Spatial Lipschitz constant of the base potential.
    pub lipschitz: f64,
}

/// `x`-derivatives of the mollified potential at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub grad: f64,
    pub hess: f64,
}

pub fn mollify_profile(base: Potential, flux: &PiecewiseCubicFlux, epsilon: f64) -> Result<MollifiedField> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!("epsilon = {epsilon} must be positive")));
    }
    let lipschitz = match &base {
        Potential::Grid(g) => {
            if g.kind != GridKind::Nodal || g.nx() < 2 {
                return Err(Error::invalid("potential grid must be nodal with at least two nodes"));
            }
            g.values
                .iter()
                .flat_map(|r| r.windows(2).map(|w| ((w[1] - w[0]) / g.dx).abs()))
                .fold(0.0, f64::max)
        }
        Potential::Function(_) => f64::NAN,
    };
    Ok(MollifiedField {
        epsilon,
        base,
        flux: flux.clone(),
        normalization: mollifier_constant(),
        lipschitz,
    })
}

impl MollifiedField {
    /// Callable potentials carry no grid to read a Lipschitz constant from.
    pub fn with_lipschitz(mut self, lipschitz: f64) -> Self {
        self.lipschitz = lipschitz;
        self
    }

    /// `f_eps(t, x)`.
    pub fn value(&self, t: f64, x: f64) -> f64 {
        let e = self.epsilon;
        match &self.base {
            Potential::Function(f) => convolve(|s| f(t, x - e * s) * Mollifier::eta(s)),
            Potential::Grid(g) => {
                let (k, w) = row_weights(g, t);
                let at = |k: usize| convolve(|s| grid_value(g, k, x - e * s) * Mollifier::eta(s));
                blend(at(k), w.map(|(k1, w)| (at(k1), w)))
            }
        }
    }

    pub fn jet(&self, t: f64, x: f64) -> Jet {
        let e = self.epsilon;
        match &self.base {
            Potential::Function(f) => Jet {
                grad: convolve(|s| f(t, x - e * s) * Mollifier::eta_prime(s)) / e,
                hess: convolve(|s| f(t, x - e * s) * Mollifier::eta_second(s)) / (e * e),
            },
            Potential::Grid(g) => {
                let (k, w) = row_weights(g, t);
                let a = grid_jet(g, k, x, e);
                match w {
                    None => a,
                    Some((k1, w)) => {
                        let b = grid_jet(g, k1, x, e);
                        Jet {
                            grad: (1.0 - w) * a.grad + w * b.grad,
                            hess: (1.0 - w) * a.hess + w * b.hess,
                        }
                    }
                }
            }
        }
    }

    /// `b_eps = -H'(f_eps_x)`.
    pub fn velocity(&self, t: f64, x: f64) -> f64 {
        -self.flux.deriv(self.jet(t, x).grad)
    }

    /// `(b, d b / dx)` with the derivative taken under the convolution.
    pub fn velocity_and_divergence(&self, t: f64, x: f64) -> (f64, f64) {
        let j = self.jet(t, x);
        (-self.flux.deriv(j.grad), -self.flux.second_deriv(j.grad) * j.hess)
    }

    /// `max |H'|` over `[-Lip f, Lip f]`, the a-priori speed bound.
    pub fn speed_bound(&self) -> f64 {
        let l = self.lipschitz;
        if l.is_finite() {
            self.flux.max_abs_deriv(-l, l)
        } else {
            f64::INFINITY
        }
    }
}

pub fn velocity_field(field: &MollifiedField, t: f64, x: f64) -> f64 {
    field.velocity(t, x)
}

fn convolve<F: Fn(f64) -> f64>(g: F) -> f64 {
    double_exponential::integrate(g, -1.0, 1.0, 1e-12).integral
}

fn blend(a: f64, b: Option<(f64, f64)>) -> f64 {
    match b {
        None => a,
        Some((b, w)) => (1.0 - w) * a + w * b,
    }
}

/// Row `k` at or below `t`, and the next row with its weight.
fn row_weights(g: &GridSolution, t: f64) -> (usize, Option<(usize, f64)>) {
    if g.nt() == 1 || g.dt <= 0.0 {
        return (0, None);
    }
    let s = ((t - g.t_min) / g.dt).clamp(0.0, (g.nt() - 1) as f64);
    let k = (s.floor() as usize).min(g.nt() - 2);
    let w = s - k as f64;
    if w == 0.0 {
        (k, None)
    } else {
        (k, Some((k + 1, w)))
    }
}

fn slope(row: &[f64], dx: f64, j: usize) -> f64 {
    (row[j + 1] - row[j]) / dx
}

fn grid_value(g: &GridSolution, k: usize, x: f64) -> f64 {
    let row = g.row(k);
    let n = row.len();
    let s = (x - g.x_min) / g.dx;
    if s <= 0.0 {
        return row[0] + slope(row, g.dx, 0) * (x - g.x_min);
    }
    if s >= (n - 1) as f64 {
        return row[n - 1] + slope(row, g.dx, n - 2) * (x - g.x(n - 1));
    }
    let j = s.floor() as usize;
    row[j] + (s - j as f64) * (row[j + 1] - row[j])
}

/// Exact convolution of the piecewise-constant slope with the bump: cell `j`
/// contributes `p_j [Phi((x - x_j)/e) - Phi((x - x_{j+1})/e)]`, and the
/// second derivative collects the slope jumps at the nodes.
fn grid_jet(g: &GridSolution, k: usize, x: f64, e: f64) -> Jet {
    let row = g.row(k);
    let n = row.len();
    let (dx, x0) = (g.dx, g.x_min);
    let last = g.x(n - 1);
    let (p_left, p_right) = (slope(row, dx, 0), slope(row, dx, n - 2));
    let mut grad = p_left * (1.0 - Mollifier::cdf((x - x0) / e)) + p_right * Mollifier::cdf((x - last) / e);
    let mut hess = 0.0;
    let lo = (((x - e - x0) / dx).floor().max(0.0) as usize).min(n - 2);
    let hi = (((x + e - x0) / dx).ceil().max(0.0) as usize).min(n - 2);
    let mut phi = Mollifier::cdf((x - g.x(lo)) / e);
    for j in lo..=hi {
        let p = slope(row, dx, j);
        let next = Mollifier::cdf((x - g.x(j + 1)) / e);
        grad += p * (phi - next);
        phi = next;
        if j > 0 {
            hess += (p - slope(row, dx, j - 1)) * Mollifier::eta((x - g.x(j)) / e) / e;
        }
    }
    Jet { grad, hess }
}
