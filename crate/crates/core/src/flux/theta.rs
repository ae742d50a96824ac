use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::{golden_max, golden_min};

/// Shape of the two-species covariance along the anti-diagonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoubleWellReport {
    pub minimizers: (f64, f64),
    pub local_max_at: f64,
    pub barrier_value: f64,
    pub well_value: f64,
}

/// `theta(t, 1 - t)` with `theta(x, y) = x^2 + y^2 + 6 x^2 y^2`.
pub fn theta_slice(t: f64) -> f64 {
    let s = 1.0 - t;
    t * t + s * s + 6.0 * t * t * s * s
}

/// Locates the wells and the barrier of the slice on `[0, 1]` by a grid scan
/// refined with golden sections.
pub fn theta_slice_analysis(grid_points: usize) -> Result<DoubleWellReport> {
    if grid_points < 100 {
        return Err(Error::invalid("theta slice needs at least 100 grid points"));
    }
    let h = 1.0 / (grid_points - 1) as f64;
    let values: Vec<f64> = (0..grid_points).map(|i| theta_slice(i as f64 * h)).collect();
    let mut minima = Vec::new();
    let mut maxima = Vec::new();
    for i in 1..grid_points - 1 {
        let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
        if b <= a && b < c {
            minima.push(i);
        }
        if b >= a && b > c {
            maxima.push(i);
        }
    }
    let refine = |i: usize, max: bool| {
        let (lo, hi) = ((i - 1) as f64 * h, (i + 1) as f64 * h);
        if max {
            golden_max(theta_slice, lo, hi, 1e-12)
        } else {
            golden_min(theta_slice, lo, hi, 1e-12)
        }
    };
    if minima.len() != 2 || maxima.len() != 1 {
        return Err(Error::invalid(format!(
            "expected two wells and one barrier, found {} minima and {} maxima",
            minima.len(),
            maxima.len()
        )));
    }
    let (m1, w1) = refine(minima[0], false);
    let (m2, w2) = refine(minima[1], false);
    let (top, barrier) = refine(maxima[0], true);
    Ok(DoubleWellReport {
        minimizers: (m1, m2),
        local_max_at: top,
        barrier_value: barrier,
        well_value: w1.min(w2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn barrier_is_exact_at_half() {
        assert_eq!(theta_slice(0.5), 0.875);
    }

    #[test]
    fn wells_are_symmetric() {
        let rep = theta_slice_analysis(1001).unwrap();
        assert!((rep.local_max_at - 0.5).abs() < 1e-6);
        assert!((rep.barrier_value - 0.875).abs() < 1e-12);
        assert!((rep.minimizers.0 + rep.minimizers.1 - 1.0).abs() < 1e-6);
        // t(1 - t) = 1/6 at the wells, where the slice equals 5/6
        let exact = 0.5 - (1.0f64 / 12.0).sqrt();
        assert!((rep.minimizers.0 - exact).abs() < 1e-6);
        assert!((rep.well_value - 5.0 / 6.0).abs() < 1e-10);
        assert!(rep.well_value < rep.barrier_value);
    }

    #[test]
    fn too_coarse_grid_is_rejected() {
        assert!(theta_slice_analysis(50).is_err());
    }
}
