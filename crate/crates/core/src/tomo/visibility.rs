//! Fringe-visibility fit for polarizer-scan data.
//!
//! Model: `C(θ) = A·(1 + V·cos 2(θ - θ₀)) + B` with `B ≥ 0`. The scan
//! determines only the offset `A + B` and the oscillation amplitude
//! `A·V`, so the fit reports the `B = 0` decomposition, making
//! `V = (max - min)/(max + min)` of the fitted sinusoid.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct VisibilityFit {
    /// Fringe contrast in [0, 1].
    pub v: f64,
    /// Oscillation amplitude `A·V` (counts).
    pub amplitude: f64,
    /// Fringe phase θ₀ in degrees.
    pub phase_deg: f64,
    /// Constant offset `A + B` (counts).
    pub offset: f64,
    /// Root-mean-square fit residual (counts).
    pub residual: f64,
    /// Set when the scan is flat and `V` is meaningless.
    pub degenerate: bool,
}

/// Least-squares fringe fit over `(angle_deg, counts)` points.
///
/// Requires at least 8 points spanning at least 180°.
pub fn fit_visibility(scan: &[(f64, f64)]) -> Result<VisibilityFit> {
    if scan.len() < 8 {
        return Err(Error::invalid(format!(
            "visibility fit needs at least 8 scan points, got {}",
            scan.len()
        )));
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (angle, counts) in scan {
        if !angle.is_finite() || !counts.is_finite() || *counts < 0.0 {
            return Err(Error::invalid("scan points must be finite with nonnegative counts"));
        }
        lo = lo.min(*angle);
        hi = hi.max(*angle);
    }
    if hi - lo < 180.0 - 1e-9 {
        return Err(Error::invalid(format!(
            "scan spans {:.1}°; at least 180° required",
            hi - lo
        )));
    }

    // Linear model C = a0 + a1 cos2θ + a2 sin2θ via normal equations.
    let n = scan.len();
    let mut x = DMatrix::<f64>::zeros(n, 3);
    let mut y = DVector::<f64>::zeros(n);
    for (row, (angle, counts)) in scan.iter().enumerate() {
        let t = 2.0 * angle.to_radians();
        x[(row, 0)] = 1.0;
        x[(row, 1)] = t.cos();
        x[(row, 2)] = t.sin();
        y[row] = *counts;
    }
    let xtx = x.transpose() * &x;
    let xty = x.transpose() * &y;
    let coeffs = xtx
        .lu()
        .solve(&xty)
        .ok_or_else(|| Error::invalid("degenerate scan design matrix"))?;
    let (a0, a1, a2) = (coeffs[0], coeffs[1], coeffs[2]);

    let predicted = &x * &coeffs;
    let residual = ((&y - predicted).norm_squared() / n as f64).sqrt();

    let amplitude = (a1 * a1 + a2 * a2).sqrt();
    let degenerate = amplitude <= 1e-9 * a0.abs().max(1.0);
    let v = if degenerate || a0 <= 0.0 {
        0.0
    } else {
        (amplitude / a0).clamp(0.0, 1.0)
    };
    let phase_deg = 0.5 * a2.atan2(a1).to_degrees();

    Ok(VisibilityFit {
        v,
        amplitude,
        phase_deg,
        offset: a0,
        residual,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn scan_from(f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        (0..=18).map(|i| (10.0 * i as f64, f(10.0 * i as f64))).collect()
    }

    #[test]
    fn noise_free_fringe_has_unit_visibility() {
        let scan = scan_from(|t| 500.0 * (1.0 + (2.0 * t.to_radians()).cos()));
        let fit = fit_visibility(&scan).unwrap();
        assert_abs_diff_eq!(fit.v, 1.0, epsilon = 1e-6);
        assert!(fit.residual < 1e-9);
    }

    #[test]
    fn flat_background_equal_to_amplitude_halves_visibility() {
        // Closed-form oracle: max = 2A + B, min = B with B = A gives
        // (max-min)/(max+min) = 1/2.
        let a = 400.0;
        let scan = scan_from(|t| a * (1.0 + (2.0 * t.to_radians()).cos()) + a);
        let fit = fit_visibility(&scan).unwrap();
        assert_abs_diff_eq!(fit.v, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn degenerate_scan_flags_zero_visibility() {
        let scan = scan_from(|_| 250.0);
        let fit = fit_visibility(&scan).unwrap();
        assert_eq!(fit.v, 0.0);
        assert!(fit.degenerate);
    }

    #[test]
    fn invariant_under_scaling_and_phase_shift() {
        let base = scan_from(|t| 100.0 * (1.0 + 0.7 * (2.0 * (t - 33.0).to_radians()).cos()) + 40.0);
        let fit = fit_visibility(&base).unwrap();
        let scaled: Vec<(f64, f64)> = base.iter().map(|(a, c)| (*a, 7.0 * c)).collect();
        let fit2 = fit_visibility(&scaled).unwrap();
        assert_abs_diff_eq!(fit.v, fit2.v, epsilon = 1e-9);
        let shifted = scan_from(|t| 100.0 * (1.0 + 0.7 * (2.0 * (t - 77.0).to_radians()).cos()) + 40.0);
        let fit3 = fit_visibility(&shifted).unwrap();
        assert_abs_diff_eq!(fit.v, fit3.v, epsilon = 1e-9);
    }

    #[test]
    fn preconditions_enforced() {
        let short: Vec<(f64, f64)> = (0..5).map(|i| (i as f64 * 40.0, 1.0)).collect();
        assert!(fit_visibility(&short).is_err());
        let narrow: Vec<(f64, f64)> = (0..10).map(|i| (i as f64 * 10.0, 1.0)).collect();
        assert!(fit_visibility(&narrow).is_err());
    }
}
