use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::SpectralField;
use crate::stats::fit_line;

/// Shells whose maximum falls below this fraction of the window maximum are
/// treated as round-off and left out of the fit.
const SHELL_FLOOR: f64 = 1e-14;
/// Minimum number of usable shells for a reliable estimate.
const MIN_SHELLS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticityEstimate {
    /// `max(0, -slope)`.
    pub tau_hat: f64,
    pub slope: f64,
    pub shells_used: usize,
    pub reliable: bool,
    pub window: (usize, usize),
}

/// Shells `[N/8, N/3]`.
pub fn default_fit_window(n: usize) -> (usize, usize) {
    (n / 8, n / 3)
}

/// Minus the slope of `log(max_{⌊|k|⌋ = m} |f̂(k)|)` against `|k|` (taken at
/// each shell's maximizing mode) over shells `m` in `window`.
pub fn analyticity_radius_estimate(
    f: &SpectralField,
    window: Option<(usize, usize)>,
) -> Result<AnalyticityEstimate> {
    let grid = f.grid();
    let (lo, hi) = window.unwrap_or_else(|| default_fit_window(grid.n()));
    if lo > hi || hi as f64 > grid.max_wavenumber_norm() {
        return Err(Error::Domain(format!("invalid shell window [{lo}, {hi}]")));
    }
    let t = grid.modes();
    // (max |f̂|, |k| at the max) per shell.
    let mut shells = vec![(0.0f64, 0.0f64); hi - lo + 1];
    for (c, &kn) in f.coeffs().iter().zip(&t.norm) {
        let m = kn.floor() as usize;
        if kn == 0.0 || m < lo || m > hi {
            continue;
        }
        let a = c.norm();
        let slot = &mut shells[m - lo];
        if a > slot.0 || (a == slot.0 && a > 0.0 && kn < slot.1) {
            *slot = (a, kn);
        }
    }
    let top = shells.iter().map(|s| s.0).fold(0.0, f64::max);
    if top == 0.0 {
        return Err(Error::Estimation(format!(
            "field vanishes on shells [{lo}, {hi}]"
        )));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = shells
        .iter()
        .filter(|s| s.0 > SHELL_FLOOR * top)
        .map(|s| (s.1, s.0.ln()))
        .unzip();
    let used = xs.len();
    let slope = if used >= 2 {
        fit_line(&xs, &ys)?.slope
    } else {
        0.0
    };
    Ok(AnalyticityEstimate {
        tau_hat: (-slope).max(0.0),
        slope,
        shells_used: used,
        reliable: used >= MIN_SHELLS,
        window: (lo, hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::generate::{analytic_decay, single_mode, ModeFilter};
    use crate::spectral::GridSpec;

    #[test]
    fn recovers_exponential_decay() {
        let g = GridSpec::new(2, 64).unwrap();
        let f = analytic_decay(g, 0.8, 1.0, 3, ModeFilter::default()).unwrap();
        let est = analyticity_radius_estimate(&f, None).unwrap();
        assert!(est.reliable);
        assert!((0.72..=0.88).contains(&est.tau_hat), "{}", est.tau_hat);
        let scaled = analyticity_radius_estimate(&f.scaled(10.0), None).unwrap();
        assert!((scaled.tau_hat - est.tau_hat).abs() < 1e-12);
    }

    #[test]
    fn single_mode_is_unreliable() {
        let g = GridSpec::new(2, 64).unwrap();
        let f = single_mode(g, [10, 0, 0], 1.0).unwrap();
        let est = analyticity_radius_estimate(&f, None).unwrap();
        assert!(!est.reliable);
        assert!(est.tau_hat >= 0.0);
    }

    #[test]
    fn vanishing_window_is_error() {
        let g = GridSpec::new(2, 64).unwrap();
        let f = single_mode(g, [2, 0, 0], 1.0).unwrap();
        assert!(matches!(analyticity_radius_estimate(&f, None), Err(Error::Estimation(_))));
        assert!(analyticity_radius_estimate(&f, Some((5, 3))).is_err());
    }
}
