use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{l2_norm, sobolev_norm, SpectralField};
use crate::stats::fit_line;

/// Default `c0`: the Poincaré constant for mean-zero fields on the torus.
pub const DEFAULT_C0: f64 = 1.0;
/// Relative tolerance on the bound `‖θ0‖_∞ + ‖S‖_∞`.
pub const MAX_PRINCIPLE_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxPrincipleReport {
    /// `max_t ‖θ(t)‖_∞ - (‖θ0‖_∞ + ‖S‖_∞)`.
    pub max_excess: f64,
    pub bound: f64,
    pub violated: bool,
    /// `max_t ‖θ(t)‖_∞ - (‖θ0‖_∞ e^{-c0 κ t} + ‖S‖_∞/(c0 κ))` for the supplied `c0`.
    pub decay_excess: Option<f64>,
    /// Mean of `‖θ‖_∞` over the last tenth of the series.
    pub plateau: f64,
    /// `‖S‖_∞ / (κ · plateau)`.
    pub c0_fit: Option<f64>,
}

/// `linf` holds `(t, ‖θ(t)‖_∞)` pairs in time order.
pub fn max_principle_check(
    linf: &[(f64, f64)],
    theta0_inf: f64,
    s_inf: f64,
    kappa: f64,
    c0_hat: f64,
) -> Result<MaxPrincipleReport> {
    if linf.is_empty() {
        return Err(Error::Precondition("empty L∞ series".into()));
    }
    if !(kappa >= 0.0) {
        return Err(Error::Domain(format!("kappa must be >= 0, got {kappa}")));
    }
    let bound = theta0_inf + s_inf;
    let max_excess = linf.iter().map(|&(_, v)| v - bound).fold(f64::NEG_INFINITY, f64::max);
    let violated = max_excess > MAX_PRINCIPLE_REL_TOL * bound.max(f64::MIN_POSITIVE);
    let decay_excess = (kappa > 0.0 && c0_hat > 0.0).then(|| {
        linf.iter()
            .map(|&(t, v)| v - (theta0_inf * (-c0_hat * kappa * t).exp() + s_inf / (c0_hat * kappa)))
            .fold(f64::NEG_INFINITY, f64::max)
    });
    let tail = (linf.len() / 10).max(1);
    let plateau = linf[linf.len() - tail..].iter().map(|&(_, v)| v).sum::<f64>() / tail as f64;
    let c0_fit = (kappa > 0.0 && s_inf > 0.0 && plateau > 0.0).then(|| s_inf / (kappa * plateau));
    Ok(MaxPrincipleReport {
        max_excess,
        bound,
        violated,
        decay_excess,
        plateau,
        c0_fit,
    })
}

/// First recorded time after which `‖θ‖_∞` stays within `2‖S‖_∞/(c0 κ)`.
/// With `S = 0` the radius is the floor `1e-12 · ‖θ(0)‖_∞`.
pub fn absorbing_entry_time(
    linf: &[(f64, f64)],
    s_inf: f64,
    kappa: f64,
    c0_hat: f64,
) -> Result<Option<f64>> {
    if !(kappa > 0.0) || !(c0_hat > 0.0) {
        return Err(Error::Precondition(format!(
            "absorbing set needs kappa > 0 and c0 > 0; got {kappa}, {c0_hat}"
        )));
    }
    let Some(&(_, first)) = linf.first() else {
        return Ok(None);
    };
    let radius = if s_inf > 0.0 {
        2.0 * s_inf / (c0_hat * kappa)
    } else {
        1e-12 * first
    };
    let mut entry = None;
    for &(t, v) in linf.iter().rev() {
        if v <= radius {
            entry = Some(t);
        } else {
            break;
        }
    }
    Ok(entry)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeGiorgiReport {
    /// Slope of `log ‖θ‖_∞` against `log(1/t)` over the early window.
    pub slope: f64,
    /// `(d + 1 - γ)/(2γ)`.
    pub exponent: f64,
    pub margin: f64,
    pub passed: bool,
}

/// Shape check of the `L² → L∞` smoothing rate on `0 < t <= t_max`.
pub fn degiorgi_shape_check(
    linf: &[(f64, f64)],
    dim: usize,
    gamma: f64,
    t_max: f64,
    margin: f64,
) -> Result<DeGiorgiReport> {
    let pts: Vec<(f64, f64)> = linf
        .iter()
        .filter(|&&(t, v)| t > 0.0 && t <= t_max && v > 0.0)
        .map(|&(t, v)| ((1.0 / t).ln(), v.ln()))
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let slope = fit_line(&xs, &ys)?.slope;
    let exponent = (dim as f64 + 1.0 - gamma) / (2.0 * gamma);
    Ok(DeGiorgiReport {
        slope,
        exponent,
        margin,
        passed: slope <= exponent + margin,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmallnessReport {
    /// `‖θ0‖^β ‖θ0‖_{H^α}^{1-β} + ‖θ0‖^β ‖S‖_{H^{α-γ/2}}^{1-β}`.
    pub lhs1: f64,
    /// `‖Λ^α θ0‖² + (2/κ²) ‖S‖²_{H^{α-γ/2}}`.
    pub lhs2: f64,
    pub beta: f64,
}

/// Left-hand sides of the small-data conditions for global Gevrey regularity.
pub fn smallness_condition(
    theta0: &SpectralField,
    forcing: &SpectralField,
    kappa: f64,
    gamma: f64,
    alpha: f64,
) -> Result<SmallnessReport> {
    let d = theta0.grid().dim() as f64;
    let floor = (d + 2.0) / 2.0 + (1.0 - gamma);
    if !(alpha > floor) {
        return Err(Error::Precondition(format!(
            "alpha must exceed (d+2)/2 + (1-γ) = {floor}, got {alpha}"
        )));
    }
    if !(kappa > 0.0) {
        return Err(Error::Precondition(format!("kappa must be > 0, got {kappa}")));
    }
    let beta = 1.0 - floor / alpha;
    let l2 = l2_norm(theta0);
    let h_alpha = sobolev_norm(theta0, alpha)?;
    let s_norm = sobolev_norm(forcing, alpha - gamma / 2.0)?;
    let lhs1 = l2.powf(beta) * h_alpha.powf(1.0 - beta) + l2.powf(beta) * s_norm.powf(1.0 - beta);
    let lhs2 = h_alpha * h_alpha + 2.0 / (kappa * kappa) * s_norm * s_norm;
    Ok(SmallnessReport { lhs1, lhs2, beta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::generate::single_mode;
    use crate::spectral::GridSpec;

    #[test]
    fn smallness_beta_and_homogeneity() {
        let g = GridSpec::new(2, 16).unwrap();
        let theta0 = single_mode(g, [1, 2, 0], 0.3).unwrap();
        let s = single_mode(g, [2, 0, 0], 0.1).unwrap();
        let r = smallness_condition(&theta0, &s, 0.5, 1.0, 3.0).unwrap();
        assert!((r.beta - 1.0 / 3.0).abs() < 1e-15);
        let r2 = smallness_condition(&theta0.scaled(2.0), &SpectralField::zeros(g), 0.5, 1.0, 3.0).unwrap();
        let r1 = smallness_condition(&theta0, &SpectralField::zeros(g), 0.5, 1.0, 3.0).unwrap();
        assert!((r2.lhs1 - 2.0 * r1.lhs1).abs() < 1e-14);
        let z = smallness_condition(&SpectralField::zeros(g), &s, 0.5, 1.0, 3.0).unwrap();
        assert_eq!(z.lhs1, 0.0);
        let hs = sobolev_norm(&s, 2.5).unwrap();
        assert!((z.lhs2 - 2.0 / 0.25 * hs * hs).abs() < 1e-14);
        assert!(smallness_condition(&theta0, &s, 0.5, 1.0, 2.0).is_err());
        assert!(r.lhs1 > 0.0 && r.lhs2 > 0.0);
    }

    #[test]
    fn absorbing_entry() {
        let series = [(0.0, 5.0), (1.0, 3.0), (2.0, 0.5), (3.0, 2.5), (4.0, 0.3), (5.0, 0.2)];
        assert_eq!(absorbing_entry_time(&series, 0.5, 1.0, 1.0).unwrap(), Some(4.0));
        assert_eq!(absorbing_entry_time(&series, 5.0, 1.0, 1.0).unwrap(), Some(0.0));
        assert_eq!(absorbing_entry_time(&series, 0.01, 1.0, 1.0).unwrap(), None);
        assert_eq!(absorbing_entry_time(&[(0.0, 1.0), (1.0, 1e-13)], 0.0, 1.0, 1.0).unwrap(), Some(1.0));
        assert!(absorbing_entry_time(&series, 0.5, 0.0, 1.0).is_err());
    }

    #[test]
    fn max_principle_flags_excess() {
        let ok = [(0.0, 1.0), (1.0, 0.8), (2.0, 0.6)];
        let r = max_principle_check(&ok, 1.0, 0.0, 1.0, 1.0).unwrap();
        assert!(!r.violated);
        assert_eq!(r.max_excess, 0.0);
        let bad = [(0.0, 1.0), (1.0, 1.1)];
        assert!(max_principle_check(&bad, 1.0, 0.05, 1.0, 1.0).unwrap().violated);
        let forced: Vec<(f64, f64)> = (0..100).map(|i| (i as f64, 0.25)).collect();
        let r = max_principle_check(&forced, 0.0, 0.5, 1.0, 1.0).unwrap();
        assert!((r.c0_fit.unwrap() - 2.0).abs() < 1e-15);
        assert!(max_principle_check(&[], 1.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn degiorgi_slope() {
        let series: Vec<(f64, f64)> = (1..20)
            .map(|i| {
                let t = i as f64 * 0.01;
                (t, 3.0 * t.powf(-0.5))
            })
            .collect();
        let r = degiorgi_shape_check(&series, 2, 1.0, 1.0, 0.05).unwrap();
        assert!((r.slope - 0.5).abs() < 1e-12);
        assert!((r.exponent - 1.0).abs() < 1e-15);
        assert!(r.passed);
    }
}
