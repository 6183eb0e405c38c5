use serde::Serialize;

use super::table::build_symbol_table;
use super::MultiplierSpec;
use crate::error::{Error, Result};
use crate::spectral::GridSpec;

/// Divergence-free tolerance on `|k·M̂| / max(1, |M̂|)`.
pub const DIVERGENCE_FREE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ProbeRow {
    pub nu: f64,
    pub div_max: f64,
    /// `sup_k |k|² |M̂^ν(k)|` over the lattice.
    pub c2_hat: f64,
    /// `sup_k |M̂^ν(k)| / |k|`.
    pub order_one_ratio: f64,
    pub conj_max: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct AssumptionReport {
    pub kind: String,
    pub div_max: f64,
    pub probes: Vec<ProbeRow>,
    /// Sup over probes with `ν ∈ [0, 1]` of `sup_k |M̂|/|k|`.
    pub c0_hat: f64,
    /// Largest adjacent-pair difference quotient among the positive probes.
    pub lipschitz_hat: f64,
    pub kmax_used: usize,
    pub violations: Vec<String>,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn c2_hat(&self, nu: f64) -> Option<f64> {
        self.probes.iter().find(|p| p.nu == nu).map(|p| p.c2_hat)
    }
}

/// Lattice audit of the divergence-free condition, order-two smoothing for
/// ν > 0, the zero mean symbol and the order-one bound, for each probed `ν`.
pub fn verify_assumptions(
    spec: &MultiplierSpec,
    grid: GridSpec,
    nu_probe: &[f64],
) -> Result<AssumptionReport> {
    if nu_probe.is_empty() {
        return Err(Error::Precondition("ν probe list is empty".into()));
    }
    if let Some(bad) = nu_probe.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::Precondition(format!("ν probes must be >= 0, got {bad}")));
    }
    let t = grid.modes();
    let d = grid.dim();
    let mut probes = Vec::with_capacity(nu_probe.len());
    let mut violations = Vec::new();
    let mut c0_hat = 0.0f64;
    for &nu in nu_probe {
        let table = build_symbol_table(&spec.with_nu(nu), grid)?;
        let audit = table.audit();
        for v in audit.violations(DIVERGENCE_FREE_TOL) {
            violations.push(format!("ν = {nu}: {v}"));
        }
        if matches!(spec, MultiplierSpec::Mg { .. }) && audit.vertical_plane_max != 0.0 {
            violations.push(format!(
                "ν = {nu}: MG symbol nonzero on k3 = 0 ({:e})",
                audit.vertical_plane_max
            ));
        }
        let mut c2 = 0.0f64;
        let mut ratio = 0.0f64;
        for (idx, m) in table.values().iter().enumerate() {
            let kn = t.norm[idx];
            if kn == 0.0 {
                continue;
            }
            let mag = m[..d].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            c2 = c2.max(kn * kn * mag);
            ratio = ratio.max(mag / kn);
        }
        if !c2.is_finite() || !ratio.is_finite() {
            violations.push(format!("ν = {nu}: non-finite symbol bounds"));
        }
        if (0.0..=1.0).contains(&nu) {
            c0_hat = c0_hat.max(ratio);
        }
        probes.push(ProbeRow {
            nu,
            div_max: audit.div_max,
            c2_hat: c2,
            order_one_ratio: ratio,
            conj_max: audit.conj_max,
        });
    }

    let mut positive: Vec<f64> = nu_probe.iter().copied().filter(|&v| v > 0.0).collect();
    positive.sort_by(f64::total_cmp);
    positive.dedup();
    let mut lipschitz_hat = 0.0f64;
    if let (Some(&lo), Some(&hi)) = (positive.first(), positive.last()) {
        for w in positive.windows(2) {
            let est = symbol_lipschitz_estimate(spec, grid, w[0], w[1], (lo, hi))?;
            lipschitz_hat = lipschitz_hat.max(est);
        }
    }

    Ok(AssumptionReport {
        kind: spec.kind_name().to_string(),
        div_max: probes.iter().map(|p| p.div_max).fold(0.0, f64::max),
        probes,
        c0_hat,
        lipschitz_hat,
        kmax_used: grid.n() / 2,
        violations,
    })
}

/// `sup_k |k|² max_j |M̂^{ν1}_j(k) - M̂^{ν2}_j(k)| / |ν1 - ν2|` over the grid lattice.
pub fn symbol_lipschitz_estimate(
    spec: &MultiplierSpec,
    grid: GridSpec,
    nu1: f64,
    nu2: f64,
    range: (f64, f64),
) -> Result<f64> {
    let (lo, hi) = range;
    if !(lo > 0.0 && lo <= hi) {
        return Err(Error::Domain(format!("ν range must satisfy 0 < ν_* <= ν^*, got [{lo}, {hi}]")));
    }
    for nu in [nu1, nu2] {
        if !(nu >= lo && nu <= hi) {
            return Err(Error::Domain(format!("ν = {nu} outside [{lo}, {hi}]")));
        }
    }
    if nu1 == nu2 {
        return Err(Error::Domain("ν1 and ν2 must differ".into()));
    }
    let t = grid.modes();
    let d = grid.dim();
    let mut sup = 0.0f64;
    for (idx, &k) in t.k.iter().enumerate() {
        let kn = t.norm[idx];
        if kn == 0.0 {
            continue;
        }
        let a = spec.symbol_at(k, nu1);
        let b = spec.symbol_at(k, nu2);
        let diff = (0..d).map(|j| (a[j] - b[j]).norm()).fold(0.0, f64::max);
        sup = sup.max(kn * kn * diff);
    }
    Ok(sup / (nu1 - nu2).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::CustomSymbol;
    use rustfft::num_complex::Complex64;

    #[test]
    fn mg_audit_passes() {
        let g = GridSpec::new(3, 16).unwrap();
        let r = verify_assumptions(&MultiplierSpec::Mg { nu: 0.0 }, g, &[0.0, 0.5, 1.0]).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
        assert!(r.div_max < 1e-13);
        assert!(r.c0_hat.is_finite() && r.c0_hat > 0.0);
        assert!(r.probes.iter().all(|p| p.c2_hat.is_finite()));
        assert!(r.lipschitz_hat > 0.0 && r.lipschitz_hat.is_finite());
        assert_eq!(r.kmax_used, 8);
    }

    #[test]
    fn sqg_audit_c0_is_one() {
        let g = GridSpec::new(2, 32).unwrap();
        let r = verify_assumptions(&MultiplierSpec::Sqg, g, &[0.0]).unwrap();
        assert!(r.passed());
        assert!((r.c0_hat - 1.0).abs() < 1e-15);
        assert_eq!(r.lipschitz_hat, 0.0);
    }

    #[test]
    fn audit_flags_bad_custom_symbols() {
        let g = GridSpec::new(2, 16).unwrap();
        let compressible = CustomSymbol::new(2, "grad", |k| {
            [
                Complex64::new(0.0, k[0] as f64),
                Complex64::new(0.0, k[1] as f64),
                Complex64::new(0.0, 0.0),
            ]
        });
        let r = verify_assumptions(&MultiplierSpec::Custom(compressible), g, &[0.0]).unwrap();
        assert!(!r.passed());
        assert!(verify_assumptions(&MultiplierSpec::Sqg, g, &[]).is_err());
        assert!(verify_assumptions(&MultiplierSpec::Sqg, g, &[-0.1]).is_err());
    }

    #[test]
    fn lipschitz_difference_quotient_finite() {
        let g = GridSpec::new(3, 16).unwrap();
        let mg = MultiplierSpec::Mg { nu: 0.5 };
        let v = symbol_lipschitz_estimate(&mg, g, 0.5, 0.5 + 1e-6, (0.4, 1.0)).unwrap();
        assert!(v.is_finite() && v > 0.0);
        assert!(symbol_lipschitz_estimate(&mg, g, 0.5, 0.5, (0.4, 1.0)).is_err());
        assert!(symbol_lipschitz_estimate(&mg, g, 0.3, 0.5, (0.4, 1.0)).is_err());
        assert!(symbol_lipschitz_estimate(&mg, g, 0.5, 0.6, (0.0, 1.0)).is_err());
    }

    #[test]
    fn lipschitz_stable_under_refinement() {
        let mg = MultiplierSpec::Mg { nu: 0.5 };
        let coarse =
            symbol_lipschitz_estimate(&mg, GridSpec::new(3, 32).unwrap(), 0.5, 0.6, (0.4, 1.0))
                .unwrap();
        let fine =
            symbol_lipschitz_estimate(&mg, GridSpec::new(3, 64).unwrap(), 0.5, 0.6, (0.4, 1.0))
                .unwrap();
        let ratio = fine / coarse;
        assert!((0.8..=1.2).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn nu_independent_symbol_has_zero_lipschitz() {
        let g = GridSpec::new(2, 16).unwrap();
        let v = symbol_lipschitz_estimate(&MultiplierSpec::Sqg, g, 0.5, 0.7, (0.4, 1.0)).unwrap();
        assert_eq!(v, 0.0);
    }
}
