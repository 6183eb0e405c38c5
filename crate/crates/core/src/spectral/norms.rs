//! Norms under the convention `‖f‖²_{L²} = Σ_k |f̂(k)|²`.

use super::field::{same_grid, SpectralField};
use crate::error::{Error, Result};

/// Largest admissible Gevrey exponent `2τ|k|^{1/s}` before `exp` overflows.
pub const GEVREY_MAX_EXPONENT: f64 = 700.0;

pub fn l2_norm(f: &SpectralField) -> f64 {
    f.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Homogeneous spectral Sobolev norm `(Σ |k|^{2s} |f̂|²)^{1/2}`.
pub fn sobolev_norm(f: &SpectralField, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::Domain(format!("Sobolev index must be >= 0, got {s}")));
    }
    if s == 0.0 {
        return Ok(l2_norm(f));
    }
    let t = f.grid().modes();
    Ok(f.coeffs()
        .iter()
        .zip(&t.norm)
        .filter(|(_, &kn)| kn > 0.0)
        .map(|(c, &kn)| kn.powf(2.0 * s) * c.norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// `‖Λ^r e^{τΛ^{1/s}} f‖_{L²}`.
pub fn gevrey_norm(f: &SpectralField, r: f64, tau: f64, s: f64) -> Result<f64> {
    if !(r >= 0.0) || !(tau >= 0.0) || !(s >= 1.0) {
        return Err(Error::Domain(format!(
            "Gevrey parameters need r >= 0, tau >= 0, s >= 1; got r={r}, tau={tau}, s={s}"
        )));
    }
    if tau == 0.0 {
        return sobolev_norm(f, r);
    }
    let grid = f.grid();
    let kmax = grid.max_wavenumber_norm();
    let top = 2.0 * tau * kmax.powf(1.0 / s);
    if top > GEVREY_MAX_EXPONENT {
        return Err(Error::GevreyOverflow {
            shell: kmax.floor() as usize,
            exponent: top,
        });
    }
    let t = grid.modes();
    Ok(f.coeffs()
        .iter()
        .zip(&t.norm)
        .filter(|(_, &kn)| kn > 0.0)
        .map(|(c, &kn)| {
            let log_w = 2.0 * r * kn.ln() + 2.0 * tau * kn.powf(1.0 / s);
            log_w.exp() * c.norm_sqr()
        })
        .sum::<f64>()
        .sqrt())
}

/// Max of `|f|` over a 2x oversampled lattice.
pub fn linf_norm(f: &SpectralField) -> f64 {
    if f.is_zero() {
        return 0.0;
    }
    f.to_physical_oversampled(2)
        .into_iter()
        .fold(0.0, |m, v| m.max(v.abs()))
}

/// Real `L²` pairing `Σ f̂ conj(ĝ)`.
pub fn l2_inner(f: &SpectralField, g: &SpectralField) -> Result<f64> {
    same_grid(f.grid(), g.grid())?;
    Ok(f.coeffs()
        .iter()
        .zip(g.coeffs())
        .map(|(a, b)| a.re * b.re + a.im * b.im)
        .sum())
}

/// Homogeneous `H¹` pairing `Σ |k|² f̂ conj(ĝ)`.
pub fn h1_inner(f: &SpectralField, g: &SpectralField) -> Result<f64> {
    same_grid(f.grid(), g.grid())?;
    let t = f.grid().modes();
    Ok(f.coeffs()
        .iter()
        .zip(g.coeffs())
        .zip(&t.norm)
        .map(|((a, b), &kn)| kn * kn * (a.re * b.re + a.im * b.im))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridSpec;
    use rustfft::num_complex::Complex64;

    fn cos_mode(g: GridSpec, k: [i64; 3], a: f64) -> SpectralField {
        SpectralField::from_modes(g, &[(k, Complex64::new(a / 2.0, 0.0))]).unwrap()
    }

    #[test]
    fn sobolev_single_mode() {
        let g = GridSpec::new(2, 16).unwrap();
        let f = cos_mode(g, [2, 0, 0], 1.0);
        let v = sobolev_norm(&f, 2.0).unwrap();
        assert!((v - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        assert!((sobolev_norm(&f, 0.0).unwrap() - l2_norm(&f)).abs() == 0.0);
        assert!(sobolev_norm(&f, -1.0).is_err());
    }

    #[test]
    fn gevrey_closed_form() {
        let g = GridSpec::new(2, 16).unwrap();
        let f = cos_mode(g, [1, 0, 0], 1.0);
        let v = gevrey_norm(&f, 0.0, 0.5, 1.0).unwrap();
        assert!((v - (std::f64::consts::E / 2.0).sqrt()).abs() < 1e-14);
        assert!((v - 1.16582).abs() < 1e-5);
        assert_eq!(
            gevrey_norm(&f, 1.5, 0.0, 1.0).unwrap(),
            sobolev_norm(&f, 1.5).unwrap()
        );
    }

    #[test]
    fn gevrey_overflow_names_the_shell() {
        let g = GridSpec::new(2, 64).unwrap();
        let f = cos_mode(g, [1, 0, 0], 1.0);
        match gevrey_norm(&f, 0.0, 10.0, 1.0) {
            Err(Error::GevreyOverflow { shell, .. }) => assert_eq!(shell, 43),
            other => panic!("expected overflow, got {other:?}"),
        }
        assert!(gevrey_norm(&f, 0.0, 7.5, 1.0).is_ok());
        assert!(gevrey_norm(&f, 0.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn linf_of_cosines() {
        let g = GridSpec::new(2, 16).unwrap();
        assert!((linf_norm(&cos_mode(g, [1, 0, 0], 1.0)) - 1.0).abs() < 1e-14);
        assert_eq!(linf_norm(&SpectralField::zeros(g)), 0.0);
        let f = cos_mode(g, [1, 0, 0], 0.7)
            .add(&cos_mode(g, [0, 1, 0], 0.4))
            .unwrap();
        assert!((linf_norm(&f) - 1.1).abs() < 1e-14);
    }
}
