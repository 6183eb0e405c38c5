use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::{self, hermitianize, same_grid, SpectralField, VectorField};
use super::grid::GridSpec;
use crate::error::{Error, Result};

/// Relative tolerance on `max|k·û| / max(|k||û|)` accepted by [`advect`].
pub const DIVERGENCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DealiasRule {
    /// Keep only modes with `3|k_j| < n` on every axis, for inputs and products.
    #[default]
    TwoThirds,
    /// No truncation beyond the Nyquist row.
    None,
}

impl DealiasRule {
    pub(crate) fn mask(self, grid: GridSpec) -> Vec<bool> {
        let t = grid.modes();
        match self {
            DealiasRule::TwoThirds => t.in_band.clone(),
            DealiasRule::None => t.retained.clone(),
        }
    }
}

/// Coefficientwise multiplication by `|k|^s` (mean mode stays zero).
pub fn lambda_power(f: &SpectralField, s: f64) -> SpectralField {
    let grid = f.grid();
    let t = grid.modes();
    let coeffs = f
        .coeffs()
        .iter()
        .zip(&t.norm)
        .map(|(c, &kn)| if kn == 0.0 { *c * 0.0 } else { c * kn.powf(s) })
        .collect();
    SpectralField::from_raw(grid, coeffs)
}

/// `Λ^γ f` for `γ ∈ (0, 2]`.
pub fn fractional_laplacian(f: &SpectralField, gamma: f64) -> Result<SpectralField> {
    if !(gamma > 0.0 && gamma <= 2.0) {
        return Err(Error::Domain(format!("gamma must lie in (0, 2], got {gamma}")));
    }
    let out = lambda_power(f, gamma);
    out.debug_check();
    Ok(out)
}

pub fn gradient(f: &SpectralField) -> VectorField {
    let grid = f.grid();
    let t = grid.modes();
    let comps = (0..grid.dim())
        .map(|j| {
            let coeffs = f
                .coeffs()
                .iter()
                .zip(&t.k)
                .map(|(c, k)| c * Complex64::new(0.0, k[j] as f64))
                .collect();
            SpectralField::from_raw(grid, coeffs)
        })
        .collect();
    VectorField::new(comps).expect("gradient components share the grid")
}

/// Largest `|k·û(k)|` and the scale `max |k||û(k)|` it should be compared with.
pub fn divergence_max(u: &VectorField) -> (f64, f64) {
    let grid = u.grid();
    let t = grid.modes();
    let mut div = 0.0f64;
    let mut scale = 0.0f64;
    for idx in 0..grid.len() {
        let mut d = Complex64::new(0.0, 0.0);
        let mut mag = 0.0;
        for (j, comp) in u.components().iter().enumerate() {
            let c = comp.coeffs()[idx];
            d += c * t.k[idx][j] as f64;
            mag += c.norm_sqr();
        }
        div = div.max(d.norm());
        scale = scale.max(mag.sqrt() * t.norm[idx]);
    }
    (div, scale)
}

/// Dealiased pseudospectral `u·∇θ`, evaluated in divergence form `∇·(uθ)`.
pub fn advect(u: &VectorField, theta: &SpectralField, rule: DealiasRule) -> Result<SpectralField> {
    let grid = theta.grid();
    same_grid(u.grid(), grid)?;
    let (div, scale) = divergence_max(u);
    if div > DIVERGENCE_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::ContractViolation(format!(
            "drift is not divergence-free: max|k·û| = {div:e} against scale {scale:e}"
        )));
    }
    let mask = rule.mask(grid);
    let theta_p = band_physical(grid, theta.coeffs(), &mask);
    let products: Vec<Vec<f64>> = u
        .components()
        .iter()
        .map(|c| {
            let up = band_physical(grid, c.coeffs(), &mask);
            up.iter().zip(&theta_p).map(|(a, b)| a * b).collect()
        })
        .collect();
    let out = SpectralField::from_raw(grid, divergence_of_products(grid, &products, &mask));
    out.debug_check();
    Ok(out)
}

/// Physical samples of the masked coefficients.
pub(crate) fn band_physical(grid: GridSpec, coeffs: &[Complex64], mask: &[bool]) -> Vec<f64> {
    let masked: Vec<Complex64> = coeffs
        .iter()
        .zip(mask)
        .map(|(c, &keep)| if keep { *c } else { field::zero() })
        .collect();
    field::physical(grid, &masked)
}

/// `Σ_j ∂_j P(products_j)` as Hermitian, mean-zero coefficients.
pub(crate) fn divergence_of_products(
    grid: GridSpec,
    products: &[Vec<f64>],
    mask: &[bool],
) -> Vec<Complex64> {
    let t = grid.modes();
    let mut out = vec![field::zero(); grid.len()];
    for (j, p) in products.iter().enumerate() {
        let hat = field::spectral(grid, p);
        for idx in 0..grid.len() {
            if mask[idx] {
                out[idx] += hat[idx] * Complex64::new(0.0, t.k[idx][j] as f64);
            }
        }
    }
    hermitianize(grid, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::norms::{l2_inner, l2_norm};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn fractional_laplacian_single_modes() {
        let g = GridSpec::new(2, 16).unwrap();
        let f = SpectralField::from_modes(g, &[([1, 0, 0], c(0.3, 0.1))]).unwrap();
        let out = fractional_laplacian(&f, 1.0).unwrap();
        assert!((out.coeff([1, 0, 0]) - c(0.3, 0.1)).norm() < 1e-15);

        let f = SpectralField::from_modes(g, &[([2, 0, 0], c(0.5, 0.0))]).unwrap();
        let out = fractional_laplacian(&f, 2.0).unwrap();
        assert!((out.coeff([2, 0, 0]) - c(2.0, 0.0)).norm() < 1e-15);
        assert!((out.coeff([-2, 0, 0]) - c(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn fractional_laplacian_domain() {
        let f = SpectralField::zeros(GridSpec::new(2, 8).unwrap());
        assert!(fractional_laplacian(&f, 0.0).is_err());
        assert!(fractional_laplacian(&f, 2.5).is_err());
        assert!(fractional_laplacian(&f, 2.0).is_ok());
    }

    #[test]
    fn gradient_of_cosine() {
        let g = GridSpec::new(2, 16).unwrap();
        let f = SpectralField::from_modes(g, &[([1, 0, 0], c(0.5, 0.0))]).unwrap();
        let grad = gradient(&f);
        let p0 = grad.component(0).to_physical().unwrap();
        let p1 = grad.component(1).to_physical().unwrap();
        for i0 in 0..16 {
            let x1 = 2.0 * std::f64::consts::PI * i0 as f64 / 16.0;
            for i1 in 0..16 {
                assert!((p0[i0 * 16 + i1] + x1.sin()).abs() < 1e-14);
                assert!(p1[i0 * 16 + i1].abs() < 1e-15);
            }
        }
        let z = gradient(&SpectralField::zeros(g));
        assert!(z.components().iter().all(|c| c.is_zero()));
    }

    /// `u = ∇⊥ψ = (-∂2ψ, ∂1ψ)` with `ψ = cos(x1 + x2)` is `(sin s, -sin s)`,
    /// `s = x1 + x2`; with `θ = cos x1` the triad gives
    /// `u·∇θ = -sin(s) sin(x1) = -½cos(x2) + ½cos(2x1 + x2)`.
    #[test]
    fn advect_exact_triad() {
        let g = GridSpec::new(2, 16).unwrap();
        // û = i(-k2, k1) ψ̂ ; ψ̂(±(1,1)) = 1/2.
        let u1 = SpectralField::from_modes(g, &[([1, 1, 0], c(0.0, -0.5))]).unwrap();
        let u2 = SpectralField::from_modes(g, &[([1, 1, 0], c(0.0, 0.5))]).unwrap();
        let u = VectorField::new(vec![u1, u2]).unwrap();
        let theta = SpectralField::from_modes(g, &[([1, 0, 0], c(0.5, 0.0))]).unwrap();
        let out = advect(&u, &theta, DealiasRule::TwoThirds).unwrap();
        let expected = SpectralField::from_modes(
            g,
            &[([0, 1, 0], c(-0.25, 0.0)), ([2, 1, 0], c(0.25, 0.0))],
        )
        .unwrap();
        let err = out.sub(&expected).unwrap();
        assert!(err.max_abs_coeff() < 1e-15, "{:?}", err.max_abs_coeff());
    }

    #[test]
    fn advect_zero_drift() {
        let g = GridSpec::new(2, 16).unwrap();
        let theta = SpectralField::from_modes(g, &[([1, 2, 0], c(0.5, 0.2))]).unwrap();
        let out = advect(&VectorField::zeros(g), &theta, DealiasRule::TwoThirds).unwrap();
        assert!(out.is_zero());
    }

    #[test]
    fn advect_rejects_compressible_drift() {
        let g = GridSpec::new(2, 16).unwrap();
        let u1 = SpectralField::from_modes(g, &[([1, 0, 0], c(0.5, 0.0))]).unwrap();
        let u = VectorField::new(vec![u1, SpectralField::zeros(g)]).unwrap();
        let theta = SpectralField::from_modes(g, &[([1, 2, 0], c(0.5, 0.2))]).unwrap();
        assert!(matches!(
            advect(&u, &theta, DealiasRule::TwoThirds),
            Err(Error::ContractViolation(_))
        ));
        let other = SpectralField::zeros(GridSpec::new(2, 8).unwrap());
        assert!(matches!(
            advect(&VectorField::zeros(g), &other, DealiasRule::TwoThirds),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn advect_neutral_on_high_modes_with_dealiasing() {
        // Modes near the cutoff alias back without truncation.
        let g = GridSpec::new(2, 16).unwrap();
        let u1 = SpectralField::from_modes(g, &[([5, 5, 0], c(0.0, -0.5))]).unwrap();
        let u2 = SpectralField::from_modes(g, &[([5, 5, 0], c(0.0, 0.5))]).unwrap();
        let u = VectorField::new(vec![u1, u2]).unwrap();
        let theta =
            SpectralField::from_modes(g, &[([5, 0, 0], c(0.5, 0.0)), ([0, 4, 0], c(0.1, 0.3))])
                .unwrap();
        let out = advect(&u, &theta, DealiasRule::TwoThirds).unwrap();
        let e = l2_inner(&out, &theta).unwrap();
        assert!(e.abs() < 1e-14 * (1.0 + l2_norm(&theta)));
    }
}
