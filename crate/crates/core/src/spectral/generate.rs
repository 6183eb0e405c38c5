//! Seeded generators for initial data and forcing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;

use super::field::SpectralField;
use super::grid::GridSpec;
use super::norms::l2_norm;
use crate::error::{Error, Result};

/// Which modes a generator may populate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ModeFilter {
    /// Skip the plane `k_3 = 0` (required for magnetogeostrophic data).
    pub zero_vertical_mean: bool,
}

fn admissible(grid: GridSpec, idx: usize, filter: ModeFilter) -> bool {
    let t = grid.modes();
    idx < t.neg[idx]
        && t.in_band[idx]
        && !(filter.zero_vertical_mean && grid.dim() == 3 && t.k[idx][2] == 0)
}

/// Gaussian coefficients on the shells `kmin <= |k| <= kmax`, rescaled to the
/// requested `L²` norm.
pub fn random_band(
    grid: GridSpec,
    kmin: f64,
    kmax: f64,
    l2: f64,
    seed: u64,
    filter: ModeFilter,
) -> Result<SpectralField> {
    if !(kmin >= 0.0 && kmax >= kmin) || !(l2 >= 0.0) {
        return Err(Error::Domain(format!(
            "random_band needs 0 <= kmin <= kmax and amplitude >= 0; got {kmin}, {kmax}, {l2}"
        )));
    }
    let t = grid.modes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    for idx in 0..grid.len() {
        if !admissible(grid, idx, filter) {
            continue;
        }
        let kn = t.norm[idx];
        if kn < kmin || kn > kmax {
            continue;
        }
        let c = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        coeffs[idx] = c;
        coeffs[t.neg[idx]] = c.conj();
    }
    let f = SpectralField::from_coeffs(grid, coeffs)?;
    let norm = l2_norm(&f);
    if norm == 0.0 {
        return Err(Error::Domain(format!(
            "random_band shell range [{kmin}, {kmax}] contains no admissible mode"
        )));
    }
    Ok(f.scaled(l2 / norm))
}

/// `f̂(k) = amplitude · e^{-τ0|k|} · e^{iφ_k}` with seeded random phases on the
/// dealiased band.
pub fn analytic_decay(
    grid: GridSpec,
    tau0: f64,
    amplitude: f64,
    seed: u64,
    filter: ModeFilter,
) -> Result<SpectralField> {
    if !(tau0 > 0.0) {
        return Err(Error::Domain(format!("analytic_decay needs tau0 > 0, got {tau0}")));
    }
    let t = grid.modes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    for idx in 0..grid.len() {
        if !admissible(grid, idx, filter) {
            continue;
        }
        let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let c = Complex64::from_polar(amplitude * (-tau0 * t.norm[idx]).exp(), phase);
        coeffs[idx] = c;
        coeffs[t.neg[idx]] = c.conj();
    }
    SpectralField::from_coeffs(grid, coeffs)
}

/// `a·cos(k·x)`.
pub fn single_mode(grid: GridSpec, k: [i64; 3], a: f64) -> Result<SpectralField> {
    SpectralField::from_modes(grid, &[(k, Complex64::new(0.5 * a, 0.0))])
}
