use rustfft::num_complex::Complex64;

use super::fft::{self, Direction};
use super::grid::{GridSpec, Wavevector};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Relative tolerance for Hermitian pairing checks on incoming coefficients.
const HERMITIAN_TOL: f64 = 1e-12;

/// Real, mean-zero scalar on the torus stored as Fourier coefficients with the
/// convention `θ(x) = Σ_k θ̂(k) e^{ik·x}`.
///
/// Coefficients live on the full `n^d` FFT lattice. The mean mode and every
/// Nyquist mode are exactly zero; `θ̂(-k) = conj(θ̂(k))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![ZERO; grid.len()],
        }
    }

    /// Validates finiteness, mean-zero, Nyquist-free and Hermitian pairing.
    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::Shape(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        let f = Self { grid, coeffs };
        f.check_invariants()?;
        Ok(f)
    }

    /// Builds a field from `(k, c)` pairs, adding `c` at `k` and `conj(c)` at `-k`.
    pub fn from_modes(grid: GridSpec, modes: &[(Wavevector, Complex64)]) -> Result<Self> {
        let mut coeffs = vec![ZERO; grid.len()];
        let table = grid.modes();
        for &(k, c) in modes {
            let idx = grid
                .index_of(k)
                .ok_or_else(|| Error::InvalidField(format!("wavevector {k:?} is off the lattice")))?;
            if k == [0, 0, 0] {
                return Err(Error::InvalidField("mean mode must be zero".into()));
            }
            if !table.retained[idx] {
                return Err(Error::InvalidField(format!("wavevector {k:?} is a Nyquist mode")));
            }
            coeffs[idx] += c;
            coeffs[table.neg[idx]] += c.conj();
        }
        Self::from_coeffs(grid, coeffs)
    }

    /// Projects real samples onto the retained mean-zero, Nyquist-free space.
    pub fn from_physical(grid: GridSpec, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::Shape(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidField("non-finite physical sample".into()));
        }
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft::transform(&mut buf, grid.dim(), grid.n(), Direction::Forward);
        let scale = 1.0 / grid.len() as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        hermitianize(grid, &mut buf);
        Ok(Self { grid, coeffs: buf })
    }

    pub(crate) fn from_raw(grid: GridSpec, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        Self { grid, coeffs }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: Wavevector) -> Complex64 {
        self.grid.index_of(k).map_or(ZERO, |i| self.coeffs[i])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn check_invariants(&self) -> Result<()> {
        let table = self.grid.modes();
        let mut scale = 0.0f64;
        for (idx, c) in self.coeffs.iter().enumerate() {
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::InvalidField(format!(
                    "non-finite coefficient at k = {:?}",
                    table.k[idx]
                )));
            }
            scale = scale.max(c.norm());
        }
        if self.coeffs[0] != ZERO {
            return Err(Error::InvalidField(format!(
                "nonzero mean coefficient {}",
                self.coeffs[0]
            )));
        }
        for (idx, c) in self.coeffs.iter().enumerate() {
            if !table.retained[idx] && *c != ZERO {
                return Err(Error::InvalidField(format!(
                    "nonzero Nyquist coefficient at k = {:?}",
                    table.k[idx]
                )));
            }
            let pair = self.coeffs[table.neg[idx]].conj();
            if (*c - pair).norm() > HERMITIAN_TOL * scale {
                return Err(Error::InvalidField(format!(
                    "Hermitian symmetry broken at k = {:?}",
                    table.k[idx]
                )));
            }
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn debug_check(&self) {
        debug_assert!(
            self.check_invariants().is_ok(),
            "field invariant broken: {:?}",
            self.check_invariants()
        );
    }

    /// Samples on the native `n^d` lattice at `x_j = 2π i_j / n`.
    pub fn to_physical(&self) -> Result<Vec<f64>> {
        if self.coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidField("non-finite coefficient".into()));
        }
        Ok(physical(self.grid, &self.coeffs))
    }

    /// Samples on a `(factor·n)^d` lattice by zero padding.
    pub fn to_physical_oversampled(&self, factor: usize) -> Vec<f64> {
        let fine = GridSpec::new(self.grid.dim(), self.grid.n() * factor)
            .expect("oversampled grid is valid");
        let mut buf = vec![ZERO; fine.len()];
        let table = self.grid.modes();
        for (idx, c) in self.coeffs.iter().enumerate() {
            if *c != ZERO {
                let j = fine.index_of(table.k[idx]).expect("coarse mode fits on fine lattice");
                buf[j] = *c;
            }
        }
        physical(fine, &buf)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * alpha).collect(),
        }
    }

    /// `a·self + b·other`.
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        same_grid(self.grid, other.grid)?;
        Ok(Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| x * a + y * b)
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.lin_comb(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.lin_comb(1.0, other, -1.0)
    }

    /// Zeroes every mode outside the 2/3-rule band.
    pub fn dealiased(&self) -> Self {
        let table = self.grid.modes();
        Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&table.in_band)
                .map(|(c, &keep)| if keep { *c } else { ZERO })
                .collect(),
        }
    }

    /// True when every coefficient on the plane `k_3 = 0` vanishes (3D only).
    pub fn has_zero_vertical_mean(&self) -> bool {
        if self.grid.dim() != 3 {
            return true;
        }
        let table = self.grid.modes();
        self.coeffs
            .iter()
            .zip(&table.k)
            .all(|(c, k)| k[2] != 0 || *c == ZERO)
    }

    /// Removes the `k_3 = 0` plane.
    pub fn without_vertical_mean(&self) -> Self {
        if self.grid.dim() != 3 {
            return self.clone();
        }
        let table = self.grid.modes();
        Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&table.k)
                .map(|(c, k)| if k[2] == 0 { ZERO } else { *c })
                .collect(),
        }
    }

    /// Bytes of the coefficient array in little-endian `(re, im)` order; used for
    /// input hashing.
    pub fn coefficient_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.coeffs.len() * 16);
        for c in &self.coeffs {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
        out
    }
}

/// Vector field made of `d` scalar components on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: Vec<SpectralField>,
}

impl VectorField {
    pub fn new(components: Vec<SpectralField>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::Shape("vector field needs at least one component".into()))?
            .grid();
        if components.len() != first.dim() {
            return Err(Error::Shape(format!(
                "expected {} components, got {}",
                first.dim(),
                components.len()
            )));
        }
        for c in &components {
            same_grid(first, c.grid())?;
        }
        Ok(Self { components })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            components: vec![SpectralField::zeros(grid); grid.dim()],
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.components[0].grid()
    }

    pub fn components(&self) -> &[SpectralField] {
        &self.components
    }

    pub fn component(&self, j: usize) -> &SpectralField {
        &self.components[j]
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            components: self.components.iter().map(|c| c.scaled(alpha)).collect(),
        }
    }
}

pub(crate) fn same_grid(a: GridSpec, b: GridSpec) -> Result<()> {
    if a != b {
        return Err(Error::Shape(format!("grid mismatch: {a:?} vs {b:?}")));
    }
    Ok(())
}

pub(crate) fn physical(grid: GridSpec, coeffs: &[Complex64]) -> Vec<f64> {
    let mut buf = coeffs.to_vec();
    fft::transform(&mut buf, grid.dim(), grid.n(), Direction::Inverse);
    buf.into_iter().map(|c| c.re).collect()
}

/// Forward transform of real samples, normalized to the coefficient convention.
pub(crate) fn spectral(grid: GridSpec, samples: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::transform(&mut buf, grid.dim(), grid.n(), Direction::Forward);
    let scale = 1.0 / grid.len() as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

/// Enforces exact Hermitian pairing and zeroes the mean and Nyquist modes.
pub(crate) fn hermitianize(grid: GridSpec, coeffs: &mut [Complex64]) {
    let table = grid.modes();
    for idx in 0..coeffs.len() {
        if !table.retained[idx] {
            coeffs[idx] = ZERO;
            continue;
        }
        let nk = table.neg[idx];
        if idx < nk {
            let avg = (coeffs[idx] + coeffs[nk].conj()) * 0.5;
            coeffs[idx] = avg;
            coeffs[nk] = avg.conj();
        }
    }
    coeffs[0] = ZERO;
}

pub(crate) fn zero() -> Complex64 {
    ZERO
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g2(n: usize) -> GridSpec {
        GridSpec::new(2, n).unwrap()
    }

    #[test]
    fn single_mode_inverts_to_cosine() {
        let g = g2(16);
        let f = SpectralField::from_modes(g, &[([1, 0, 0], Complex64::new(0.5, 0.0))]).unwrap();
        let p = f.to_physical().unwrap();
        for i0 in 0..16 {
            for i1 in 0..16 {
                let x1 = 2.0 * std::f64::consts::PI * i0 as f64 / 16.0;
                assert!((p[i0 * 16 + i1] - x1.cos()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_field_inverts_to_zero() {
        let p = SpectralField::zeros(g2(8)).to_physical().unwrap();
        assert!(p.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_broken_invariants() {
        let g = g2(8);
        let mut c = vec![ZERO; g.len()];
        c[0] = Complex64::new(1.0, 0.0);
        assert!(SpectralField::from_coeffs(g, c).is_err());

        let mut c = vec![ZERO; g.len()];
        c[g.index_of([1, 0, 0]).unwrap()] = Complex64::new(1.0, 0.0);
        assert!(SpectralField::from_coeffs(g, c).is_err(), "unpaired mode");

        let mut c = vec![ZERO; g.len()];
        c[g.index_of([4, 0, 0]).unwrap()] = Complex64::new(1.0, 0.0);
        assert!(SpectralField::from_coeffs(g, c).is_err(), "Nyquist");

        let mut c = vec![ZERO; g.len()];
        c[g.index_of([1, 1, 0]).unwrap()] = Complex64::new(f64::NAN, 0.0);
        assert!(SpectralField::from_coeffs(g, c).is_err());

        assert!(SpectralField::from_modes(g, &[([0, 0, 0], Complex64::new(1.0, 0.0))]).is_err());
    }

    #[test]
    fn non_finite_coefficients_refuse_to_invert() {
        let g = g2(8);
        let mut c = vec![ZERO; g.len()];
        c[g.index_of([1, 0, 0]).unwrap()] = Complex64::new(f64::INFINITY, 0.0);
        let f = SpectralField::from_raw(g, c);
        assert!(matches!(f.to_physical(), Err(Error::InvalidField(_))));
    }

    #[test]
    fn vertical_mean_projection() {
        let g = GridSpec::new(3, 8).unwrap();
        let f = SpectralField::from_modes(
            g,
            &[
                ([1, 0, 0], Complex64::new(1.0, 0.0)),
                ([1, 0, 1], Complex64::new(0.0, 1.0)),
            ],
        )
        .unwrap();
        assert!(!f.has_zero_vertical_mean());
        let p = f.without_vertical_mean();
        assert!(p.has_zero_vertical_mean());
        assert_eq!(p.coeff([1, 0, 1]), Complex64::new(0.0, 1.0));
    }
}
