//! Diagonal exponential operators for the dissipation `-κΛ^γ`.

use crate::spectral::GridSpec;

/// `e^{-κ|k|^γ h}` on every lattice mode (1 on the mean mode).
pub fn linear_propagator(grid: GridSpec, kappa: f64, gamma: f64, h: f64) -> Vec<f64> {
    let t = grid.modes();
    t.norm
        .iter()
        .map(|&kn| (-kappa * kn.powf(gamma) * h).exp())
        .collect()
}

/// `φ1(z) = (e^z - 1)/z`.
pub(crate) fn phi1(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        z.exp_m1() / z
    }
}

/// `φ2(z) = (e^z - 1 - z)/z²`.
pub(crate) fn phi2(z: f64) -> f64 {
    if z.abs() < 0.1 {
        // Σ z^n / (n+2)!
        let mut term = 0.5;
        let mut sum = 0.5;
        for n in 1..12 {
            term *= z / (n as f64 + 2.0);
            sum += term;
        }
        sum
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

/// Per-mode coefficients for one step of size `h`.
#[derive(Debug, Clone)]
pub(crate) struct LinearOps {
    pub h: f64,
    pub exp: Vec<f64>,
    pub exp_half: Vec<f64>,
    pub phi1: Vec<f64>,
    pub phi2: Vec<f64>,
}

impl LinearOps {
    pub fn new(grid: GridSpec, kappa: f64, gamma: f64, h: f64) -> Self {
        let t = grid.modes();
        let rates: Vec<f64> = t.norm.iter().map(|&kn| -kappa * kn.powf(gamma)).collect();
        Self {
            h,
            exp: rates.iter().map(|&l| (l * h).exp()).collect(),
            exp_half: rates.iter().map(|&l| (0.5 * l * h).exp()).collect(),
            phi1: rates.iter().map(|&l| phi1(l * h)).collect(),
            phi2: rates.iter().map(|&l| phi2(l * h)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn propagator_values() {
        let g = GridSpec::new(2, 16).unwrap();
        assert!(linear_propagator(g, 0.0, 1.0, 1.0).iter().all(|&f| f == 1.0));
        let f = linear_propagator(g, 0.1, 1.0, 1.0);
        let i1 = g.index_of([1, 0, 0]).unwrap();
        assert!((f[i1] - 0.904837418035960).abs() < 1e-15);
        let f = linear_propagator(g, 0.1, 2.0, 0.3);
        let i2 = g.index_of([0, 2, 0]).unwrap();
        assert!((f[i2] - f[i1].powi(4)).abs() < 1e-15);
        assert!(f.iter().all(|&v| v > 0.0 && v <= 1.0));
    }

    #[test]
    fn phi_functions_match_closed_forms() {
        for z in [-50.0f64, -1.0, -0.2, -0.099, -1e-3, -1e-9, 0.0, 1e-4, 0.05] {
            let p1 = if z == 0.0 { 1.0 } else { z.exp_m1() / z };
            assert!((phi1(z) - p1).abs() < 1e-15 * p1.abs().max(1.0));
            // Reference: φ2 = (φ1 - 1)/z, evaluated with a long series when small.
            let reference = if z.abs() > 0.5 {
                (z.exp() - 1.0 - z) / (z * z)
            } else {
                let mut s = 0.0;
                let mut fact = 2.0;
                for n in 0..30 {
                    if n > 0 {
                        fact *= n as f64 + 2.0;
                    }
                    s += z.powi(n) / fact;
                }
                s
            };
            assert!((phi2(z) - reference).abs() < 1e-14, "z = {z}");
        }
        assert_eq!(phi2(0.0), 0.5);
    }
}
