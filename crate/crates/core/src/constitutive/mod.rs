//! Constitutive laws `u = M[θ]` given by Fourier multipliers, with numerical
//! audits of the structural assumptions the solver relies on.

mod audit;
mod table;

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::Wavevector;

pub use audit::{symbol_lipschitz_estimate, verify_assumptions, AssumptionReport, ProbeRow, DIVERGENCE_FREE_TOL};
pub use table::{apply_drift, build_symbol_table, load_custom_symbol, SymbolTable, TableAudit};

/// Complex velocity symbol; 2D laws leave the last entry zero.
pub type SymbolVector = [Complex64; 3];

/// Magnetogeostrophic symbol `M̂^ν(k)`; zero on the plane `k_3 = 0`.
pub fn mg_symbol(k: Wavevector, nu: f64) -> [f64; 3] {
    let [k1, k2, k3] = k.map(|c| c as f64);
    if k[2] == 0 {
        return [0.0; 3];
    }
    let k2n = k1 * k1 + k2 * k2 + k3 * k3;
    let a = k2 * k2 + nu * k2n * k2n;
    let d = k2n * k3 * k3 + a * a;
    [
        (k2 * k3 * k2n - k1 * k3 * a) / d,
        (-k1 * k3 * k2n - k2 * k3 * a) / d,
        ((k1 * k1 + k2 * k2) * a) / d,
    ]
}

/// Perpendicular Riesz transform symbol `i(-k2, k1)/|k|`.
pub fn sqg_symbol(k: [i64; 2]) -> [Complex64; 2] {
    if k == [0, 0] {
        return [Complex64::new(0.0, 0.0); 2];
    }
    let (k1, k2) = (k[0] as f64, k[1] as f64);
    let kn = (k1 * k1 + k2 * k2).sqrt();
    [Complex64::new(0.0, -k2 / kn), Complex64::new(0.0, k1 / kn)]
}

type SymbolFn = dyn Fn(Wavevector) -> SymbolVector + Send + Sync;

/// User-supplied symbol, independent of `ν`.
#[derive(Clone)]
pub struct CustomSymbol {
    dim: usize,
    name: String,
    f: Arc<SymbolFn>,
}

impl CustomSymbol {
    pub fn new(
        dim: usize,
        name: impl Into<String>,
        f: impl Fn(Wavevector) -> SymbolVector + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for CustomSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomSymbol")
            .field("dim", &self.dim)
            .field("name", &self.name)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum MultiplierSpec {
    Mg { nu: f64 },
    Sqg,
    Custom(CustomSymbol),
}

impl MultiplierSpec {
    pub fn dim(&self) -> usize {
        match self {
            MultiplierSpec::Mg { .. } => 3,
            MultiplierSpec::Sqg => 2,
            MultiplierSpec::Custom(c) => c.dim,
        }
    }

    pub fn nu(&self) -> Option<f64> {
        match self {
            MultiplierSpec::Mg { nu } => Some(*nu),
            _ => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            MultiplierSpec::Mg { .. } => "mg",
            MultiplierSpec::Sqg => "sqg",
            MultiplierSpec::Custom(_) => "custom",
        }
    }

    /// Same law with `ν` replaced (only the MG family depends on it).
    pub fn with_nu(&self, nu: f64) -> Self {
        match self {
            MultiplierSpec::Mg { .. } => MultiplierSpec::Mg { nu },
            other => other.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MultiplierSpec::Mg { nu } if !(*nu >= 0.0 && nu.is_finite()) => {
                Err(Error::Domain(format!("MG viscosity must be >= 0, got {nu}")))
            }
            MultiplierSpec::Custom(c) if c.dim != 2 && c.dim != 3 => {
                Err(Error::Domain(format!("custom symbol dimension {} unsupported", c.dim)))
            }
            _ => Ok(()),
        }
    }

    /// Singular laws (order one at `ν = 0`) need analytic data when `κ = 0`.
    pub fn is_singular(&self) -> bool {
        matches!(self, MultiplierSpec::Mg { nu } if *nu == 0.0)
    }

    /// Symbol value at `k`, with `ν` taken from `nu` for the MG family.
    pub fn symbol_at(&self, k: Wavevector, nu: f64) -> SymbolVector {
        match self {
            MultiplierSpec::Mg { .. } => mg_symbol(k, nu).map(|v| Complex64::new(v, 0.0)),
            MultiplierSpec::Sqg => {
                let [a, b] = sqg_symbol([k[0], k[1]]);
                [a, b, Complex64::new(0.0, 0.0)]
            }
            MultiplierSpec::Custom(c) => (c.f)(k),
        }
    }

    pub fn symbol(&self, k: Wavevector) -> SymbolVector {
        self.symbol_at(k, self.nu().unwrap_or(0.0))
    }
}
