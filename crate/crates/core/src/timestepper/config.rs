use serde::{Deserialize, Serialize};

use crate::constitutive::MultiplierSpec;
use crate::error::{Error, Result};
use crate::spectral::{DealiasRule, SpectralField};

/// Hard cap on automatically selected steps.
pub const DT_MAX: f64 = 0.05;
/// Auto mode refreshes the CFL estimate this often.
pub const CFL_REFRESH_STEPS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    /// Integrating-factor classical RK4.
    IfRk4,
    /// Second-order exponential time differencing (Cox–Matthews).
    #[default]
    Etdrk2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TimeStep {
    Fixed(f64),
    Auto,
}

/// How the solver treats custom symbols that fail the structural audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Strictness {
    Warn,
    #[default]
    Reject,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub kappa: f64,
    pub gamma: f64,
    pub drift: MultiplierSpec,
    pub dt: TimeStep,
    pub t_end: f64,
    pub cfl_safety: f64,
    pub integrator: Integrator,
    pub dealias: DealiasRule,
    pub dt_max: f64,
    pub custom_strictness: Strictness,
}

impl SolverConfig {
    pub fn new(drift: MultiplierSpec, kappa: f64, gamma: f64) -> Self {
        Self {
            kappa,
            gamma,
            drift,
            dt: TimeStep::Auto,
            t_end: 1.0,
            cfl_safety: 0.5,
            integrator: Integrator::default(),
            dealias: DealiasRule::default(),
            dt_max: DT_MAX,
            custom_strictness: Strictness::default(),
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = TimeStep::Fixed(dt);
        self
    }

    pub fn with_t_end(mut self, t_end: f64) -> Self {
        self.t_end = t_end;
        self
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.drift.validate()?;
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::Domain(format!("kappa must be >= 0, got {}", self.kappa)));
        }
        if !(self.gamma > 0.0 && self.gamma <= 2.0) {
            return Err(Error::Domain(format!("gamma must lie in (0, 2], got {}", self.gamma)));
        }
        if let TimeStep::Fixed(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::Domain(format!("dt must be > 0, got {dt}")));
            }
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Domain(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::Domain(format!(
                "cfl_safety must lie in (0, 1], got {}",
                self.cfl_safety
            )));
        }
        if !(self.dt_max > 0.0) {
            return Err(Error::Domain(format!("dt_max must be > 0, got {}", self.dt_max)));
        }
        Ok(())
    }

    /// True when `κ = 0` runs rely on analytic data (singular or unaudited drift).
    pub fn needs_bounded_symbol_warning(&self) -> bool {
        self.kappa == 0.0
            && matches!(
                self.drift,
                MultiplierSpec::Mg { nu } if nu == 0.0
            )
            || self.kappa == 0.0 && matches!(self.drift, MultiplierSpec::Custom(_))
    }
}

/// `θ(·, t)` at an accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationState {
    pub t: f64,
    pub theta: SpectralField,
    pub step_count: u64,
}

impl SimulationState {
    pub fn initial(theta: SpectralField) -> Self {
        Self {
            t: 0.0,
            theta,
            step_count: 0,
        }
    }
}
