use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{l2_inner, l2_norm, SpectralField};
use crate::stats::fit_line;
use crate::timestepper::{Observer, SimulationState, Solver};

/// Balance of `E = ½‖θ‖²` over one accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LedgerEntry {
    /// End of the step.
    pub t: f64,
    pub dt: f64,
    pub delta_e: f64,
    /// `κ ∫ ‖Λ^{γ/2}θ‖²` over the step.
    pub dissipation: f64,
    /// `∫ ⟨S, θ⟩` over the step.
    pub injection: f64,
    /// `ΔE + dissipation - injection`.
    pub residual: f64,
}

impl LedgerEntry {
    /// Dissipation uses the per-mode logarithmic mean of `|θ̂|²`, exact for
    /// exponential decay; injection uses the trapezoid rule.
    pub fn between(
        prev: &SimulationState,
        next: &SimulationState,
        kappa: f64,
        gamma: f64,
        forcing: &SpectralField,
    ) -> Result<Self> {
        let dt = next.t - prev.t;
        if !(dt > 0.0) {
            return Err(Error::Precondition(format!("ledger step has dt = {dt}")));
        }
        let t = prev.theta.grid().modes();
        let mut integral = 0.0;
        for ((a, b), &kn) in prev
            .theta
            .coeffs()
            .iter()
            .zip(next.theta.coeffs())
            .zip(&t.norm)
        {
            if kn == 0.0 {
                continue;
            }
            let (p, q) = (a.norm_sqr(), b.norm_sqr());
            integral += kn.powf(gamma) * log_mean(p, q);
        }
        let dissipation = kappa * dt * integral;
        let injection =
            0.5 * dt * (l2_inner(forcing, &prev.theta)? + l2_inner(forcing, &next.theta)?);
        let delta_e = 0.5 * (l2_norm(&next.theta).powi(2) - l2_norm(&prev.theta).powi(2));
        let residual = delta_e + dissipation - injection;
        if !(residual.is_finite() && dissipation.is_finite() && injection.is_finite()) {
            return Err(Error::BlowUp {
                t: next.t,
                shell: 0,
                reason: "non-finite energy ledger entry".into(),
            });
        }
        Ok(Self {
            t: next.t,
            dt,
            delta_e,
            dissipation,
            injection,
            residual,
        })
    }
}

/// `(q - p)/ln(q/p)`, falling back to the arithmetic mean for equal or zero arguments.
fn log_mean(p: f64, q: f64) -> f64 {
    if p <= 0.0 || q <= 0.0 {
        return 0.5 * (p + q);
    }
    let r = q / p;
    if (r - 1.0).abs() < 1e-6 {
        // Series of (r-1)/ln r about r = 1.
        let x = r - 1.0;
        return p * (1.0 + x / 2.0 - x * x / 12.0 + x * x * x / 24.0);
    }
    (q - p) / r.ln()
}

/// Observer appending one [`LedgerEntry`] per step.
#[derive(Debug, Clone, Default)]
pub struct EnergyLedger {
    pub entries: Vec<LedgerEntry>,
}

impl Observer for EnergyLedger {
    fn observe(&mut self, _: &SimulationState, _: &Solver) -> Result<()> {
        Ok(())
    }

    fn after_step(&mut self, prev: &SimulationState, next: &SimulationState, solver: &Solver) -> Result<()> {
        let c = solver.config();
        self.entries
            .push(LedgerEntry::between(prev, next, c.kappa, c.gamma, solver.forcing())?);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergySummary {
    pub steps: usize,
    pub max_abs_residual: f64,
    /// Largest step size in the ledger.
    pub dt: f64,
}

pub fn energy_balance_residual(ledger: &EnergyLedger) -> Result<EnergySummary> {
    if ledger.entries.is_empty() {
        return Err(Error::Precondition("energy ledger is empty".into()));
    }
    Ok(EnergySummary {
        steps: ledger.entries.len(),
        max_abs_residual: ledger.entries.iter().map(|e| e.residual.abs()).fold(0.0, f64::max),
        dt: ledger.entries.iter().map(|e| e.dt).fold(0.0, f64::max),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyStudy {
    pub summaries: Vec<EnergySummary>,
    /// Slope of `log(max |residual|)` against `log(dt)`.
    pub slope: f64,
}

/// Residual convergence across ledgers of the same run at different step sizes.
pub fn energy_balance_study(ledgers: &[EnergyLedger]) -> Result<EnergyStudy> {
    let summaries = ledgers
        .iter()
        .map(energy_balance_residual)
        .collect::<Result<Vec<_>>>()?;
    if summaries.iter().any(|s| s.max_abs_residual <= 0.0) {
        return Err(Error::Estimation("zero residual; slope undefined".into()));
    }
    let xs: Vec<f64> = summaries.iter().map(|s| s.dt.ln()).collect();
    let ys: Vec<f64> = summaries.iter().map(|s| s.max_abs_residual.ln()).collect();
    let slope = fit_line(&xs, &ys)?.slope;
    Ok(EnergyStudy { summaries, slope })
}
