//! Norm time series, energy ledger, maximum-principle and absorbing-set
//! monitors, analyticity-radius estimation and the smallness test.

mod analyticity;
mod energy;
mod monitors;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{gevrey_norm, l2_norm, linf_norm, sobolev_norm};
use crate::timestepper::{Observer, SimulationState, Solver, SolverConfig};

pub use analyticity::{analyticity_radius_estimate, default_fit_window, AnalyticityEstimate};
pub use energy::{
    energy_balance_residual, energy_balance_study, EnergyLedger, EnergySummary, EnergyStudy, LedgerEntry,
};
pub use monitors::{
    absorbing_entry_time, degiorgi_shape_check, max_principle_check, smallness_condition,
    DeGiorgiReport, MaxPrincipleReport, SmallnessReport, DEFAULT_C0, MAX_PRINCIPLE_REL_TOL,
};

/// Gevrey weight `‖Λ^r e^{τΛ^{1/s}} θ‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GevreyRequest {
    pub r: f64,
    pub tau: f64,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct NormRequests {
    pub sobolev: Vec<f64>,
    pub gevrey: Option<GevreyRequest>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticRecord {
    pub t: f64,
    pub l2: f64,
    pub hs: Vec<(f64, f64)>,
    pub linf: f64,
    pub gevrey: Option<f64>,
    /// `κ‖Λ^{γ/2}θ‖²`.
    pub dissipation_rate: f64,
}

impl DiagnosticRecord {
    pub fn hs(&self, s: f64) -> Option<f64> {
        self.hs.iter().find(|(si, _)| *si == s).map(|(_, v)| *v)
    }
}

/// All requested norms of one snapshot.
pub fn record(
    state: &SimulationState,
    config: &SolverConfig,
    requests: &NormRequests,
) -> Result<DiagnosticRecord> {
    let theta = &state.theta;
    let hs = requests
        .sobolev
        .iter()
        .map(|&s| sobolev_norm(theta, s).map(|v| (s, v)))
        .collect::<Result<Vec<_>>>()?;
    let gevrey = requests
        .gevrey
        .map(|g| gevrey_norm(theta, g.r, g.tau, g.s))
        .transpose()?;
    let dissipation_rate = config.kappa * sobolev_norm(theta, config.gamma / 2.0)?.powi(2);
    let rec = DiagnosticRecord {
        t: state.t,
        l2: l2_norm(theta),
        hs,
        linf: linf_norm(theta),
        gevrey,
        dissipation_rate,
    };
    let finite = rec.l2.is_finite()
        && rec.linf.is_finite()
        && rec.dissipation_rate.is_finite()
        && rec.hs.iter().all(|(_, v)| v.is_finite())
        && rec.gevrey.is_none_or(f64::is_finite);
    if !finite {
        return Err(Error::BlowUp {
            t: state.t,
            shell: 0,
            reason: "non-finite diagnostic".into(),
        });
    }
    Ok(rec)
}

/// Observer collecting [`DiagnosticRecord`]s.
#[derive(Debug, Clone, Default)]
pub struct Recorder {
    pub requests: NormRequests,
    pub records: Vec<DiagnosticRecord>,
}

impl Recorder {
    pub fn new(requests: NormRequests) -> Self {
        Self {
            requests,
            records: Vec::new(),
        }
    }

    /// `(t, ‖θ‖_∞)` pairs.
    pub fn linf_series(&self) -> Vec<(f64, f64)> {
        self.records.iter().map(|r| (r.t, r.linf)).collect()
    }
}

impl Observer for Recorder {
    fn observe(&mut self, state: &SimulationState, solver: &Solver) -> Result<()> {
        self.records.push(record(state, solver.config(), &self.requests)?);
        Ok(())
    }
}

/// Observer keeping full snapshots.
#[derive(Debug, Clone, Default)]
pub struct SnapshotCollector {
    pub snapshots: Vec<SimulationState>,
    /// Snapshots with `t < start` are skipped.
    pub start: f64,
}

impl Observer for SnapshotCollector {
    fn observe(&mut self, state: &SimulationState, _: &Solver) -> Result<()> {
        if state.t >= self.start {
            self.snapshots.push(state.clone());
        }
        Ok(())
    }
}
