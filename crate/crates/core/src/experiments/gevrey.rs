use serde::Serialize;

use crate::diagnostics::analyticity_radius_estimate;
use crate::error::{Error, Result};
use crate::spectral::{gevrey_norm, SpectralField};
use crate::stats::spearman;
use crate::timestepper::{RunOptions, SimulationState, Solver};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GevreyTrackPlan {
    pub t_end: f64,
    /// Time between estimates.
    pub sample_dt: f64,
    /// Prescribed `τ(t) = max(0, τ_start - rate·t)`; `None` starts at `τ_hat(0)`.
    pub tau_start: Option<f64>,
    pub rate: f64,
    pub r: f64,
    pub s: f64,
    pub window: Option<(usize, usize)>,
}

impl GevreyTrackPlan {
    pub fn new(t_end: f64, sample_dt: f64) -> Self {
        Self {
            t_end,
            sample_dt,
            tau_start: None,
            rate: 0.0,
            r: 0.0,
            s: 1.0,
            window: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GevreyTrackRow {
    pub t: f64,
    pub tau_hat: f64,
    pub reliable: bool,
    pub tau_prescribed: f64,
    /// `‖Λ^r e^{τ(t)Λ^{1/s}} θ(t)‖`.
    pub gevrey: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GevreyTrack {
    pub rows: Vec<GevreyTrackRow>,
    /// Stopped early because `τ_hat` fell below two grid spacings.
    pub halted: bool,
    /// Spearman correlation of `τ_hat` against `t`.
    pub spearman: Option<f64>,
}

/// Tracks the estimated analyticity radius along a run. Stops once
/// `τ_hat < 2·(2π/N)`.
pub fn gevrey_radius_track(solver: &Solver, theta0: &SpectralField, plan: &GevreyTrackPlan) -> Result<GevreyTrack> {
    if !(plan.sample_dt > 0.0) || !(plan.t_end >= 0.0) || !(plan.rate >= 0.0) {
        return Err(Error::Precondition(format!(
            "need sample_dt > 0, t_end >= 0, rate >= 0; got {}, {}, {}",
            plan.sample_dt, plan.t_end, plan.rate
        )));
    }
    let grid = solver.grid();
    let floor = 2.0 * (std::f64::consts::TAU / grid.n() as f64);
    let first = analyticity_radius_estimate(theta0, plan.window)?;
    if !first.reliable {
        return Err(Error::Estimation(
            "analyticity radius of the initial data is not resolvable on this grid".into(),
        ));
    }
    let tau_start = plan.tau_start.unwrap_or(first.tau_hat);
    let quiet = RunOptions {
        observe_every: 0,
        observe_initial: false,
    };
    let mut rows = Vec::new();
    let mut state = SimulationState::initial(theta0.clone());
    let mut halted = false;
    let mut i = 0u64;
    loop {
        let est = analyticity_radius_estimate(&state.theta, plan.window)?;
        let tau = (tau_start - plan.rate * state.t).max(0.0);
        rows.push(GevreyTrackRow {
            t: state.t,
            tau_hat: est.tau_hat,
            reliable: est.reliable,
            tau_prescribed: tau,
            gevrey: gevrey_norm(&state.theta, plan.r, tau, plan.s)?,
        });
        if est.tau_hat < floor {
            halted = true;
            break;
        }
        if state.t >= plan.t_end {
            break;
        }
        i += 1;
        let target = (i as f64 * plan.sample_dt).min(plan.t_end);
        state = solver.advance_to(state, target, &mut [], quiet)?;
    }
    let ts: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let taus: Vec<f64> = rows.iter().map(|r| r.tau_hat).collect();
    let rho = if rows.len() >= 2 { spearman(&ts, &taus)? } else { None };
    Ok(GevreyTrack {
        rows,
        halted,
        spearman: rho,
    })
}
