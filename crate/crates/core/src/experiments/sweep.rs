use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::spectral::{gevrey_norm, sobolev_norm, GridSpec, SpectralField};
use crate::stats::fit_line;
use crate::timestepper::{Integrator, RunOptions, SimulationState, Solver, SolverConfig, TimeStep};

/// Norm applied to sweep differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum NormKind {
    L2,
    /// Homogeneous `H^s`.
    Hs(f64),
    Gevrey { r: f64, tau: f64, s: f64 },
}

impl NormKind {
    pub fn name(&self) -> String {
        match self {
            NormKind::L2 => "L2".to_string(),
            NormKind::Hs(s) => format!("H{s}"),
            NormKind::Gevrey { r, tau, s } => format!("gevrey_r{r}_tau{tau}_s{s}"),
        }
    }

    pub fn eval(&self, f: &SpectralField) -> Result<f64> {
        match *self {
            NormKind::L2 => sobolev_norm(f, 0.0),
            NormKind::Hs(s) => sobolev_norm(f, s),
            NormKind::Gevrey { r, tau, s } => gevrey_norm(f, r, tau, s),
        }
    }
}

/// Shared inputs of a parameter sweep.
#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub base: SolverConfig,
    pub grid: GridSpec,
    pub theta0: SpectralField,
    pub forcing: SpectralField,
    /// Strictly positive, strictly descending; a terminal 0 is allowed and ignored
    /// (the reference run is always computed).
    pub values: Vec<f64>,
    /// Increasing, positive observation times.
    pub times: Vec<f64>,
    pub norms: Vec<NormKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: f64,
    pub t: f64,
    pub norm_name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormTrend {
    pub norm_name: String,
    /// Slope of `log error` against `log κ` at the final time.
    pub order: Option<f64>,
    /// Final-time error nonincreasing as the parameter decreases.
    pub monotone: bool,
    /// For `H^s` rows: the interpolation bound held for every member.
    pub interpolation_ok: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepFailure {
    pub param: f64,
    pub message: String,
    pub numerical: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    /// Sorted by parameter descending, then time, then norm order.
    pub rows: Vec<SweepRow>,
    pub trends: Vec<NormTrend>,
    /// Members that failed; their rows are absent.
    pub failures: Vec<SweepFailure>,
    /// SHA-256 of the shared `θ0`, `S` coefficients, grid and step size.
    pub input_hash: String,
}

impl SweepResult {
    pub fn value(&self, param: f64, t: f64, norm_name: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.param == param && r.t == t && r.norm_name == norm_name)
            .map(|r| r.value)
    }

    pub fn trend(&self, norm_name: &str) -> Option<&NormTrend> {
        self.trends.iter().find(|t| t.norm_name == norm_name)
    }
}

/// Validates a parameter list, returning the strictly positive entries.
pub fn validate_parameter_list(values: &[f64], what: &str) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::Precondition(format!("{what} list is empty")));
    }
    let (body, tail) = match values.last() {
        Some(&0.0) => (&values[..values.len() - 1], true),
        _ => (values, false),
    };
    if body.is_empty() && tail {
        return Err(Error::Precondition(format!("{what} list holds only the reference 0")));
    }
    if let Some(v) = body.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::Precondition(format!("{what} values must be > 0, got {v}")));
    }
    if body.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::Precondition(format!("{what} list must be strictly descending")));
    }
    Ok(body.to_vec())
}

fn validate_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Precondition("no observation times".into()));
    }
    if times[0] <= 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Precondition("observation times must be positive and increasing".into()));
    }
    Ok(())
}

pub(crate) fn input_hash(grid: GridSpec, fields: &[&SpectralField], dt: f64) -> String {
    let mut h = Sha256::new();
    h.update((grid.dim() as u64).to_le_bytes());
    h.update((grid.n() as u64).to_le_bytes());
    h.update(dt.to_le_bytes());
    for f in fields {
        h.update(f.coefficient_bytes());
    }
    hex::encode(h.finalize())
}

/// States at each observation time.
pub(crate) fn trajectory(solver: &Solver, theta0: &SpectralField, times: &[f64]) -> Result<Vec<SimulationState>> {
    let quiet = RunOptions {
        observe_every: 0,
        observe_initial: false,
    };
    let mut state = SimulationState::initial(theta0.clone());
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        state = solver.advance_to(state, t, &mut [], quiet)?;
        out.push(state.clone());
    }
    Ok(out)
}

/// `‖θ^κ(t) - θ^0(t)‖` over a descending κ list. The κ = 0 reference uses
/// IF-RK4 at a quarter of the member step.
pub fn kappa_sweep(plan: &SweepPlan) -> Result<SweepResult> {
    let kappas = validate_parameter_list(&plan.values, "kappa")?;
    validate_times(&plan.times)?;
    if plan.norms.is_empty() {
        return Err(Error::Precondition("no norms requested".into()));
    }
    let TimeStep::Fixed(dt) = plan.base.dt else {
        return Err(Error::Precondition(
            "sweeps need a fixed dt so every member shares one step schedule".into(),
        ));
    };
    let hash = input_hash(plan.grid, &[&plan.theta0, &plan.forcing], dt);

    let reference_cfg = plan
        .base
        .clone()
        .with_kappa(0.0)
        .with_integrator(Integrator::IfRk4)
        .with_dt(dt / 4.0);
    let reference_solver = Solver::new(reference_cfg, plan.grid, plan.forcing.clone())?;
    let reference = trajectory(&reference_solver, &plan.theta0, &plan.times)?;

    let members: Vec<(f64, Result<Vec<SimulationState>>)> = kappas
        .par_iter()
        .map(|&kappa| {
            let run = Solver::new(plan.base.clone().with_kappa(kappa), plan.grid, plan.forcing.clone())
                .and_then(|s| trajectory(&s, &plan.theta0, &plan.times));
            (kappa, run)
        })
        .collect();
    finish_sweep(plan, &reference, members, hash)
}

fn finish_sweep(
    plan: &SweepPlan,
    reference: &[SimulationState],
    members: Vec<(f64, Result<Vec<SimulationState>>)>,
    input_hash: String,
) -> Result<SweepResult> {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    // (param, final-time error per norm, interpolation flags per norm)
    let mut finals: Vec<(f64, Vec<f64>, Vec<bool>)> = Vec::new();
    for (param, run) in members {
        let states = match run {
            Ok(s) => s,
            Err(e) => {
                failures.push(SweepFailure {
                    param,
                    message: e.to_string(),
                    numerical: e.is_numerical(),
                });
                continue;
            }
        };
        let mut last = vec![0.0; plan.norms.len()];
        let mut interp = vec![true; plan.norms.len()];
        for (state, refstate) in states.iter().zip(reference) {
            let diff = state.theta.sub(&refstate.theta)?;
            let l2 = sobolev_norm(&diff, 0.0)?;
            for (j, norm) in plan.norms.iter().enumerate() {
                let value = norm.eval(&diff)?;
                if let NormKind::Hs(s) = *norm {
                    if s > 0.0 {
                        let sigma = 1.0 / (s + 1.0);
                        let sup = sobolev_norm(&state.theta, s + 1.0)? + sobolev_norm(&refstate.theta, s + 1.0)?;
                        let bound = l2.powf(sigma) * sup.powf(1.0 - sigma);
                        if value > bound * (1.0 + 1e-12) + 1e-300 {
                            interp[j] = false;
                        }
                    }
                }
                rows.push(SweepRow {
                    param,
                    t: state.t,
                    norm_name: norm.name(),
                    value,
                });
                last[j] = value;
            }
        }
        finals.push((param, last, interp));
    }
    let trends = plan
        .norms
        .iter()
        .enumerate()
        .map(|(j, norm)| {
            let pts: Vec<(f64, f64)> = finals
                .iter()
                .filter(|f| f.1[j] > 0.0)
                .map(|f| (f.0.ln(), f.1[j].ln()))
                .collect();
            let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            let order = fit_line(&xs, &ys).ok().map(|f| f.slope);
            let errs: Vec<f64> = finals.iter().map(|f| f.1[j]).collect();
            NormTrend {
                norm_name: norm.name(),
                order,
                monotone: crate::stats::is_nonincreasing(&errs),
                interpolation_ok: matches!(norm, NormKind::Hs(s) if *s > 0.0)
                    .then(|| finals.iter().all(|f| f.2[j])),
            }
        })
        .collect();
    Ok(SweepResult {
        rows,
        trends,
        failures,
        input_hash,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::MultiplierSpec;
    use crate::spectral::generate::{random_band, ModeFilter};

    #[test]
    fn parameter_lists() {
        assert_eq!(validate_parameter_list(&[1.0, 0.5, 0.0], "k").unwrap(), vec![1.0, 0.5]);
        assert!(validate_parameter_list(&[0.5, 1.0], "k").is_err());
        assert!(validate_parameter_list(&[1.0, 1.0], "k").is_err());
        assert!(validate_parameter_list(&[1.0, -1.0], "k").is_err());
        assert!(validate_parameter_list(&[], "k").is_err());
        assert!(validate_parameter_list(&[0.0], "k").is_err());
        assert!(validate_parameter_list(&[1.0, 0.0, 0.5], "k").is_err());
    }

    #[test]
    fn small_sweep_behaves() {
        let g = GridSpec::new(2, 16).unwrap();
        let theta0 = random_band(g, 1.0, 3.0, 0.5, 5, ModeFilter::default()).unwrap();
        let plan = SweepPlan {
            base: SolverConfig::new(MultiplierSpec::Sqg, 0.1, 2.0).with_dt(0.02),
            grid: g,
            theta0,
            forcing: SpectralField::zeros(g),
            values: vec![1e-1, 1e-2, 1e-3],
            times: vec![0.2, 0.4],
            norms: vec![NormKind::L2, NormKind::Hs(1.0)],
        };
        let r = kappa_sweep(&plan).unwrap();
        assert!(r.failures.is_empty());
        assert_eq!(r.rows.len(), 3 * 2 * 2);
        let l2 = r.trend("L2").unwrap();
        assert!(l2.monotone);
        assert!(l2.order.unwrap() > 0.5);
        assert_eq!(r.trend("H1").unwrap().interpolation_ok, Some(true));
        assert_eq!(r.input_hash.len(), 64);
        let mut auto = plan.clone();
        auto.base.dt = TimeStep::Auto;
        assert!(kappa_sweep(&auto).is_err());
    }

    #[test]
    fn norm_names() {
        assert_eq!(NormKind::Hs(1.5).name(), "H1.5");
        assert_eq!(NormKind::Gevrey { r: 1.0, tau: 0.4, s: 1.0 }.name(), "gevrey_r1_tau0.4_s1");
    }
}
