use rayon::prelude::*;
use serde::Serialize;

use crate::constitutive::MultiplierSpec;
use crate::diagnostics::{absorbing_entry_time, NormRequests, Recorder};
use crate::error::{Error, Result};
use crate::spectral::field::same_grid;
use crate::spectral::{linf_norm, sobolev_norm, GridSpec, SpectralField};
use crate::stats::spearman;
use crate::timestepper::{RunOptions, SimulationState, Solver, SolverConfig, TimeStep};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AttractorPlan {
    pub transient: f64,
    /// Time between snapshots.
    pub cadence: f64,
    /// Total snapshots, split evenly across the initial ensemble.
    pub count: usize,
    pub c0_hat: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttractorCloud {
    pub snapshots: Vec<SpectralField>,
    pub times: Vec<f64>,
    pub nu: Option<f64>,
    pub kappa: f64,
    pub transient: f64,
    pub cadence: f64,
    /// `3‖S‖_∞/(c0 κ)`.
    pub ball_radius: f64,
    /// Snapshots outside the ball.
    pub flagged: usize,
}

impl AttractorCloud {
    pub fn grid(&self) -> Option<GridSpec> {
        self.snapshots.first().map(|s| s.grid())
    }

    pub fn mean_l2(&self) -> f64 {
        if self.snapshots.is_empty() {
            return 0.0;
        }
        self.snapshots.iter().map(|s| sobolev_norm(s, 0.0).unwrap_or(0.0)).sum::<f64>()
            / self.snapshots.len() as f64
    }
}

/// Time after which `‖θ0‖_∞ e^{-c0κt} + ‖S‖_∞/(c0κ)` stays within the
/// radius `2‖S‖_∞/(c0κ)`; zero if already inside, `None` when `S = 0`.
pub fn absorbing_horizon(theta0_inf: f64, s_inf: f64, kappa: f64, c0: f64) -> Option<f64> {
    if s_inf <= 0.0 {
        return None;
    }
    let rate = c0 * kappa;
    let ratio = theta0_inf * rate / s_inf;
    Some(if ratio <= 1.0 { 0.0 } else { ratio.ln() / rate })
}

/// Post-transient snapshots from each member of an initial ensemble.
pub fn attractor_sample(solver: &Solver, ensemble: &[SpectralField], plan: &AttractorPlan) -> Result<AttractorCloud> {
    let kappa = solver.config().kappa;
    if !(kappa > 0.0) {
        return Err(Error::Precondition("attractor sampling needs kappa > 0".into()));
    }
    if !(plan.cadence > 0.0) {
        return Err(Error::Precondition(format!("sampling cadence must be > 0, got {}", plan.cadence)));
    }
    if plan.count == 0 || ensemble.is_empty() {
        return Err(Error::Precondition("need count >= 1 and a nonempty ensemble".into()));
    }
    if !(plan.c0_hat > 0.0) || !(plan.transient >= 0.0) {
        return Err(Error::Precondition("need c0_hat > 0 and transient >= 0".into()));
    }
    let s_inf = linf_norm(solver.forcing());
    for theta0 in ensemble {
        same_grid(solver.grid(), theta0.grid())?;
        if let Some(h) = absorbing_horizon(linf_norm(theta0), s_inf, kappa, plan.c0_hat) {
            if plan.transient < h {
                return Err(Error::Precondition(format!(
                    "insufficient horizon: transient {} is shorter than the absorbing-set entry estimate {h:.3}",
                    plan.transient
                )));
            }
        }
    }
    let m = ensemble.len();
    let per: Vec<usize> = (0..m).map(|i| plan.count / m + usize::from(i < plan.count % m)).collect();
    let runs: Vec<Result<Vec<SimulationState>>> = ensemble
        .par_iter()
        .zip(per.par_iter())
        .map(|(theta0, &k)| sample_member(solver, theta0, plan, k))
        .collect();
    let mut snapshots = Vec::with_capacity(plan.count);
    let mut times = Vec::with_capacity(plan.count);
    for run in runs {
        for s in run? {
            times.push(s.t);
            snapshots.push(s.theta);
        }
    }
    let theta_floor = ensemble.iter().map(linf_norm).fold(0.0, f64::max) * 1e-12;
    let ball_radius = 3.0 * s_inf / (plan.c0_hat * kappa);
    let limit = if s_inf > 0.0 { ball_radius } else { theta_floor };
    let flagged = snapshots.iter().filter(|s| linf_norm(s) > limit).count();
    Ok(AttractorCloud {
        snapshots,
        times,
        nu: solver.config().drift.nu(),
        kappa,
        transient: plan.transient,
        cadence: plan.cadence,
        ball_radius,
        flagged,
    })
}

fn sample_member(solver: &Solver, theta0: &SpectralField, plan: &AttractorPlan, k: usize) -> Result<Vec<SimulationState>> {
    let quiet = RunOptions {
        observe_every: 0,
        observe_initial: false,
    };
    let mut state = solver.advance_to(SimulationState::initial(theta0.clone()), plan.transient, &mut [], quiet)?;
    let mut out = Vec::with_capacity(k);
    for i in 1..=k {
        state = solver.advance_to(state, plan.transient + i as f64 * plan.cadence, &mut [], quiet)?;
        out.push(state.clone());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CloudNorm {
    L2,
    H1,
}

/// `max_{φ∈A} min_{ψ∈B} ‖φ - ψ‖`.
pub fn semidistance(a: &AttractorCloud, b: &AttractorCloud, norm: CloudNorm) -> Result<f64> {
    if a.snapshots.is_empty() || b.snapshots.is_empty() {
        return Err(Error::Precondition("semidistance of an empty cloud".into()));
    }
    same_grid(a.snapshots[0].grid(), b.snapshots[0].grid())?;
    let s = match norm {
        CloudNorm::L2 => 0.0,
        CloudNorm::H1 => 1.0,
    };
    let mut sup = 0.0f64;
    for f in &a.snapshots {
        let mut inf = f64::INFINITY;
        for g in &b.snapshots {
            inf = inf.min(sobolev_norm(&f.sub(g)?, s)?);
        }
        sup = sup.max(inf);
    }
    Ok(sup)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NuSweepRow {
    pub nu: f64,
    pub semidistance: f64,
    pub flagged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NuSweepResult {
    /// Sorted by `ν` descending.
    pub rows: Vec<NuSweepRow>,
    pub reference_nu: f64,
    /// Spearman correlation of semidistance against `ν`.
    pub spearman: Option<f64>,
}

/// Semidistance from each `G^ν` cloud to the reference-`ν` cloud.
pub fn nu_sweep_attractor(
    base: &SolverConfig,
    grid: GridSpec,
    forcing: &SpectralField,
    ensemble: &[SpectralField],
    plan: &AttractorPlan,
    nus: &[f64],
    reference_nu: f64,
    norm: CloudNorm,
) -> Result<NuSweepResult> {
    if !matches!(base.drift, MultiplierSpec::Mg { .. }) {
        return Err(Error::Precondition("ν sweeps need the MG drift".into()));
    }
    let nus = super::sweep::validate_parameter_list(nus, "nu")?;
    let cloud_for = |nu: f64| -> Result<AttractorCloud> {
        let mut cfg = base.clone();
        cfg.drift = cfg.drift.with_nu(nu);
        let solver = Solver::new(cfg, grid, forcing.clone())?;
        attractor_sample(&solver, ensemble, plan)
    };
    let reference = cloud_for(reference_nu)?;
    let clouds: Vec<Result<(f64, AttractorCloud)>> =
        nus.par_iter().map(|&nu| cloud_for(nu).map(|c| (nu, c))).collect();
    let mut rows = Vec::with_capacity(nus.len());
    for c in clouds {
        let (nu, cloud) = c?;
        rows.push(NuSweepRow {
            nu,
            semidistance: semidistance(&cloud, &reference, norm)?,
            flagged: cloud.flagged,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.nu).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.semidistance).collect();
    let rho = if rows.len() >= 2 { spearman(&xs, &ys)? } else { None };
    Ok(NuSweepResult {
        rows,
        reference_nu,
        spearman: rho,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbsorbingProbeRow {
    pub kappa: f64,
    pub t_entry: Option<f64>,
    pub radius: f64,
}

/// Absorbing-ball entry time per κ from the recorded `‖θ‖_∞` series.
pub fn absorbing_probe(
    base: &SolverConfig,
    grid: GridSpec,
    theta0: &SpectralField,
    forcing: &SpectralField,
    kappas: &[f64],
    t_end: f64,
    observe_every: u64,
    c0_hat: f64,
) -> Result<Vec<AbsorbingProbeRow>> {
    if !matches!(base.dt, TimeStep::Fixed(_)) {
        return Err(Error::Precondition("absorbing probes need a fixed dt".into()));
    }
    let s_inf = linf_norm(forcing);
    kappas
        .par_iter()
        .map(|&kappa| {
            let solver = Solver::new(base.clone().with_kappa(kappa), grid, forcing.clone())?;
            let mut rec = Recorder::new(NormRequests::default());
            solver.advance_to(
                SimulationState::initial(theta0.clone()),
                t_end,
                &mut [&mut rec],
                RunOptions {
                    observe_every,
                    observe_initial: true,
                },
            )?;
            Ok(AbsorbingProbeRow {
                kappa,
                t_entry: absorbing_entry_time(&rec.linf_series(), s_inf, kappa, c0_hat)?,
                radius: 2.0 * s_inf / (c0_hat * kappa),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::generate::{random_band, single_mode, ModeFilter};

    fn cloud(fields: Vec<SpectralField>) -> AttractorCloud {
        AttractorCloud {
            times: vec![0.0; fields.len()],
            snapshots: fields,
            nu: None,
            kappa: 1.0,
            transient: 0.0,
            cadence: 1.0,
            ball_radius: 0.0,
            flagged: 0,
        }
    }

    #[test]
    fn semidistance_properties() {
        let g = GridSpec::new(2, 16).unwrap();
        let f = single_mode(g, [1, 2, 0], 0.7).unwrap();
        let h = random_band(g, 1.0, 3.0, 0.3, 1, ModeFilter::default()).unwrap();
        let a = cloud(vec![f.clone(), h.clone()]);
        assert_eq!(semidistance(&a, &a, CloudNorm::L2).unwrap(), 0.0);
        let z = cloud(vec![SpectralField::zeros(g)]);
        let d = semidistance(&cloud(vec![f.clone()]), &z, CloudNorm::L2).unwrap();
        assert!((d - sobolev_norm(&f, 0.0).unwrap()).abs() < 1e-15);
        let b = cloud(vec![h.scaled(0.5), f.scaled(-1.0)]);
        let sd = semidistance(&a, &b, CloudNorm::H1).unwrap();
        let mut max_pair = 0.0f64;
        for x in &a.snapshots {
            for y in &b.snapshots {
                max_pair = max_pair.max(sobolev_norm(&x.sub(y).unwrap(), 1.0).unwrap());
            }
        }
        assert!(sd <= max_pair);
        assert!(semidistance(&a, &cloud(vec![]), CloudNorm::L2).is_err());
    }

    #[test]
    fn sampling_preconditions() {
        let g = GridSpec::new(2, 16).unwrap();
        let cfg = SolverConfig::new(MultiplierSpec::Sqg, 1.0, 2.0).with_dt(0.05);
        let solver = Solver::new(cfg, g, SpectralField::zeros(g)).unwrap();
        let theta0 = single_mode(g, [1, 1, 0], 1.0).unwrap();
        let plan = AttractorPlan {
            transient: 5.0,
            cadence: 0.0,
            count: 3,
            c0_hat: 1.0,
        };
        assert!(attractor_sample(&solver, std::slice::from_ref(&theta0), &plan).is_err());
        let plan = AttractorPlan { cadence: 1.0, ..plan };
        let c = attractor_sample(&solver, std::slice::from_ref(&theta0), &plan).unwrap();
        assert_eq!(c.snapshots.len(), 3);
        assert!(c.times.iter().all(|&t| t > plan.transient));
        // Unforced: the cloud collapses toward zero.
        assert!(c.snapshots.iter().all(|s| linf_norm(s) < 1e-4));

        let forcing = single_mode(g, [1, 0, 0], 0.1).unwrap();
        let cfg = SolverConfig::new(MultiplierSpec::Sqg, 1.0, 2.0).with_dt(0.05);
        let forced = Solver::new(cfg, g, forcing).unwrap();
        let big = theta0.scaled(100.0);
        let short = AttractorPlan { transient: 0.5, ..plan };
        assert!(matches!(attractor_sample(&forced, &[big], &short), Err(Error::Precondition(_))));
    }

    #[test]
    fn horizon_formula() {
        assert_eq!(absorbing_horizon(0.1, 1.0, 1.0, 1.0), Some(0.0));
        let h = absorbing_horizon(10.0, 1.0, 0.5, 1.0).unwrap();
        assert!((h - 5f64.ln() / 0.5).abs() < 1e-14);
        assert_eq!(absorbing_horizon(1.0, 0.0, 1.0, 1.0), None);
    }
}
