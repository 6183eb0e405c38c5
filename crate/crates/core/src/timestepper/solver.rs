use std::borrow::Cow;

use log::warn;
use rustfft::num_complex::Complex64;

use super::config::{Integrator, SimulationState, SolverConfig, Strictness, TimeStep, CFL_REFRESH_STEPS};
use super::linear::LinearOps;
use crate::constitutive::{build_symbol_table, MultiplierSpec, SymbolTable};
use crate::error::{Error, Result};
use crate::spectral::field::same_grid;
use crate::spectral::ops::{band_physical, divergence_of_products};
use crate::spectral::{sobolev_norm, GridSpec, SpectralField, VectorField};

/// Floor on `‖u‖_∞` in the CFL estimate.
pub const CFL_VELOCITY_FLOOR: f64 = 1e-8;
/// `‖θ‖_{H¹}` growth factor treated as blow-up.
pub const BLOWUP_GROWTH: f64 = 1e6;

/// Receives snapshots during [`Solver::advance_to`].
pub trait Observer {
    /// Called at the configured cadence, including the initial and final state.
    fn observe(&mut self, state: &SimulationState, solver: &Solver) -> Result<()>;

    /// Called after every accepted step.
    fn after_step(
        &mut self,
        _prev: &SimulationState,
        _next: &SimulationState,
        _solver: &Solver,
    ) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Observer cadence in steps (0 disables intermediate observations).
    pub observe_every: u64,
    pub observe_initial: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            observe_every: 1,
            observe_initial: true,
        }
    }
}

/// Physical-space samples of a stage value, reused by tangent propagation.
#[derive(Debug, Clone)]
pub(crate) struct Stage {
    pub coeffs: Vec<Complex64>,
    pub theta: Vec<f64>,
    pub u: Vec<Vec<f64>>,
}

pub(crate) struct StepTrace {
    pub stages: Vec<Stage>,
}

/// Time integrator for `∂tθ + u·∇θ = -κΛ^γθ + S`, `u = M[θ]`.
#[derive(Debug)]
pub struct Solver {
    config: SolverConfig,
    grid: GridSpec,
    table: SymbolTable,
    forcing: SpectralField,
    mask: Vec<bool>,
    nominal: Option<LinearOps>,
}

impl Solver {
    pub fn new(config: SolverConfig, grid: GridSpec, forcing: SpectralField) -> Result<Self> {
        config.validate()?;
        same_grid(grid, forcing.grid())?;
        forcing.check_invariants()?;
        let table = build_symbol_table(&config.drift, grid)?;
        if let MultiplierSpec::Custom(c) = &config.drift {
            let violations = table.audit().violations(crate::constitutive::DIVERGENCE_FREE_TOL);
            if !violations.is_empty() {
                let msg = format!("custom symbol '{}' fails audit: {}", c.name(), violations.join("; "));
                match config.custom_strictness {
                    Strictness::Reject => return Err(Error::ContractViolation(msg)),
                    Strictness::Warn => warn!("{msg}"),
                }
            }
        }
        if matches!(config.drift, MultiplierSpec::Mg { .. }) && !forcing.has_zero_vertical_mean() {
            return Err(Error::Precondition(
                "MG forcing must have zero vertical mean (vanish on k3 = 0)".into(),
            ));
        }
        if config.needs_bounded_symbol_warning() {
            warn!(
                "kappa = 0 with a {} drift without bounded symbol; only analytic data on a finite horizon is meaningful",
                config.drift.kind_name()
            );
        }
        let nominal = match config.dt {
            TimeStep::Fixed(dt) => Some(LinearOps::new(grid, config.kappa, config.gamma, dt)),
            TimeStep::Auto => None,
        };
        Ok(Self {
            mask: config.dealias.mask(grid),
            config,
            grid,
            table,
            forcing,
            nominal,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn table(&self) -> &SymbolTable {
        &self.table
    }

    pub fn forcing(&self) -> &SpectralField {
        &self.forcing
    }

    pub fn drift(&self, theta: &SpectralField) -> Result<VectorField> {
        crate::constitutive::apply_drift(&self.table, theta)
    }

    pub(crate) fn stage(&self, coeffs: Vec<Complex64>) -> Stage {
        physical_stage(&self.table, &self.mask, coeffs)
    }

    fn stage_umax(stage: &Stage) -> f64 {
        let mut m = 0.0f64;
        for i in 0..stage.theta.len() {
            let s: f64 = stage.u.iter().map(|c| c[i] * c[i]).sum();
            m = m.max(s);
        }
        m.sqrt()
    }

    /// `S - P∇·(uθ)`.
    pub(crate) fn nonlinear(&self, stage: &Stage) -> Vec<Complex64> {
        let products: Vec<Vec<f64>> = stage
            .u
            .iter()
            .map(|uj| uj.iter().zip(&stage.theta).map(|(a, b)| a * b).collect())
            .collect();
        let mut out = divergence_of_products(self.grid, &products, &self.mask);
        for (o, s) in out.iter_mut().zip(self.forcing.coeffs()) {
            *o = s - *o;
        }
        out
    }

    /// `-P∇·(u[θ]ψ + u[ψ]θ)` around the base stage `θ`.
    pub(crate) fn nonlinear_derivative(&self, base: &Stage, psi: &[Complex64]) -> Vec<Complex64> {
        let p = self.stage(psi.to_vec());
        linear_response(self.grid, &self.mask, base, &p)
    }

    /// Full right-hand side `-u·∇θ - κΛ^γθ + S`.
    pub fn rhs(&self, theta: &SpectralField) -> Result<SpectralField> {
        same_grid(self.grid, theta.grid())?;
        let t = self.grid.modes();
        let mut out = self.nonlinear(&self.stage(theta.coeffs().to_vec()));
        for ((o, c), &kn) in out.iter_mut().zip(theta.coeffs()).zip(&t.norm) {
            *o -= c * (self.config.kappa * kn.powf(self.config.gamma));
        }
        Ok(SpectralField::from_raw(self.grid, out))
    }

    fn ops_for(&self, h: f64) -> Cow<'_, LinearOps> {
        match &self.nominal {
            Some(ops) if ops.h == h => Cow::Borrowed(ops),
            _ => Cow::Owned(LinearOps::new(self.grid, self.config.kappa, self.config.gamma, h)),
        }
    }

    /// CFL-limited step for the current state, capped at `dt_max`.
    pub fn auto_dt(&self, theta: &SpectralField) -> Result<f64> {
        let u = self.drift(theta)?;
        Ok(cfl_dt(&u, self.config.cfl_safety).min(self.config.dt_max))
    }

    /// Step size the solver would take from `state` absent clipping.
    pub fn nominal_dt(&self, state: &SimulationState) -> Result<f64> {
        match self.config.dt {
            TimeStep::Fixed(dt) => Ok(dt),
            TimeStep::Auto => self.auto_dt(&state.theta),
        }
    }

    pub fn step(&self, state: &SimulationState) -> Result<SimulationState> {
        let h = self.nominal_dt(state)?;
        self.step_with(state, h)
    }

    pub fn step_with(&self, state: &SimulationState, h: f64) -> Result<SimulationState> {
        self.step_traced(state, h).map(|(s, _)| s)
    }

    pub(crate) fn step_traced(
        &self,
        state: &SimulationState,
        h: f64,
    ) -> Result<(SimulationState, StepTrace)> {
        same_grid(self.grid, state.theta.grid())?;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Domain(format!("step size must be > 0, got {h}")));
        }
        let ops = self.ops_for(h);
        let s0 = self.stage(state.theta.coeffs().to_vec());
        let umax = Self::stage_umax(&s0);
        let bound = self.config.cfl_safety * self.grid.dx() / umax.max(CFL_VELOCITY_FLOOR);
        if h > 10.0 * bound {
            return Err(Error::Stability { dt: h, bound });
        }
        let (next, stages) = match self.config.integrator {
            Integrator::Etdrk2 => self.etdrk2(&ops, s0),
            Integrator::IfRk4 => self.ifrk4(&ops, s0),
        };
        let t = if state.t + h == state.t { state.t } else { state.t + h };
        check_finite(self.grid, &next, t)?;
        let theta = SpectralField::from_raw(self.grid, next);
        theta.debug_check();
        Ok((
            SimulationState {
                t,
                theta,
                step_count: state.step_count + 1,
            },
            StepTrace { stages },
        ))
    }

    fn etdrk2(&self, ops: &LinearOps, s0: Stage) -> (Vec<Complex64>, Vec<Stage>) {
        let h = ops.h;
        let n0 = self.nonlinear(&s0);
        let a: Vec<Complex64> = (0..n0.len())
            .map(|i| s0.coeffs[i] * ops.exp[i] + n0[i] * (h * ops.phi1[i]))
            .collect();
        let s1 = self.stage(a);
        let n1 = self.nonlinear(&s1);
        let next = (0..n0.len())
            .map(|i| s1.coeffs[i] + (n1[i] - n0[i]) * (h * ops.phi2[i]))
            .collect();
        (next, vec![s0, s1])
    }

    fn ifrk4(&self, ops: &LinearOps, s0: Stage) -> (Vec<Complex64>, Vec<Stage>) {
        let h = ops.h;
        let len = s0.coeffs.len();
        let e = &ops.exp;
        let eh = &ops.exp_half;
        let k1 = self.nonlinear(&s0);
        let a: Vec<Complex64> = (0..len)
            .map(|i| (s0.coeffs[i] + k1[i] * (0.5 * h)) * eh[i])
            .collect();
        let sa = self.stage(a);
        let k2 = self.nonlinear(&sa);
        let b: Vec<Complex64> = (0..len)
            .map(|i| s0.coeffs[i] * eh[i] + k2[i] * (0.5 * h))
            .collect();
        let sb = self.stage(b);
        let k3 = self.nonlinear(&sb);
        let c: Vec<Complex64> = (0..len)
            .map(|i| s0.coeffs[i] * e[i] + k3[i] * (h * eh[i]))
            .collect();
        let sc = self.stage(c);
        let k4 = self.nonlinear(&sc);
        let next = (0..len)
            .map(|i| {
                s0.coeffs[i] * e[i]
                    + (k1[i] * e[i] + (k2[i] + k3[i]) * (2.0 * eh[i]) + k4[i]) * (h / 6.0)
            })
            .collect();
        (next, vec![s0, sa, sb, sc])
    }

    /// Linearized step reusing the base stages of `trace` (exact Jacobian of
    /// the discrete map).
    pub(crate) fn tangent_step(&self, trace: &StepTrace, h: f64, psi: &[Complex64]) -> Vec<Complex64> {
        let ops = self.ops_for(h);
        let len = psi.len();
        match self.config.integrator {
            Integrator::Etdrk2 => {
                let d0 = self.nonlinear_derivative(&trace.stages[0], psi);
                let da: Vec<Complex64> = (0..len)
                    .map(|i| psi[i] * ops.exp[i] + d0[i] * (h * ops.phi1[i]))
                    .collect();
                let d1 = self.nonlinear_derivative(&trace.stages[1], &da);
                (0..len)
                    .map(|i| da[i] + (d1[i] - d0[i]) * (h * ops.phi2[i]))
                    .collect()
            }
            Integrator::IfRk4 => {
                let e = &ops.exp;
                let eh = &ops.exp_half;
                let k1 = self.nonlinear_derivative(&trace.stages[0], psi);
                let a: Vec<Complex64> = (0..len).map(|i| (psi[i] + k1[i] * (0.5 * h)) * eh[i]).collect();
                let k2 = self.nonlinear_derivative(&trace.stages[1], &a);
                let b: Vec<Complex64> = (0..len).map(|i| psi[i] * eh[i] + k2[i] * (0.5 * h)).collect();
                let k3 = self.nonlinear_derivative(&trace.stages[2], &b);
                let c: Vec<Complex64> = (0..len).map(|i| psi[i] * e[i] + k3[i] * (h * eh[i])).collect();
                let k4 = self.nonlinear_derivative(&trace.stages[3], &c);
                (0..len)
                    .map(|i| {
                        psi[i] * e[i]
                            + (k1[i] * e[i] + (k2[i] + k3[i]) * (2.0 * eh[i]) + k4[i]) * (h / 6.0)
                    })
                    .collect()
            }
        }
    }

    /// The MG vertical-mean condition applies to data at `t = 0` only; the
    /// nonlinearity repopulates `k3 = 0` along a trajectory.
    pub(crate) fn validate_initial(&self, state: &SimulationState) -> Result<()> {
        let theta0 = &state.theta;
        same_grid(self.grid, theta0.grid())?;
        theta0.check_invariants()?;
        let fresh = state.t == 0.0 && state.step_count == 0;
        if fresh && matches!(self.config.drift, MultiplierSpec::Mg { .. }) && !theta0.has_zero_vertical_mean() {
            return Err(Error::Precondition(
                "MG initial data must have zero vertical mean (vanish on k3 = 0)".into(),
            ));
        }
        Ok(())
    }

    /// Integrates from `state` until `t_target`, clipping the last step to
    /// land on it exactly.
    pub fn advance_to(
        &self,
        state: SimulationState,
        t_target: f64,
        observers: &mut [&mut dyn Observer],
        opts: RunOptions,
    ) -> Result<SimulationState> {
        self.validate_initial(&state)?;
        if opts.observe_initial {
            notify(observers, &state, self)?;
        }
        let reference = sobolev_norm(&state.theta, 1.0)?.max(sobolev_norm(&self.forcing, 1.0)?);
        let mut state = state;
        let mut last_observed = opts.observe_initial;
        let mut dt: Option<f64> = None;
        let mut since_refresh = 0usize;
        while state.t < t_target {
            let h_nominal = match self.config.dt {
                TimeStep::Fixed(dt) => dt,
                TimeStep::Auto => {
                    if dt.is_none() || since_refresh >= CFL_REFRESH_STEPS {
                        dt = Some(self.auto_dt(&state.theta)?);
                        since_refresh = 0;
                    }
                    since_refresh += 1;
                    dt.unwrap()
                }
            };
            let remaining = t_target - state.t;
            let (h, last) = if remaining <= h_nominal * (1.0 + 1e-9) {
                (remaining, true)
            } else {
                (h_nominal, false)
            };
            let mut next = self.step_with(&state, h)?;
            if last {
                next.t = t_target;
            }
            if reference > 0.0 {
                let h1 = sobolev_norm(&next.theta, 1.0)?;
                if h1 > BLOWUP_GROWTH * reference {
                    return Err(Error::BlowUp {
                        t: next.t,
                        shell: dominant_shell(&next.theta),
                        reason: format!("H1 norm grew from {reference:e} to {h1:e}"),
                    });
                }
            }
            for o in observers.iter_mut() {
                o.after_step(&state, &next, self).map_err(|e| Error::Observer {
                    t: next.t,
                    message: e.to_string(),
                })?;
            }
            state = next;
            last_observed = false;
            if opts.observe_every > 0 && state.step_count.is_multiple_of(opts.observe_every) {
                notify(observers, &state, self)?;
                last_observed = true;
            }
        }
        if !last_observed {
            notify(observers, &state, self)?;
        }
        Ok(state)
    }

    /// Runs from `θ0` at `t = 0` to the configured `t_end`.
    pub fn run(
        &self,
        theta0: &SpectralField,
        observers: &mut [&mut dyn Observer],
        opts: RunOptions,
    ) -> Result<SimulationState> {
        self.advance_to(
            SimulationState::initial(theta0.clone()),
            self.config.t_end,
            observers,
            opts,
        )
    }
}

pub(crate) fn physical_stage(table: &SymbolTable, mask: &[bool], coeffs: Vec<Complex64>) -> Stage {
    let grid = table.grid();
    let theta = band_physical(grid, &coeffs, mask);
    let u = (0..grid.dim())
        .map(|j| {
            let uj: Vec<Complex64> = coeffs
                .iter()
                .zip(table.values())
                .map(|(c, m)| c * m[j])
                .collect();
            band_physical(grid, &uj, mask)
        })
        .collect();
    Stage { coeffs, theta, u }
}

/// `-P∇·(u[θ]ψ + u[ψ]θ)` from physical stages of `θ` and `ψ`.
pub(crate) fn linear_response(grid: GridSpec, mask: &[bool], base: &Stage, p: &Stage) -> Vec<Complex64> {
    let dim = grid.dim();
    let grid_len = grid.len();
    let products: Vec<Vec<f64>> = (0..dim)
        .map(|j| {
            (0..grid_len)
                .map(|i| base.u[j][i] * p.theta[i] + p.u[j][i] * base.theta[i])
                .collect()
        })
        .collect();
    let mut out = divergence_of_products(grid, &products, mask);
    out.iter_mut().for_each(|c| *c = -*c);
    out
}

fn notify(observers: &mut [&mut dyn Observer], state: &SimulationState, solver: &Solver) -> Result<()> {
    for o in observers.iter_mut() {
        o.observe(state, solver).map_err(|e| Error::Observer {
            t: state.t,
            message: e.to_string(),
        })?;
    }
    Ok(())
}

fn check_finite(grid: GridSpec, coeffs: &[Complex64], t: f64) -> Result<()> {
    let table = grid.modes();
    if let Some(idx) = coeffs.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::BlowUp {
            t,
            shell: table.norm[idx].floor() as usize,
            reason: "non-finite coefficient".into(),
        });
    }
    Ok(())
}

fn dominant_shell(f: &SpectralField) -> usize {
    let t = f.grid().modes();
    let mut best = (0.0, 0usize);
    for (c, &kn) in f.coeffs().iter().zip(&t.norm) {
        let w = kn * c.norm();
        if w > best.0 {
            best = (w, kn.floor() as usize);
        }
    }
    best.1
}

/// `cfl_safety · Δx / max(‖u‖_∞, 1e-8)` with `‖u‖_∞` the sup of `|u(x)|` on
/// the 2x oversampled lattice.
pub fn cfl_dt(u: &VectorField, cfl_safety: f64) -> f64 {
    let grid = u.grid();
    let mut mag2: Vec<f64> = Vec::new();
    for c in u.components() {
        if c.is_zero() {
            continue;
        }
        let p = c.to_physical_oversampled(2);
        if mag2.is_empty() {
            mag2 = vec![0.0; p.len()];
        }
        mag2.iter_mut().zip(&p).for_each(|(m, v)| *m += v * v);
    }
    let umax = mag2.into_iter().fold(0.0, f64::max).sqrt();
    cfl_safety * grid.dx() / umax.max(CFL_VELOCITY_FLOOR)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::generate::{random_band, single_mode, ModeFilter};
    use super::super::config::DT_MAX;
    use crate::spectral::l2_norm;

    fn sqg_config(kappa: f64, dt: f64, t_end: f64) -> SolverConfig {
        SolverConfig::new(MultiplierSpec::Sqg, kappa, 1.0)
            .with_dt(dt)
            .with_t_end(t_end)
    }

    #[test]
    fn single_mode_decays_exactly() {
        let g = GridSpec::new(2, 32).unwrap();
        for integrator in [Integrator::Etdrk2, Integrator::IfRk4] {
            let cfg = sqg_config(0.1, 0.05, 1.0).with_integrator(integrator);
            let s = Solver::new(cfg, g, SpectralField::zeros(g)).unwrap();
            let theta0 = single_mode(g, [3, 4, 0], 1.0).unwrap();
            let out = s.run(&theta0, &mut [], RunOptions::default()).unwrap();
            assert_eq!(out.t, 1.0);
            assert_eq!(out.step_count, 20);
            let expected = (-0.1f64 * 5.0).exp();
            let got = out.theta.coeff([3, 4, 0]).re * 2.0;
            assert!((got - expected).abs() < 1e-13, "{integrator:?}: {got} vs {expected}");
        }
    }

    fn reference_error(integrator: Integrator, dt: f64, reference: &SpectralField) -> f64 {
        let g = reference.grid();
        let theta0 = random_band(g, 1.0, 4.0, 1.0, 7, ModeFilter::default()).unwrap();
        let cfg = sqg_config(0.05, dt, 0.5).with_integrator(integrator);
        let s = Solver::new(cfg, g, SpectralField::zeros(g)).unwrap();
        let out = s.run(&theta0, &mut [], RunOptions::default()).unwrap();
        l2_norm(&out.theta.sub(reference).unwrap())
    }

    #[test]
    fn temporal_orders() {
        let g = GridSpec::new(2, 24).unwrap();
        let theta0 = random_band(g, 1.0, 4.0, 1.0, 7, ModeFilter::default()).unwrap();
        let cfg = sqg_config(0.05, 0.5 / 512.0, 0.5).with_integrator(Integrator::IfRk4);
        let reference = Solver::new(cfg, g, SpectralField::zeros(g))
            .unwrap()
            .run(&theta0, &mut [], RunOptions::default())
            .unwrap()
            .theta;
        let e1 = reference_error(Integrator::Etdrk2, 0.5 / 16.0, &reference);
        let e2 = reference_error(Integrator::Etdrk2, 0.5 / 32.0, &reference);
        let order = (e1 / e2).log2();
        assert!((1.7..2.4).contains(&order), "ETDRK2 order {order}");
        let e1 = reference_error(Integrator::IfRk4, 0.5 / 16.0, &reference);
        let e2 = reference_error(Integrator::IfRk4, 0.5 / 32.0, &reference);
        let order = (e1 / e2).log2();
        assert!((3.5..4.6).contains(&order), "IF-RK4 order {order}");
    }

    #[test]
    fn clips_last_step() {
        let g = GridSpec::new(2, 16).unwrap();
        let s = Solver::new(sqg_config(0.1, 0.3, 1.0), g, SpectralField::zeros(g)).unwrap();
        let theta0 = single_mode(g, [1, 1, 0], 1.0).unwrap();
        let out = s.run(&theta0, &mut [], RunOptions::default()).unwrap();
        assert_eq!(out.t, 1.0);
        assert_eq!(out.step_count, 4);
    }

    #[test]
    fn rejects_unstable_step() {
        let g = GridSpec::new(2, 32).unwrap();
        let theta0 = random_band(g, 1.0, 4.0, 50.0, 3, ModeFilter::default()).unwrap();
        let s = Solver::new(sqg_config(0.0, 1.0, 1.0), g, SpectralField::zeros(g)).unwrap();
        let err = s.step(&SimulationState::initial(theta0)).unwrap_err();
        assert!(matches!(err, Error::Stability { .. }), "{err}");
        assert!(err.is_numerical());
    }

    #[test]
    fn auto_step_respects_caps() {
        let g = GridSpec::new(2, 32).unwrap();
        let cfg = SolverConfig::new(MultiplierSpec::Sqg, 0.1, 1.0);
        let s = Solver::new(cfg, g, SpectralField::zeros(g)).unwrap();
        let tiny = single_mode(g, [1, 0, 0], 1e-6).unwrap();
        assert_eq!(s.auto_dt(&tiny).unwrap(), DT_MAX);
        let big = random_band(g, 1.0, 4.0, 20.0, 3, ModeFilter::default()).unwrap();
        let dt = s.auto_dt(&big).unwrap();
        assert!(dt < DT_MAX && dt > 0.0);
        assert_eq!(cfl_dt(&VectorField::zeros(g), 0.5), 0.5 * g.dx() / CFL_VELOCITY_FLOOR);
    }

    struct Failing;
    impl Observer for Failing {
        fn observe(&mut self, state: &SimulationState, _: &Solver) -> Result<()> {
            if state.step_count == 2 {
                Err(Error::Estimation("boom".into()))
            } else {
                Ok(())
            }
        }
    }

    struct Counter(Vec<u64>);
    impl Observer for Counter {
        fn observe(&mut self, state: &SimulationState, _: &Solver) -> Result<()> {
            self.0.push(state.step_count);
            Ok(())
        }
    }

    #[test]
    fn observer_cadence_and_errors() {
        let g = GridSpec::new(2, 16).unwrap();
        let s = Solver::new(sqg_config(0.1, 0.1, 1.0), g, SpectralField::zeros(g)).unwrap();
        let theta0 = single_mode(g, [1, 1, 0], 1.0).unwrap();
        let mut c = Counter(vec![]);
        let opts = RunOptions { observe_every: 3, observe_initial: true };
        s.run(&theta0, &mut [&mut c], opts).unwrap();
        assert_eq!(c.0, vec![0, 3, 6, 9, 10]);
        let err = s.run(&theta0, &mut [&mut Failing], RunOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Observer { t, .. } if (t - 0.2).abs() < 1e-12), "{err}");
    }

    #[test]
    fn mg_requires_zero_vertical_mean() {
        let g = GridSpec::new(3, 8).unwrap();
        let cfg = SolverConfig::new(MultiplierSpec::Mg { nu: 0.5 }, 0.1, 2.0).with_dt(0.01);
        let bad = single_mode(g, [1, 0, 0], 1.0).unwrap();
        assert!(matches!(Solver::new(cfg.clone(), g, bad.clone()), Err(Error::Precondition(_))));
        let s = Solver::new(cfg, g, SpectralField::zeros(g)).unwrap();
        assert!(s.run(&bad, &mut [], RunOptions::default()).is_err());
    }

    #[test]
    fn forced_steady_state() {
        // θ = S/(κ|k|^γ) is steady for a single forced mode.
        let g = GridSpec::new(2, 16).unwrap();
        let forcing = single_mode(g, [2, 1, 0], 0.2).unwrap();
        let cfg = SolverConfig::new(MultiplierSpec::Sqg, 0.5, 2.0).with_dt(0.05).with_t_end(2.0);
        let s = Solver::new(cfg, g, forcing.clone()).unwrap();
        let steady = forcing.scaled(1.0 / (0.5 * 5.0));
        let out = s.run(&steady, &mut [], RunOptions::default()).unwrap();
        assert!(l2_norm(&out.theta.sub(&steady).unwrap()) < 1e-14);
        assert!(l2_norm(&s.rhs(&steady).unwrap()) < 1e-15);
    }
}
