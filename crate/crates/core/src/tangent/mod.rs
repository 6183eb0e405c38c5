//! Linearized dynamics: tangent propagation, Lyapunov spectra and the
//! finite-difference consistency check of the discrete flow derivative.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constitutive::{MultiplierSpec, SymbolTable, DIVERGENCE_FREE_TOL};
use crate::error::{Error, Result};
use crate::spectral::field::same_grid;
use crate::spectral::generate::{random_band, ModeFilter};
use crate::spectral::{h1_inner, l2_inner, Complex64, SpectralField};
use crate::timestepper::{
    linear_response, physical_stage, RunOptions, SimulationState, Solver, SolverConfig,
};

/// Normalizers below this are treated as rank deficiency.
pub const DEGENERATE_NORM: f64 = 1e-300;
pub const DEFAULT_RENORM_INTERVAL: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerProduct {
    /// `Σ |k|² f̂ conj(ĝ)`.
    #[default]
    H1,
    L2,
}

impl InnerProduct {
    pub fn inner(self, f: &SpectralField, g: &SpectralField) -> Result<f64> {
        match self {
            InnerProduct::H1 => h1_inner(f, g),
            InnerProduct::L2 => l2_inner(f, g),
        }
    }

    pub fn norm(self, f: &SpectralField) -> Result<f64> {
        Ok(self.inner(f, f)?.max(0.0).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TangentBundle {
    pub base: SimulationState,
    pub tangents: Vec<SpectralField>,
    pub inner_product: InnerProduct,
}

impl TangentBundle {
    pub fn new(base: SimulationState, tangents: Vec<SpectralField>, inner_product: InnerProduct) -> Result<Self> {
        for t in &tangents {
            same_grid(base.theta.grid(), t.grid())?;
            t.check_invariants()?;
        }
        Ok(Self {
            base,
            tangents,
            inner_product,
        })
    }
}

/// `A_θψ = -κΛ^γψ - u[θ]·∇ψ - u[ψ]·∇θ` with the solver's dealiasing.
pub fn linearized_rhs(
    theta: &SpectralField,
    psi: &SpectralField,
    config: &SolverConfig,
    table: &SymbolTable,
) -> Result<SpectralField> {
    let grid = table.grid();
    same_grid(grid, theta.grid())?;
    same_grid(grid, psi.grid())?;
    let div = table.audit().div_max;
    if div >= DIVERGENCE_FREE_TOL {
        return Err(Error::ContractViolation(format!(
            "drift symbol is not divergence-free (|k·M| = {div:e})"
        )));
    }
    let mask = config.dealias.mask(grid);
    let base = physical_stage(table, &mask, theta.coeffs().to_vec());
    let p = physical_stage(table, &mask, psi.coeffs().to_vec());
    let mut out = linear_response(grid, &mask, &base, &p);
    let t = grid.modes();
    for ((o, c), &kn) in out.iter_mut().zip(psi.coeffs()).zip(&t.norm) {
        *o -= c * (config.kappa * kn.powf(config.gamma));
    }
    Ok(SpectralField::from_raw(grid, out))
}

/// Advances the base by one solver step and each tangent by the exact
/// derivative of that step.
pub fn tangent_step(bundle: &TangentBundle, solver: &Solver) -> Result<TangentBundle> {
    let h = solver.nominal_dt(&bundle.base)?;
    tangent_step_with(bundle, solver, h)
}

pub fn tangent_step_with(bundle: &TangentBundle, solver: &Solver, h: f64) -> Result<TangentBundle> {
    let (base, trace) = solver.step_traced(&bundle.base, h)?;
    let grid = solver.grid();
    let tangents: Vec<Vec<Complex64>> = bundle
        .tangents
        .par_iter()
        .map(|psi| solver.tangent_step(&trace, h, psi.coeffs()))
        .collect();
    let table = grid.modes();
    let mut out = Vec::with_capacity(tangents.len());
    for (i, coeffs) in tangents.into_iter().enumerate() {
        if let Some(idx) = coeffs.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::BlowUp {
                t: base.t,
                shell: table.norm[idx].floor() as usize,
                reason: format!("non-finite tangent {i}"),
            });
        }
        out.push(SpectralField::from_raw(grid, coeffs));
    }
    Ok(TangentBundle {
        base,
        tangents: out,
        inner_product: bundle.inner_product,
    })
}

/// Modified Gram–Schmidt in the bundle's inner product. Returns the log of
/// each normalizer.
pub fn reorthonormalize(bundle: &TangentBundle) -> Result<(TangentBundle, Vec<f64>)> {
    if bundle.tangents.is_empty() {
        return Err(Error::Precondition("reorthonormalize needs at least one tangent".into()));
    }
    let ip = bundle.inner_product;
    let mut basis: Vec<SpectralField> = Vec::with_capacity(bundle.tangents.len());
    let mut increments = Vec::with_capacity(bundle.tangents.len());
    for (index, v) in bundle.tangents.iter().enumerate() {
        let mut w = v.clone();
        for q in &basis {
            let c = ip.inner(&w, q)?;
            w = w.lin_comb(1.0, q, -c)?;
        }
        let norm = ip.norm(&w)?;
        if !(norm >= DEGENERATE_NORM) {
            return Err(Error::DegenerateTangent { index, value: norm });
        }
        increments.push(norm.ln());
        basis.push(w.scaled(1.0 / norm));
    }
    Ok((
        TangentBundle {
            base: bundle.base.clone(),
            tangents: basis,
            inner_product: ip,
        },
        increments,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovPlan {
    pub n: usize,
    pub renorm_interval: f64,
    /// Averaging window after the transient.
    pub total_time: f64,
    /// Base and tangents evolve this long before increments are accumulated.
    pub transient: f64,
    pub inner_product: InnerProduct,
    pub seed: u64,
}

impl LyapunovPlan {
    pub fn new(n: usize, total_time: f64) -> Self {
        Self {
            n,
            renorm_interval: DEFAULT_RENORM_INTERVAL,
            total_time,
            transient: 0.0,
            inner_product: InnerProduct::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovResult {
    /// Sorted descending.
    pub exponents: Vec<f64>,
    pub cumulative: Vec<f64>,
    /// Smallest `n` with `Σ_{j<=n} λ_j < 0`.
    pub n_star: Option<usize>,
    pub ky_dimension: f64,
    pub renorm_interval: f64,
    pub total_time: f64,
}

/// Lyapunov spectrum from QR increments of `n` tangents. The base is
/// advanced from `theta0` through the transient first.
pub fn lyapunov_run(solver: &Solver, theta0: &SpectralField, plan: &LyapunovPlan) -> Result<LyapunovResult> {
    if plan.n == 0 {
        return Err(Error::Precondition("lyapunov_run needs n >= 1".into()));
    }
    if !(plan.renorm_interval > 0.0) || !(plan.total_time >= plan.renorm_interval) || !(plan.transient >= 0.0) {
        return Err(Error::Precondition(format!(
            "need renorm_interval > 0, total_time >= renorm_interval and transient >= 0; got {}, {}, {}",
            plan.renorm_interval, plan.total_time, plan.transient
        )));
    }
    let grid = solver.grid();
    let filter = ModeFilter {
        zero_vertical_mean: matches!(solver.config().drift, MultiplierSpec::Mg { .. }),
    };
    let kmax = grid.max_wavenumber_norm();
    let tangents = (0..plan.n)
        .map(|i| random_band(grid, 0.0, kmax, 1.0, plan.seed.wrapping_add(i as u64), filter))
        .collect::<Result<Vec<_>>>()?;
    let base = SimulationState::initial(theta0.clone());
    solver.validate_initial(&base)?;
    let bundle = TangentBundle::new(base, tangents, plan.inner_product)?;
    let (mut bundle, _) = reorthonormalize(&bundle)?;

    let mut sums = vec![0.0; plan.n];
    let t_start = plan.transient;
    let t_end = plan.transient + plan.total_time;
    let dt_r = plan.renorm_interval;
    // Renormalization times: multiples of the interval during the transient,
    // the transient end itself, then every interval after it.
    let next_boundary = |t: f64| -> f64 {
        let b = if t < t_start {
            (((t / dt_r) + 1e-9).floor() + 1.0) * dt_r
        } else {
            t_start + ((((t - t_start) / dt_r) + 1e-9).floor() + 1.0) * dt_r
        };
        let b = if t < t_start { b.min(t_start) } else { b };
        b.min(t_end)
    };
    let mut target = next_boundary(0.0);
    let mut last_boundary = 0.0;
    while bundle.base.t < t_end {
        let h_nominal = solver.nominal_dt(&bundle.base)?;
        let remaining = target - bundle.base.t;
        let (h, land) = if remaining <= h_nominal * (1.0 + 1e-9) {
            (remaining, true)
        } else {
            (h_nominal, false)
        };
        bundle = tangent_step_with(&bundle, solver, h)?;
        if land {
            bundle.base.t = target;
            let (b, inc) = reorthonormalize(&bundle)?;
            bundle = b;
            if last_boundary >= t_start - 1e-12 * dt_r {
                for (s, v) in sums.iter_mut().zip(&inc) {
                    *s += v;
                }
            }
            last_boundary = target;
            target = next_boundary(target);
        }
    }
    let mut exponents: Vec<f64> = sums.iter().map(|s| s / plan.total_time).collect();
    exponents.sort_by(|a, b| b.total_cmp(a));
    let (cumulative, n_star, ky_dimension) = spectrum_summary(&exponents);
    Ok(LyapunovResult {
        exponents,
        cumulative,
        n_star,
        ky_dimension,
        renorm_interval: plan.renorm_interval,
        total_time: plan.total_time,
    })
}

/// Cumulative sums, `n_star`, and the Kaplan–Yorke dimension of a
/// descending spectrum.
pub fn spectrum_summary(exponents: &[f64]) -> (Vec<f64>, Option<usize>, f64) {
    let mut cumulative = Vec::with_capacity(exponents.len());
    let mut acc = 0.0;
    for &l in exponents {
        acc += l;
        cumulative.push(acc);
    }
    let n_star = cumulative.iter().position(|&c| c < 0.0).map(|i| i + 1);
    let ky = match exponents.first() {
        None => 0.0,
        Some(&l1) if l1 < 0.0 => 0.0,
        Some(_) => {
            let j = cumulative.iter().rposition(|&c| c >= 0.0).map_or(0, |i| i + 1);
            if j >= exponents.len() {
                j as f64
            } else {
                j as f64 + cumulative[j - 1] / exponents[j].abs()
            }
        }
    };
    (cumulative, n_star, ky)
}

/// `‖(π(t)(θ0 + εψ0) - π(t)θ0)/ε - Dπ(t)θ0[ψ0]‖_{H¹}` on the solver's step schedule.
pub fn fd_consistency(
    solver: &Solver,
    theta0: &SpectralField,
    psi0: &SpectralField,
    eps: f64,
    t: f64,
) -> Result<f64> {
    if !(eps > 1e-8 && eps < 1e-2) {
        return Err(Error::Precondition(format!("eps must lie in (1e-8, 1e-2), got {eps}")));
    }
    let h1 = InnerProduct::H1.norm(psi0)?;
    if (h1 - 1.0).abs() > 1e-10 {
        return Err(Error::Precondition(format!("psi0 must have unit H1 norm, got {h1}")));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("t must be >= 0, got {t}")));
    }
    let base = SimulationState::initial(theta0.clone());
    solver.validate_initial(&base)?;
    let mut bundle = TangentBundle::new(base, vec![psi0.clone()], InnerProduct::H1)?;
    let mut pert = SimulationState::initial(theta0.lin_comb(1.0, psi0, eps)?);
    while bundle.base.t < t {
        let h_nominal = solver.nominal_dt(&bundle.base)?;
        let remaining = t - bundle.base.t;
        let (h, last) = if remaining <= h_nominal * (1.0 + 1e-9) {
            (remaining, true)
        } else {
            (h_nominal, false)
        };
        bundle = tangent_step_with(&bundle, solver, h)?;
        pert = solver.step_with(&pert, h)?;
        if last {
            bundle.base.t = t;
        }
    }
    let fd = pert.theta.lin_comb(1.0 / eps, &bundle.base.theta, -1.0 / eps)?;
    InnerProduct::H1.norm(&fd.sub(&bundle.tangents[0])?)
}

/// Runs the base flow only (no tangents) for `t`, for transients shared by callers.
pub fn advance_base(solver: &Solver, theta0: &SpectralField, t: f64) -> Result<SimulationState> {
    solver.advance_to(
        SimulationState::initial(theta0.clone()),
        t,
        &mut [],
        RunOptions {
            observe_every: 0,
            observe_initial: false,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::build_symbol_table;
    use crate::spectral::generate::single_mode;
    use crate::spectral::{l2_norm, GridSpec};

    fn sqg(kappa: f64, gamma: f64, dt: f64) -> SolverConfig {
        SolverConfig::new(MultiplierSpec::Sqg, kappa, gamma).with_dt(dt)
    }

    #[test]
    fn linearized_rhs_at_rest_is_dissipation() {
        let g = GridSpec::new(2, 16).unwrap();
        let cfg = sqg(0.1, 2.0, 0.01);
        let table = build_symbol_table(&cfg.drift, g).unwrap();
        let psi = single_mode(g, [1, 0, 0], 1.0).unwrap();
        let out = linearized_rhs(&SpectralField::zeros(g), &psi, &cfg, &table).unwrap();
        assert!(l2_norm(&out.sub(&psi.scaled(-0.1)).unwrap()) < 1e-16);
        let theta = random_band(g, 1.0, 4.0, 1.0, 1, ModeFilter::default()).unwrap();
        let zero = linearized_rhs(&theta, &SpectralField::zeros(g), &cfg, &table).unwrap();
        assert!(zero.is_zero());
        let other = GridSpec::new(2, 8).unwrap();
        assert!(linearized_rhs(&SpectralField::zeros(other), &psi, &cfg, &table).is_err());
    }

    #[test]
    fn tangent_at_rest_decays_exactly() {
        let g = GridSpec::new(2, 16).unwrap();
        let solver = Solver::new(sqg(0.2, 1.0, 0.1), g, SpectralField::zeros(g)).unwrap();
        let psi = single_mode(g, [3, 4, 0], 1.0).unwrap();
        let b = TangentBundle::new(
            SimulationState::initial(SpectralField::zeros(g)),
            vec![psi.clone()],
            InnerProduct::H1,
        )
        .unwrap();
        let out = tangent_step(&b, &solver).unwrap();
        let expected = psi.scaled((-0.2f64 * 5.0 * 0.1).exp());
        assert!(l2_norm(&out.tangents[0].sub(&expected).unwrap()) < 1e-15);
        let plain = TangentBundle::new(SimulationState::initial(psi.clone()), vec![], InnerProduct::H1).unwrap();
        let stepped = tangent_step(&plain, &solver).unwrap();
        assert_eq!(stepped.base, solver.step(&plain.base).unwrap());
    }

    #[test]
    fn gram_schmidt_increments() {
        let g = GridSpec::new(2, 16).unwrap();
        let e = single_mode(g, [1, 0, 0], 2f64.sqrt()).unwrap();
        let base = SimulationState::initial(SpectralField::zeros(g));
        let b = TangentBundle::new(base.clone(), vec![e.scaled(std::f64::consts::E)], InnerProduct::H1).unwrap();
        let (_, inc) = reorthonormalize(&b).unwrap();
        assert!((inc[0] - 1.0).abs() < 1e-14);
        let b = TangentBundle::new(base.clone(), vec![e.clone()], InnerProduct::H1).unwrap();
        assert!(reorthonormalize(&b).unwrap().1[0].abs() < 1e-15);
        let b = TangentBundle::new(base.clone(), vec![e.clone(), SpectralField::zeros(g)], InnerProduct::L2).unwrap();
        assert!(matches!(reorthonormalize(&b), Err(Error::DegenerateTangent { index: 1, .. })));
        let b = TangentBundle::new(base, vec![], InnerProduct::L2).unwrap();
        assert!(reorthonormalize(&b).is_err());
    }

    #[test]
    fn spectrum_summary_cases() {
        let (c, n, ky) = spectrum_summary(&[0.5, -0.2, -1.0]);
        assert_eq!(c, vec![0.5, 0.3, -0.7]);
        assert_eq!(n, Some(3));
        assert!((ky - (2.0 + 0.3)).abs() < 1e-15);
        let (_, n, ky) = spectrum_summary(&[-1.0, -2.0]);
        assert_eq!((n, ky), (Some(1), 0.0));
        let (_, n, ky) = spectrum_summary(&[1.0, 0.5]);
        assert_eq!((n, ky), (None, 2.0));
    }

    #[test]
    fn fd_linear_regime_is_exact() {
        let g = GridSpec::new(2, 16).unwrap();
        let solver = Solver::new(sqg(0.1, 1.0, 0.05), g, SpectralField::zeros(g)).unwrap();
        let psi = random_band(g, 1.0, 1.0, 1.0, 2, ModeFilter::default()).unwrap();
        let psi = psi.scaled(1.0 / InnerProduct::H1.norm(&psi).unwrap());
        // A single |k| shell is an exact invariant set of the SQG nonlinearity.
        let err = fd_consistency(&solver, &SpectralField::zeros(g), &psi, 1e-3, 0.5).unwrap();
        assert!(err < 1e-9, "{err}");
        assert!(fd_consistency(&solver, &psi, &psi, 1e-3, 0.0).unwrap() < 1e-11);
        assert!(fd_consistency(&solver, &psi, &psi, 0.1, 0.5).is_err());
        assert!(fd_consistency(&solver, &psi, &psi.scaled(2.0), 1e-3, 0.5).is_err());
    }
}
