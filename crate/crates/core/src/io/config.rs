//! Flat `section.key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Recognised keys and their
//! defaults:
//!
//! | key | default |
//! |-----|---------|
//! | `grid.dim` | 2 (3 for `mg`) |
//! | `grid.n` | 64 |
//! | `drift.kind` | required: `sqg`, `mg`, `custom` |
//! | `drift.nu` | 0 |
//! | `drift.table` | required for `custom` |
//! | `drift.strict` | `true` |
//! | `solver.kappa` | required |
//! | `solver.gamma` | 1 |
//! | `solver.dt` | `auto` |
//! | `solver.t_end` | 1 |
//! | `solver.cfl_safety` | 0.5 |
//! | `solver.integrator` | `etdrk2` (`ifrk4`) |
//! | `solver.dealias` | `two_thirds` (`none`) |
//! | `solver.dt_max` | 0.05 |
//! | `init.theta0` | required, see [`FieldSpec`] |
//! | `init.forcing` | `zero` |
//! | `output.every` | 1 |
//! | `diag.sobolev` | `1` (space-separated list) |
//! | `diag.gevrey` | unset, else `r tau s` |
//! | `diag.c0` | 1 |
//! | `sweep.kappa`, `sweep.nu` | empty lists |
//! | `sweep.times` | `solver.t_end` |
//! | `sweep.norms` | `L2` (`L2`, `H<s>`, `gevrey:<r>:<tau>:<s>`) |
//! | `lyapunov.n` | 4 |
//! | `lyapunov.renorm_interval` | 0.5 |
//! | `lyapunov.total_time` | 10 |
//! | `lyapunov.transient` | 0 |
//! | `lyapunov.inner` | `h1` (`l2`) |
//! | `lyapunov.seed` | 0 |
//! | `attractor.transient` | 10 |
//! | `attractor.cadence` | 1 |
//! | `attractor.count` | 10 |
//! | `attractor.ensemble` | 1 |
//! | `attractor.reference_nu` | 0 |
//! | `attractor.norm` | `l2` (`h1`) |
//! | `gevrey.sample_dt` | 0.1 |
//! | `gevrey.rate` | 0 |
//! | `gevrey.tau_start` | unset (estimated) |
//! | `gevrey.r` | 0 |
//! | `gevrey.s` | 1 |
//! | `audit.nu` | `0 0.01 0.5 1` |

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::constitutive::{load_custom_symbol, MultiplierSpec};
use crate::diagnostics::{GevreyRequest, NormRequests};
use crate::error::{Error, Result};
use crate::experiments::{AttractorPlan, CloudNorm, GevreyTrackPlan, NormKind};
use crate::spectral::generate::{analytic_decay, random_band, single_mode, ModeFilter};
use crate::spectral::{Complex64, GridSpec, SpectralField, Wavevector};
use crate::tangent::{InnerProduct, LyapunovPlan};
use crate::timestepper::{Integrator, SimulationState, SolverConfig, Strictness, TimeStep, DT_MAX};
use crate::spectral::DealiasRule;

const KEYS: &[&str] = &[
    "grid.dim",
    "grid.n",
    "drift.kind",
    "drift.nu",
    "drift.table",
    "drift.strict",
    "solver.kappa",
    "solver.gamma",
    "solver.dt",
    "solver.t_end",
    "solver.cfl_safety",
    "solver.integrator",
    "solver.dealias",
    "solver.dt_max",
    "init.theta0",
    "init.forcing",
    "output.every",
    "diag.sobolev",
    "diag.gevrey",
    "diag.c0",
    "sweep.kappa",
    "sweep.nu",
    "sweep.times",
    "sweep.norms",
    "lyapunov.n",
    "lyapunov.renorm_interval",
    "lyapunov.total_time",
    "lyapunov.transient",
    "lyapunov.inner",
    "lyapunov.seed",
    "attractor.transient",
    "attractor.cadence",
    "attractor.count",
    "attractor.ensemble",
    "attractor.reference_nu",
    "attractor.norm",
    "gevrey.sample_dt",
    "gevrey.rate",
    "gevrey.tau_start",
    "gevrey.r",
    "gevrey.s",
    "audit.nu",
];

/// Named field generators.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldSpec {
    Zero,
    /// `single_mode k1,k2[,k3] a`: `a·cos(k·x)`.
    SingleMode { k: Wavevector, amplitude: f64 },
    /// `modes k=a[,b] ...`: `Σ a·cos(k·x) + b·sin(k·x)`.
    Modes(Vec<(Wavevector, f64, f64)>),
    /// `random_band kmin kmax amplitude seed` (amplitude is the `L²` norm).
    RandomBand { kmin: f64, kmax: f64, amplitude: f64, seed: u64 },
    /// `analytic_decay tau0 amplitude seed`.
    AnalyticDecay { tau0: f64, amplitude: f64, seed: u64 },
    /// `from_checkpoint path`.
    FromCheckpoint(PathBuf),
}

impl FieldSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let toks: Vec<&str> = text.split_whitespace().collect();
        let bad = |msg: &str| Error::Config(format!("field spec '{text}': {msg}"));
        let num = |s: &str| -> Result<f64> { s.parse().map_err(|_| bad(&format!("bad number '{s}'"))) };
        let int = |s: &str| -> Result<u64> { s.parse().map_err(|_| bad(&format!("bad integer '{s}'"))) };
        let arity = |n: usize| -> Result<()> {
            if toks.len() == n + 1 {
                Ok(())
            } else {
                Err(bad(&format!("expected {n} arguments, found {}", toks.len() - 1)))
            }
        };
        match toks.first().copied() {
            Some("zero") => {
                arity(0)?;
                Ok(FieldSpec::Zero)
            }
            Some("single_mode") => {
                arity(2)?;
                Ok(FieldSpec::SingleMode {
                    k: parse_wavevector(toks[1]).map_err(|e| bad(&e))?,
                    amplitude: num(toks[2])?,
                })
            }
            Some("modes") => {
                if toks.len() < 2 {
                    return Err(bad("expected at least one k=a term"));
                }
                let mut out = Vec::new();
                for term in &toks[1..] {
                    let (k, v) = term.split_once('=').ok_or_else(|| bad("terms look like k1,k2=a[,b]"))?;
                    let k = parse_wavevector(k).map_err(|e| bad(&e))?;
                    let mut parts = v.split(',');
                    let a = num(parts.next().unwrap_or(""))?;
                    let b = parts.next().map(num).transpose()?.unwrap_or(0.0);
                    if parts.next().is_some() {
                        return Err(bad("too many coefficients in a term"));
                    }
                    out.push((k, a, b));
                }
                Ok(FieldSpec::Modes(out))
            }
            Some("random_band") => {
                arity(4)?;
                Ok(FieldSpec::RandomBand {
                    kmin: num(toks[1])?,
                    kmax: num(toks[2])?,
                    amplitude: num(toks[3])?,
                    seed: int(toks[4])?,
                })
            }
            Some("analytic_decay") => {
                arity(3)?;
                Ok(FieldSpec::AnalyticDecay {
                    tau0: num(toks[1])?,
                    amplitude: num(toks[2])?,
                    seed: int(toks[3])?,
                })
            }
            Some("from_checkpoint") => {
                arity(1)?;
                Ok(FieldSpec::FromCheckpoint(PathBuf::from(toks[1])))
            }
            Some(other) => Err(bad(&format!("unknown generator '{other}'"))),
            None => Err(bad("empty")),
        }
    }

    /// Rough (non-analytic) data classes. Random bands model generic rough
    /// data and checkpoints carry no regularity guarantee.
    pub fn is_analytic(&self) -> bool {
        !matches!(self, FieldSpec::RandomBand { .. } | FieldSpec::FromCheckpoint(_))
    }

    /// Shifts every generator seed by `offset`.
    pub fn with_seed_offset(&self, offset: u64) -> Self {
        match self.clone() {
            FieldSpec::RandomBand { kmin, kmax, amplitude, seed } => FieldSpec::RandomBand {
                kmin,
                kmax,
                amplitude,
                seed: seed.wrapping_add(offset),
            },
            FieldSpec::AnalyticDecay { tau0, amplitude, seed } => FieldSpec::AnalyticDecay {
                tau0,
                amplitude,
                seed: seed.wrapping_add(offset),
            },
            other => other,
        }
    }

    /// Checks mean-zero and (for MG) zero vertical mean without building the field.
    fn check_modes(&self, grid: GridSpec, mg: bool, what: &str) -> Result<()> {
        let ks: Vec<Wavevector> = match self {
            FieldSpec::SingleMode { k, .. } => vec![*k],
            FieldSpec::Modes(terms) => terms.iter().map(|t| t.0).collect(),
            _ => return Ok(()),
        };
        for k in ks {
            if k[grid.dim()..].iter().any(|&c| c != 0) {
                return Err(Error::Config(format!("{what}: wavevector {k:?} has too many components")));
            }
            if k == [0, 0, 0] {
                return Err(Error::Precondition(format!(
                    "{what} has a nonzero mean coefficient (k = 0); data and forcing must be mean-zero"
                )));
            }
            if mg && k[2] == 0 {
                return Err(Error::Precondition(format!(
                    "{what} excites k = {k:?} on the plane k3 = 0; MG data must have zero vertical mean"
                )));
            }
        }
        Ok(())
    }

    pub fn realize(&self, grid: GridSpec, mg: bool) -> Result<SpectralField> {
        Ok(self.realize_state(grid, mg)?.theta)
    }

    /// Like [`FieldSpec::realize`], but keeps the time and step count of a
    /// checkpoint. Checkpointed states are continuations, so the MG
    /// vertical-mean condition is not imposed on them.
    pub fn realize_state(&self, grid: GridSpec, mg: bool) -> Result<SimulationState> {
        let filter = ModeFilter { zero_vertical_mean: mg };
        let field = match self {
            FieldSpec::Zero => SpectralField::zeros(grid),
            FieldSpec::SingleMode { k, amplitude } => {
                self.check_modes(grid, mg, "field")?;
                single_mode(grid, *k, *amplitude)?
            }
            FieldSpec::Modes(terms) => {
                self.check_modes(grid, mg, "field")?;
                let modes: Vec<(Wavevector, Complex64)> = terms
                    .iter()
                    .map(|&(k, a, b)| (k, Complex64::new(0.5 * a, -0.5 * b)))
                    .collect();
                SpectralField::from_modes(grid, &modes)?
            }
            FieldSpec::RandomBand { kmin, kmax, amplitude, seed } => {
                random_band(grid, *kmin, *kmax, *amplitude, *seed, filter)?
            }
            FieldSpec::AnalyticDecay { tau0, amplitude, seed } => {
                analytic_decay(grid, *tau0, *amplitude, *seed, filter)?
            }
            FieldSpec::FromCheckpoint(path) => {
                let (header, state) = super::checkpoint::load_checkpoint(path)?;
                if header.grid()? != grid {
                    return Err(Error::Shape(format!(
                        "checkpoint {} holds a {}^{} field, config asks for {}^{}",
                        path.display(),
                        header.n,
                        header.d,
                        grid.n(),
                        grid.dim()
                    )));
                }
                return Ok(state);
            }
        };
        if mg && !field.has_zero_vertical_mean() {
            return Err(Error::Precondition(
                "MG data must have zero vertical mean (vanish on k3 = 0)".into(),
            ));
        }
        Ok(SimulationState::initial(field))
    }
}

fn parse_wavevector(s: &str) -> std::result::Result<Wavevector, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.is_empty() || parts.len() > 3 {
        return Err(format!("wavevector '{s}' needs 1 to 3 components"));
    }
    let mut k = [0i64; 3];
    for (j, p) in parts.iter().enumerate() {
        k[j] = p.trim().parse().map_err(|_| format!("bad wavevector component '{p}'"))?;
    }
    Ok(k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub kappa: Vec<f64>,
    pub nu: Vec<f64>,
    pub times: Vec<f64>,
    pub norms: Vec<NormKind>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub solver: SolverConfig,
    pub theta0: FieldSpec,
    pub forcing: FieldSpec,
    pub observe_every: u64,
    pub norms: NormRequests,
    pub c0_hat: f64,
    pub sweep: SweepSettings,
    pub lyapunov: LyapunovPlan,
    pub attractor: AttractorPlan,
    pub ensemble: usize,
    pub reference_nu: f64,
    pub cloud_norm: CloudNorm,
    pub gevrey: GevreyTrackPlan,
    pub audit_nu: Vec<f64>,
    /// Every key with its effective value (defaults filled in).
    pub echo: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn is_mg(&self) -> bool {
        matches!(self.solver.drift, MultiplierSpec::Mg { .. })
    }

    pub fn initial_field(&self) -> Result<SpectralField> {
        self.theta0.realize(self.grid, self.is_mg())
    }

    pub fn initial_state(&self) -> Result<SimulationState> {
        self.theta0.realize_state(self.grid, self.is_mg())
    }

    pub fn forcing_field(&self) -> Result<SpectralField> {
        self.forcing.realize(self.grid, self.is_mg())
    }

    /// Applies a global seed offset to every generator and the tangent seed.
    pub fn with_seed_offset(mut self, offset: u64) -> Self {
        self.theta0 = self.theta0.with_seed_offset(offset);
        self.forcing = self.forcing.with_seed_offset(offset);
        self.lyapunov.seed = self.lyapunov.seed.wrapping_add(offset);
        self.echo.insert("seed_offset".into(), offset.to_string());
        self
    }
}

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn raw(&self, key: &str) -> Option<(usize, &str)> {
        self.map.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn num(&self, key: &str, default: Option<f64>) -> Result<f64> {
        match self.raw(key) {
            Some((line, v)) => v.parse().map_err(|_| {
                Error::Config(format!("line {line}: {key} expects a number, got '{v}'"))
            }),
            None => default.ok_or_else(|| Error::Config(format!("missing required key {key}"))),
        }
    }

    fn int(&self, key: &str, default: u64) -> Result<u64> {
        match self.raw(key) {
            Some((line, v)) => v.parse().map_err(|_| {
                Error::Config(format!("line {line}: {key} expects a non-negative integer, got '{v}'"))
            }),
            None => Ok(default),
        }
    }

    fn list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.raw(key) {
            Some((line, v)) => v
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse().map_err(|_| {
                        Error::Config(format!("line {line}: {key} expects numbers, got '{s}'"))
                    })
                })
                .collect(),
            None => Ok(default.to_vec()),
        }
    }

    fn word<'a>(&'a self, key: &str, default: &'a str) -> (Option<usize>, &'a str) {
        match self.raw(key) {
            Some((line, v)) => (Some(line), v),
            None => (None, default),
        }
    }
}

fn out_of_range(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{key} out of range: {msg}"))
}

/// Parses a configuration document. Relative `drift.table` and
/// `from_checkpoint` paths resolve against `base_dir` when given.
pub fn parse_config(text: &str, base_dir: Option<&Path>) -> Result<RunConfig> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {lineno}: expected 'key = value'")))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(Error::Config(format!("line {lineno}: unknown key '{k}'")));
        }
        if map.insert(k.to_string(), (lineno, v.to_string())).is_some() {
            return Err(Error::Config(format!("line {lineno}: duplicate key '{k}'")));
        }
    }
    let e = Entries { map };
    let resolve = |p: &str| -> PathBuf {
        let p = PathBuf::from(p);
        match base_dir {
            Some(b) if p.is_relative() => b.join(p),
            _ => p,
        }
    };

    let kind = e
        .raw("drift.kind")
        .map(|(_, v)| v.to_ascii_lowercase())
        .ok_or_else(|| Error::Config("missing required key drift.kind".into()))?;
    let nu = e.num("drift.nu", Some(0.0))?;
    if !(nu >= 0.0) {
        return Err(out_of_range("drift.nu", format!("must be >= 0, got {nu}")));
    }
    let default_dim = if kind == "mg" { 3 } else { 2 };
    let dim = e.int("grid.dim", default_dim)? as usize;
    let n = e.int("grid.n", 64)? as usize;
    let grid = GridSpec::new(dim, n).map_err(|err| out_of_range("grid", err))?;
    let drift = match kind.as_str() {
        "sqg" => MultiplierSpec::Sqg,
        "mg" => MultiplierSpec::Mg { nu },
        "custom" => {
            let (_, path) = e
                .raw("drift.table")
                .ok_or_else(|| Error::Config("drift.kind = custom needs drift.table".into()))?;
            MultiplierSpec::Custom(load_custom_symbol(&resolve(path), dim)?)
        }
        other => return Err(Error::Config(format!("drift.kind must be sqg, mg or custom, got '{other}'"))),
    };
    if drift.dim() != dim {
        return Err(out_of_range(
            "grid.dim",
            format!("{} drift needs d = {}, got {dim}", drift.kind_name(), drift.dim()),
        ));
    }

    let kappa = e.num("solver.kappa", None)?;
    let gamma = e.num("solver.gamma", Some(1.0))?;
    let mut solver = SolverConfig::new(drift, kappa, gamma);
    solver.t_end = e.num("solver.t_end", Some(1.0))?;
    solver.cfl_safety = e.num("solver.cfl_safety", Some(0.5))?;
    solver.dt_max = e.num("solver.dt_max", Some(DT_MAX))?;
    solver.dt = match e.word("solver.dt", "auto") {
        (_, "auto") => TimeStep::Auto,
        _ => TimeStep::Fixed(e.num("solver.dt", None)?),
    };
    solver.integrator = match e.word("solver.integrator", "etdrk2") {
        (_, "etdrk2") => Integrator::Etdrk2,
        (_, "ifrk4") => Integrator::IfRk4,
        (l, other) => {
            return Err(Error::Config(format!(
                "line {}: solver.integrator must be etdrk2 or ifrk4, got '{other}'",
                l.unwrap_or(0)
            )))
        }
    };
    solver.dealias = match e.word("solver.dealias", "two_thirds") {
        (_, "two_thirds") => DealiasRule::TwoThirds,
        (_, "none") => DealiasRule::None,
        (l, other) => {
            return Err(Error::Config(format!(
                "line {}: solver.dealias must be two_thirds or none, got '{other}'",
                l.unwrap_or(0)
            )))
        }
    };
    solver.custom_strictness = match e.word("drift.strict", "true") {
        (_, "true") => Strictness::Reject,
        (_, "false") => Strictness::Warn,
        (l, other) => {
            return Err(Error::Config(format!(
                "line {}: drift.strict must be true or false, got '{other}'",
                l.unwrap_or(0)
            )))
        }
    };
    solver
        .validate()
        .map_err(|err| Error::Config(format!("solver settings out of range: {err}")))?;

    let theta0 = FieldSpec::parse(
        e.raw("init.theta0")
            .map(|(_, v)| v)
            .ok_or_else(|| Error::Config("missing required key init.theta0".into()))?,
    )?;
    let forcing = FieldSpec::parse(e.word("init.forcing", "zero").1)?;
    let fix_path = |f: FieldSpec| match f {
        FieldSpec::FromCheckpoint(p) => FieldSpec::FromCheckpoint(resolve(&p.to_string_lossy())),
        other => other,
    };
    let (theta0, forcing) = (fix_path(theta0), fix_path(forcing));
    let mg = matches!(solver.drift, MultiplierSpec::Mg { .. });
    theta0.check_modes(grid, mg, "init.theta0")?;
    forcing.check_modes(grid, mg, "init.forcing")?;
    if mg && nu == 0.0 && kappa == 0.0 && !theta0.is_analytic() {
        return Err(Error::IllPosed(
            "MG with nu = 0 and kappa = 0 is ill-posed for non-analytic data; \
             use analytic initial data (single_mode, modes, analytic_decay) or kappa > 0"
                .into(),
        ));
    }

    let sobolev = e.list("diag.sobolev", &[1.0])?;
    if let Some(s) = sobolev.iter().find(|s| !(**s >= 0.0)) {
        return Err(out_of_range("diag.sobolev", format!("indices must be >= 0, got {s}")));
    }
    let gevrey = match e.raw("diag.gevrey") {
        None => None,
        Some(_) => {
            let v = e.list("diag.gevrey", &[])?;
            if v.len() != 3 {
                return Err(Error::Config("diag.gevrey expects 'r tau s'".into()));
            }
            Some(GevreyRequest { r: v[0], tau: v[1], s: v[2] })
        }
    };
    let c0_hat = e.num("diag.c0", Some(1.0))?;
    if !(c0_hat > 0.0) {
        return Err(out_of_range("diag.c0", format!("must be > 0, got {c0_hat}")));
    }
    let observe_every = e.int("output.every", 1)?;

    let norms = match e.raw("sweep.norms") {
        None => vec![NormKind::L2],
        Some((line, v)) => v
            .split_whitespace()
            .map(|tok| parse_norm(tok).map_err(|m| Error::Config(format!("line {line}: {m}"))))
            .collect::<Result<Vec<_>>>()?,
    };
    let sweep = SweepSettings {
        kappa: e.list("sweep.kappa", &[])?,
        nu: e.list("sweep.nu", &[])?,
        times: e.list("sweep.times", &[solver.t_end])?,
        norms,
    };

    let mut lyapunov = LyapunovPlan::new(e.int("lyapunov.n", 4)? as usize, e.num("lyapunov.total_time", Some(10.0))?);
    lyapunov.renorm_interval = e.num("lyapunov.renorm_interval", Some(0.5))?;
    lyapunov.transient = e.num("lyapunov.transient", Some(0.0))?;
    lyapunov.seed = e.int("lyapunov.seed", 0)?;
    lyapunov.inner_product = match e.word("lyapunov.inner", "h1") {
        (_, "h1") => InnerProduct::H1,
        (_, "l2") => InnerProduct::L2,
        (_, other) => return Err(Error::Config(format!("lyapunov.inner must be h1 or l2, got '{other}'"))),
    };

    let attractor = AttractorPlan {
        transient: e.num("attractor.transient", Some(10.0))?,
        cadence: e.num("attractor.cadence", Some(1.0))?,
        count: e.int("attractor.count", 10)? as usize,
        c0_hat,
    };
    let ensemble = e.int("attractor.ensemble", 1)? as usize;
    let reference_nu = e.num("attractor.reference_nu", Some(0.0))?;
    let cloud_norm = match e.word("attractor.norm", "l2") {
        (_, "l2") => CloudNorm::L2,
        (_, "h1") => CloudNorm::H1,
        (_, other) => return Err(Error::Config(format!("attractor.norm must be l2 or h1, got '{other}'"))),
    };

    let mut gevrey_plan = GevreyTrackPlan::new(solver.t_end, e.num("gevrey.sample_dt", Some(0.1))?);
    gevrey_plan.rate = e.num("gevrey.rate", Some(0.0))?;
    gevrey_plan.tau_start = e.raw("gevrey.tau_start").map(|_| e.num("gevrey.tau_start", None)).transpose()?;
    gevrey_plan.r = e.num("gevrey.r", Some(0.0))?;
    gevrey_plan.s = e.num("gevrey.s", Some(1.0))?;

    let audit_nu = e.list("audit.nu", &[0.0, 0.01, 0.5, 1.0])?;

    let mut echo = BTreeMap::new();
    let fmt_list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    echo.insert("grid.dim".into(), dim.to_string());
    echo.insert("grid.n".into(), n.to_string());
    echo.insert("drift.kind".into(), kind.clone());
    echo.insert("drift.nu".into(), nu.to_string());
    if let Some((_, t)) = e.raw("drift.table") {
        echo.insert("drift.table".into(), t.to_string());
    }
    echo.insert("drift.strict".into(), (solver.custom_strictness == Strictness::Reject).to_string());
    echo.insert("solver.kappa".into(), kappa.to_string());
    echo.insert("solver.gamma".into(), gamma.to_string());
    echo.insert(
        "solver.dt".into(),
        match solver.dt {
            TimeStep::Auto => "auto".to_string(),
            TimeStep::Fixed(dt) => dt.to_string(),
        },
    );
    echo.insert("solver.t_end".into(), solver.t_end.to_string());
    echo.insert("solver.cfl_safety".into(), solver.cfl_safety.to_string());
    echo.insert("solver.dt_max".into(), solver.dt_max.to_string());
    echo.insert("solver.integrator".into(), e.word("solver.integrator", "etdrk2").1.to_string());
    echo.insert("solver.dealias".into(), e.word("solver.dealias", "two_thirds").1.to_string());
    echo.insert("init.theta0".into(), e.word("init.theta0", "").1.to_string());
    echo.insert("init.forcing".into(), e.word("init.forcing", "zero").1.to_string());
    echo.insert("output.every".into(), observe_every.to_string());
    echo.insert("diag.sobolev".into(), fmt_list(&sobolev));
    echo.insert("diag.c0".into(), c0_hat.to_string());
    for (k, (_, v)) in &e.map {
        echo.entry(k.clone()).or_insert_with(|| v.clone());
    }

    Ok(RunConfig {
        grid,
        solver,
        theta0,
        forcing,
        observe_every,
        norms: NormRequests { sobolev, gevrey },
        c0_hat,
        sweep,
        lyapunov,
        attractor,
        ensemble,
        reference_nu,
        cloud_norm,
        gevrey: gevrey_plan,
        audit_nu,
        echo,
    })
}

fn parse_norm(tok: &str) -> std::result::Result<NormKind, String> {
    if tok.eq_ignore_ascii_case("l2") {
        return Ok(NormKind::L2);
    }
    if let Some(s) = tok.strip_prefix('H').or_else(|| tok.strip_prefix('h')) {
        return s
            .parse()
            .map(NormKind::Hs)
            .map_err(|_| format!("bad Sobolev norm '{tok}'"));
    }
    if let Some(rest) = tok.strip_prefix("gevrey:") {
        let v: Vec<f64> = rest
            .split(':')
            .map(|p| p.parse().map_err(|_| format!("bad Gevrey norm '{tok}'")))
            .collect::<std::result::Result<_, _>>()?;
        if v.len() == 3 {
            return Ok(NormKind::Gevrey { r: v[0], tau: v[1], s: v[2] });
        }
    }
    Err(format!("unknown norm '{tok}' (use L2, H<s> or gevrey:<r>:<tau>:<s>)"))
}
