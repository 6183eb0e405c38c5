use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{error, info, warn};

use ascl::constitutive::verify_assumptions;
use ascl::diagnostics::{max_principle_check, EnergyLedger, Recorder, DEFAULT_C0};
use ascl::experiments::{
    gevrey_radius_track, kappa_sweep, nu_sweep_attractor, validate_parameter_list, SweepPlan,
};
use ascl::io::csv::{
    audit_table, diagnostics_table, gevrey_track_table, ledger_table, lyapunov_table, nu_sweep_table, sweep_table,
};
use ascl::io::{parse_config, save_checkpoint, Cell, RunConfig, RunManifest, Table};
use ascl::spectral::{linf_norm, SpectralField};
use ascl::tangent::lyapunov_run;
use ascl::timestepper::{Observer, RunOptions, SimulationState, Solver};
use ascl::Error;

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_VIOLATION: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "ascl", version, about = "Pseudospectral active scalar lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Added to every generator seed in the config.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write a checkpoint every this many steps (`run` only; 0 = final state only).
    #[arg(long, global = true, default_value_t = 0)]
    checkpoint_every: u64,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Integrate one trajectory and record diagnostics.
    Run { config: PathBuf },
    /// Vanishing-viscosity sweep over `sweep.kappa`.
    SweepKappa { config: PathBuf },
    /// Attractor semidistance sweep over `sweep.nu`.
    SweepNu { config: PathBuf },
    /// Lattice audit of the drift symbol.
    AuditSymbols { config: PathBuf },
    /// Lyapunov spectrum of the tangent dynamics.
    Lyapunov { config: PathBuf },
    /// Analyticity radius along a run.
    GevreyTrack { config: PathBuf },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Run { .. } => "run",
            Command::SweepKappa { .. } => "sweep-kappa",
            Command::SweepNu { .. } => "sweep-nu",
            Command::AuditSymbols { .. } => "audit-symbols",
            Command::Lyapunov { .. } => "lyapunov",
            Command::GevreyTrack { .. } => "gevrey-track",
        }
    }

    fn config(&self) -> &Path {
        match self {
            Command::Run { config }
            | Command::SweepKappa { config }
            | Command::SweepNu { config }
            | Command::AuditSymbols { config }
            | Command::Lyapunov { config }
            | Command::GevreyTrack { config } => config,
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_CONFIG
    }
}

/// Outcome of a command: nonzero exit when a property check failed.
struct Outcome {
    violation: bool,
}

struct Context {
    cli: Cli,
    config: RunConfig,
    manifest: RunManifest,
}

impl Context {
    fn write(&mut self, name: &str, table: &Table) -> ascl::Result<()> {
        table.write(&self.cli.out.join(name))?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    fn solver(&self, forcing: &SpectralField) -> ascl::Result<Solver> {
        Solver::new(self.config.solver.clone(), self.config.grid, forcing.clone())
    }

    fn ensemble(&self) -> ascl::Result<Vec<SpectralField>> {
        (0..self.config.ensemble.max(1) as u64)
            .map(|i| self.config.theta0.with_seed_offset(i).realize(self.config.grid, self.config.is_mg()))
            .collect()
    }
}

struct Checkpointer {
    dir: PathBuf,
    every: u64,
    written: Vec<String>,
}

impl Observer for Checkpointer {
    fn observe(&mut self, _state: &SimulationState, _solver: &Solver) -> ascl::Result<()> {
        Ok(())
    }

    fn after_step(&mut self, _prev: &SimulationState, next: &SimulationState, solver: &Solver) -> ascl::Result<()> {
        if self.every > 0 && next.step_count.is_multiple_of(self.every) {
            let name = format!("checkpoint_{:08}.ascl", next.step_count);
            save_checkpoint(next, solver.config(), &self.dir.join(&name))?;
            self.written.push(name);
        }
        Ok(())
    }
}

fn cmd_run(ctx: &mut Context) -> ascl::Result<Outcome> {
    let start = ctx.config.initial_state()?;
    let theta0 = start.theta.clone();
    let forcing = ctx.config.forcing_field()?;
    ctx.manifest.add_input("theta0", &theta0);
    ctx.manifest.add_input("forcing", &forcing);
    let solver = ctx.solver(&forcing)?;
    let mut recorder = Recorder::new(ctx.config.norms.clone());
    let mut ledger = EnergyLedger::default();
    let mut ckpt = Checkpointer {
        dir: ctx.cli.out.clone(),
        every: ctx.cli.checkpoint_every,
        written: Vec::new(),
    };
    let opts = RunOptions {
        observe_every: ctx.config.observe_every,
        observe_initial: true,
    };
    let result = solver.advance_to(start, ctx.config.solver.t_end, &mut [&mut recorder, &mut ledger, &mut ckpt], opts);
    ctx.manifest.outputs.extend(ckpt.written);
    // Partial series are still useful after a blow-up.
    ctx.write("diagnostics.csv", &diagnostics_table(&recorder.records))?;
    ctx.write("energy.csv", &ledger_table(&ledger.entries))?;
    let final_state = result?;
    save_checkpoint(&final_state, solver.config(), &ctx.cli.out.join("final.ascl"))?;
    ctx.manifest.outputs.push("final.ascl".into());

    let mp = max_principle_check(
        &recorder.linf_series(),
        linf_norm(&theta0),
        linf_norm(&forcing),
        ctx.config.solver.kappa,
        ctx.config.c0_hat,
    )?;
    let mut summary = Table::new(["quantity", "value"]);
    summary.push(vec![Cell::S("t_final".into()), final_state.t.into()]);
    summary.push(vec![Cell::S("steps".into()), Cell::I(final_state.step_count)]);
    summary.push(vec![Cell::S("linf_bound".into()), mp.bound.into()]);
    summary.push(vec![Cell::S("linf_max_excess".into()), mp.max_excess.into()]);
    summary.push(vec![Cell::S("linf_plateau".into()), mp.plateau.into()]);
    summary.push(vec![Cell::S("c0_fit".into()), mp.c0_fit.into()]);
    ctx.write("summary.csv", &summary)?;
    if mp.violated {
        warn!(
            "sup norm exceeded ||theta0||_inf + ||S||_inf by {:.3e}; the bound needs kappa |k|^gamma >= 1 on every mode",
            mp.max_excess
        );
    }
    info!("run finished at t = {} after {} steps", final_state.t, final_state.step_count);
    Ok(Outcome { violation: false })
}

fn cmd_sweep_kappa(ctx: &mut Context) -> ascl::Result<Outcome> {
    validate_parameter_list(&ctx.config.sweep.kappa, "sweep.kappa")?;
    let theta0 = ctx.config.initial_field()?;
    let forcing = ctx.config.forcing_field()?;
    ctx.manifest.add_input("theta0", &theta0);
    ctx.manifest.add_input("forcing", &forcing);
    let plan = SweepPlan {
        base: ctx.config.solver.clone(),
        grid: ctx.config.grid,
        theta0,
        forcing,
        values: ctx.config.sweep.kappa.clone(),
        times: ctx.config.sweep.times.clone(),
        norms: ctx.config.sweep.norms.clone(),
    };
    let result = kappa_sweep(&plan)?;
    ctx.write("sweep_kappa.csv", &sweep_table(&result))?;
    let mut trends = Table::new(["norm_name", "order", "monotone", "interpolation_ok"]);
    for t in &result.trends {
        trends.push(vec![
            Cell::S(t.norm_name.clone()),
            t.order.into(),
            Cell::B(t.monotone),
            t.interpolation_ok.map_or(Cell::Empty, Cell::B),
        ]);
    }
    ctx.write("sweep_kappa_trends.csv", &trends)?;
    ctx.manifest.input_hashes.insert("sweep".into(), result.input_hash.clone());
    for f in &result.failures {
        error!("member kappa = {} failed: {}", f.param, f.message);
    }
    if let Some(f) = result.failures.iter().find(|f| f.numerical) {
        return Err(Error::BlowUp {
            t: f64::NAN,
            shell: 0,
            reason: format!("sweep member kappa = {} failed: {}", f.param, f.message),
        });
    }
    if !result.failures.is_empty() {
        return Err(Error::Precondition(format!("{} sweep members failed", result.failures.len())));
    }
    Ok(Outcome { violation: false })
}

fn cmd_sweep_nu(ctx: &mut Context) -> ascl::Result<Outcome> {
    let forcing = ctx.config.forcing_field()?;
    let ensemble = ctx.ensemble()?;
    ctx.manifest.add_input("forcing", &forcing);
    for (i, f) in ensemble.iter().enumerate() {
        ctx.manifest.add_input(&format!("theta0_{i}"), f);
    }
    let result = nu_sweep_attractor(
        &ctx.config.solver,
        ctx.config.grid,
        &forcing,
        &ensemble,
        &ctx.config.attractor,
        &ctx.config.sweep.nu,
        ctx.config.reference_nu,
        ctx.config.cloud_norm,
    )?;
    ctx.write("sweep_nu.csv", &nu_sweep_table(&result))?;
    if let Some(rho) = result.spearman {
        info!("spearman(semidistance, nu) = {rho:.3}");
    }
    Ok(Outcome { violation: false })
}

fn cmd_audit(ctx: &mut Context) -> ascl::Result<Outcome> {
    let report = verify_assumptions(&ctx.config.solver.drift, ctx.config.grid, &ctx.config.audit_nu)?;
    ctx.write("audit.csv", &audit_table(&report))?;
    let mut summary = Table::new(["kind", "div_max", "c0_hat", "lipschitz_hat", "kmax_used", "violations"]);
    summary.push(vec![
        Cell::S(report.kind.clone()),
        report.div_max.into(),
        report.c0_hat.into(),
        report.lipschitz_hat.into(),
        Cell::I(report.kmax_used as u64),
        Cell::S(report.violations.join("; ")),
    ]);
    ctx.write("audit_summary.csv", &summary)?;
    for v in &report.violations {
        error!("assumption violated: {v}");
    }
    Ok(Outcome {
        violation: !report.passed(),
    })
}

fn cmd_lyapunov(ctx: &mut Context) -> ascl::Result<Outcome> {
    let theta0 = ctx.config.initial_field()?;
    let forcing = ctx.config.forcing_field()?;
    ctx.manifest.add_input("theta0", &theta0);
    ctx.manifest.add_input("forcing", &forcing);
    let solver = ctx.solver(&forcing)?;
    let result = lyapunov_run(&solver, &theta0, &ctx.config.lyapunov)?;
    ctx.write("lyapunov.csv", &lyapunov_table(&result))?;
    info!(
        "leading exponent {:.4}, n* = {:?}, Kaplan-Yorke dimension {:.3}",
        result.exponents.first().copied().unwrap_or(f64::NAN),
        result.n_star,
        result.ky_dimension
    );
    Ok(Outcome { violation: false })
}

fn cmd_gevrey(ctx: &mut Context) -> ascl::Result<Outcome> {
    let theta0 = ctx.config.initial_field()?;
    let forcing = ctx.config.forcing_field()?;
    ctx.manifest.add_input("theta0", &theta0);
    ctx.manifest.add_input("forcing", &forcing);
    let solver = ctx.solver(&forcing)?;
    let track = gevrey_radius_track(&solver, &theta0, &ctx.config.gevrey)?;
    ctx.write("gevrey_track.csv", &gevrey_track_table(&track))?;
    if track.halted {
        warn!("analyticity radius fell below two grid spacings; track stopped early");
    }
    Ok(Outcome { violation: false })
}

fn execute(cli: Cli) -> Result<Outcome, (u8, String)> {
    let path = cli.command.config().to_path_buf();
    let text = std::fs::read_to_string(&path)
        .map_err(|e| (EXIT_CONFIG, format!("cannot read config {}: {e}", path.display())))?;
    let config = parse_config(&text, path.parent())
        .map_err(|e| (EXIT_CONFIG, format!("{}: {e}", path.display())))?
        .with_seed_offset(cli.seed);
    let threads = if cli.threads == 0 {
        rayon::current_num_threads()
    } else {
        cli.threads
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| (EXIT_CONFIG, format!("cannot build thread pool: {e}")))?;
    let manifest = RunManifest::new(cli.command.name(), config.echo.clone(), &text, threads);
    let mut ctx = Context { cli, config, manifest };
    if ctx.config.c0_hat != DEFAULT_C0 {
        info!("using c0_hat = {}", ctx.config.c0_hat);
    }
    let result = pool.install(|| match ctx.cli.command.clone() {
        Command::Run { .. } => cmd_run(&mut ctx),
        Command::SweepKappa { .. } => cmd_sweep_kappa(&mut ctx),
        Command::SweepNu { .. } => cmd_sweep_nu(&mut ctx),
        Command::AuditSymbols { .. } => cmd_audit(&mut ctx),
        Command::Lyapunov { .. } => cmd_lyapunov(&mut ctx),
        Command::GevreyTrack { .. } => cmd_gevrey(&mut ctx),
    });
    let status = match &result {
        Ok(o) if o.violation => "violation".to_string(),
        Ok(_) => "ok".to_string(),
        Err(e) => format!("error: {e}"),
    };
    ctx.manifest.finish(&status);
    let manifest_path = ctx.cli.out.join("manifest.json");
    if let Err(e) = ctx.manifest.write(&manifest_path) {
        return Err((EXIT_CONFIG, format!("cannot write manifest: {e}")));
    }
    result.map_err(|e| (exit_code(&e), e.to_string()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(o) if o.violation => ExitCode::from(EXIT_VIOLATION),
        Ok(_) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            error!("{msg}");
            ExitCode::from(code)
        }
    }
}
