//! Command-line front end. The binary only calls [`main`].

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::analysis::{parse_grid, sweep, FitMethod, FitWindow, SweepAxis, SweepOptions};
use crate::config::{parse_level, ConfigError, Preset, RunConfig};
use crate::dispersion::{converge_truncation, find_pole, DispersionVariant, Pole, SolverError};
use crate::evolution::{evolve, EvolutionError};
use crate::model::{classify_energy, Level};
use crate::output::{self, OutputError};
use crate::repro::{self, ReproError, REAL_POLE_LIMIT};
use crate::selfenergy::FloquetTruncation;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID_CONFIG: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;
pub const EXIT_NON_FINITE: i32 = 4;
pub const EXIT_REPRO_FAILED: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "floquet-remote",
    version,
    about = "Resonance poles and survival probabilities of a driven two-level chain"
)]
pub struct Cli {
    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for sweeps and paired trajectories.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// desk, paper, fig3, fig4a, fig4b or table-gammaB.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub seed_re: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub seed_im: Option<f64>,
    /// determinant-a, determinant-b, scalar-a0, scalar-b0-exact or scalar-b0-expanded.
    #[arg(long, global = true)]
    pub variant: Option<DispersionVariant>,
    /// Suppress progress messages.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and check a configuration and print derived quantities.
    Validate,
    /// Solve for one complex quasienergy.
    Pole,
    /// Integrate the chain and write the survival probability.
    Evolve {
        /// Prepared level (A or B).
        #[arg(long)]
        initial: Option<String>,
    },
    /// Solve poles over a grid of frequencies or Bessel arguments.
    Sweep {
        #[arg(long, default_value = "omega")]
        axis: SweepAxis,
        /// start:stop:step or a comma list.
        #[arg(long)]
        grid: String,
        /// Also run and fit a trajectory per row.
        #[arg(long)]
        with_evolution: bool,
    },
    /// Run a named scenario end to end and check it.
    Repro {
        /// fig3, fig4a, fig4b or table-gammaB (defaults to --preset).
        figure: Option<String>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Pole => "pole",
            Command::Evolve { .. } => "evolve",
            Command::Sweep { .. } => "sweep",
            Command::Repro { .. } => "repro",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error(transparent)]
    Repro(#[from] ReproError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    ChecksFailed(String),
    #[error("no sweep row succeeded")]
    EmptySweep,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => EXIT_INVALID_CONFIG,
            CliError::Solver(_) | CliError::EmptySweep => EXIT_NO_CONVERGENCE,
            CliError::Evolution(EvolutionError::NonFiniteState { .. }) => EXIT_NON_FINITE,
            CliError::Evolution(_) => EXIT_INVALID_CONFIG,
            CliError::Output(_) => EXIT_FAILURE,
            CliError::ChecksFailed(_) => EXIT_REPRO_FAILED,
            CliError::Repro(e) => match e {
                ReproError::NotAFigure(_) | ReproError::Model(_) => EXIT_INVALID_CONFIG,
                ReproError::Solver(_) => EXIT_NO_CONVERGENCE,
                ReproError::Evolution(EvolutionError::NonFiniteState { .. }) => EXIT_NON_FINITE,
                ReproError::Evolution(_) => EXIT_INVALID_CONFIG,
                ReproError::Analysis(_) => EXIT_REPRO_FAILED,
                ReproError::Output(_) => EXIT_FAILURE,
            },
        }
    }

    /// Iterate history when a root search stalled.
    fn trace(&self) -> Option<&[Complex64]> {
        match self {
            CliError::Solver(e) | CliError::Repro(ReproError::Solver(e)) => e.trace(),
            _ => None,
        }
    }
}

/// What a run produced, written next to its outputs even when it failed.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub preset: Option<String>,
    pub config: RunConfig,
    pub outputs: Vec<PathBuf>,
    pub wall_clock_seconds: f64,
    pub version: String,
    pub truncation: Option<FloquetTruncation>,
    pub status: String,
}

struct Context {
    run: RunConfig,
    preset: Option<String>,
    out: PathBuf,
    quiet: bool,
    outputs: Vec<PathBuf>,
    truncation: Option<FloquetTruncation>,
}

impl Context {
    fn progress(&self, msg: &str) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }
}

/// Runs the command line in `args` and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID_CONFIG } else { EXIT_OK };
        }
    };
    if let Some(jobs) = cli.jobs {
        // Fails only if the pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global();
    }
    let started = Instant::now();
    let preset = cli.preset.clone();
    let run = match resolve(&cli) {
        Ok(run) => run,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let mut ctx = Context {
        run,
        preset: preset.clone(),
        out: cli.out.clone(),
        quiet: cli.quiet,
        outputs: Vec::new(),
        truncation: None,
    };
    let result = dispatch(&cli.command, &mut ctx);
    let status = match &result {
        Ok(()) => "ok".to_string(),
        Err(e) => e.to_string(),
    };
    if !matches!(cli.command, Command::Validate) {
        let manifest_path = manifest_path(&cli.command, &ctx.out);
        let manifest = RunManifest {
            subcommand: cli.command.name().to_string(),
            preset,
            config: ctx.run,
            outputs: ctx.outputs.clone(),
            wall_clock_seconds: started.elapsed().as_secs_f64(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            truncation: ctx.truncation,
            status,
        };
        if let Err(e) = output::write_json(&manifest_path, &manifest) {
            eprintln!("error: {e}");
        }
    }
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(trace) = e.trace() {
                eprintln!("iterates:");
                for z in trace {
                    eprintln!("  {:.15e} {:+.15e}i", z.re, z.im);
                }
            }
            e.exit_code()
        }
    }
}

pub fn main() -> ! {
    std::process::exit(run(std::env::args_os()))
}

fn manifest_path(command: &Command, out: &Path) -> PathBuf {
    match command {
        Command::Repro { .. } => out.join("manifest.json"),
        other => out.join(format!("{}.manifest.json", other.name())),
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut run = RunConfig::default();
    if let Some(name) = &cli.preset {
        run = name.parse::<Preset>()?.apply(run);
    }
    if let Some(path) = &cli.config {
        run = run.apply_file(path)?;
    }
    if let Some(variant) = cli.variant {
        run.solver.variant = variant;
    }
    if cli.seed_re.is_some() || cli.seed_im.is_some() {
        let base = run.solver.seed.unwrap_or(Complex64::new(run.model.level_energy(run.solver.variant.level()), 0.0));
        run.solver.seed = Some(Complex64::new(cli.seed_re.unwrap_or(base.re), cli.seed_im.unwrap_or(base.im)));
    }
    if let Command::Evolve { initial: Some(level) } = &cli.command {
        run.evolution.initial = parse_level(level)?;
    }
    Ok(run)
}

fn dispatch(command: &Command, ctx: &mut Context) -> Result<(), CliError> {
    match command {
        Command::Validate => cmd_validate(ctx),
        Command::Pole => cmd_pole(ctx),
        Command::Evolve { .. } => cmd_evolve(ctx),
        Command::Sweep { axis, grid, with_evolution } => cmd_sweep(ctx, *axis, grid, *with_evolution),
        Command::Repro { figure } => {
            let name = figure
                .clone()
                .or_else(|| ctx.preset.clone())
                .ok_or_else(|| CliError::Usage("repro needs a figure name".into()))?;
            cmd_repro(ctx, name.parse()?)
        }
    }
}

fn solve(ctx: &mut Context, variant: DispersionVariant) -> Result<Pole, CliError> {
    let config = ctx.run.validated_model()?;
    let settings = ctx.run.solver;
    let pole = match settings.channels {
        Some(n) => {
            find_pole(variant, settings.seed, &config, FloquetTruncation::auto(n, config.chi()), &settings.options)?
        }
        None => converge_truncation(variant, settings.seed, &config, settings.truncation_tol, &settings.options)?.1,
    };
    ctx.truncation = Some(pole.truncation);
    Ok(pole)
}

fn cmd_validate(ctx: &mut Context) -> Result<(), CliError> {
    let config = ctx.run.validate()?;
    let model = ctx.run.model;
    let m = &model;
    println!("config ok");
    println!("e0 = {}  beta = {}  eA = {}  eB = {}  gA = {}  gB = {}", m.e0, m.beta, m.e_a, m.e_b, m.g_a, m.g_b);
    println!("omega = {}  alpha = {:.12}  chi = {:.12}  T = {:.12}", m.omega, m.alpha, config.chi(), config.period());
    for n in -2..=2 {
        let band = config.replica_band(n);
        println!("replica n={n:+}: [{:.6}, {:.6}]", band.lower, band.upper);
    }
    let report = config.classify_levels(4);
    println!("{}", report.a.describe());
    println!("{}", report.b.describe());
    // The bare energies miss the level shift; the solved pole places the
    // level where its decay is decided.
    let level = ctx.run.solver.variant.level();
    match solve(ctx, ctx.run.solver.variant) {
        Ok(pole) => {
            let dressed = classify_energy(m, level, pole.z.re, 4);
            println!("{} pole at Re z = {:.9}: {}", level, pole.z.re, dressed.describe());
        }
        Err(e) => println!("{level} pole not located: {e}"),
    }
    if config.weak_coupling_advisory() {
        println!("advisory: coupling above 0.2 beta, outside the weak-coupling regime");
    }
    let evo = &ctx.run.evolution;
    println!(
        "evolution: M = {}  w = {}  gamma0 = {}  p = {}  dt = {}  t_max = {}  steps = {}  stride = {}",
        evo.half_length,
        evo.cap_width,
        evo.gamma0,
        evo.cap_exponent,
        evo.dt,
        evo.t_max,
        evo.steps(),
        evo.stride()
    );
    if evo.stability_advisory(m) {
        println!("advisory: dt is large for RK4 stability");
    }
    Ok(())
}

#[derive(Serialize)]
struct PoleReport<'a> {
    #[serde(flatten)]
    pole: &'a Pole,
    purely_real: bool,
}

fn cmd_pole(ctx: &mut Context) -> Result<(), CliError> {
    let pole = solve(ctx, ctx.run.solver.variant)?;
    let report = PoleReport { pole: &pole, purely_real: pole.gamma < REAL_POLE_LIMIT };
    let text = serde_json::to_string_pretty(&report).expect("pole serializes");
    println!("{text}");
    if report.purely_real {
        ctx.progress("pole purely real");
    }
    let path = ctx.out.join("pole.json");
    output::write_json(&path, &report)?;
    ctx.outputs.push(path);
    Ok(())
}

#[derive(Serialize)]
struct SeriesMetadata<'a> {
    model: &'a crate::model::ModelConfig,
    evolution: &'a crate::evolution::EvolutionConfig,
    version: &'a str,
    steps: usize,
    stride: usize,
    gamma_pole: Option<f64>,
    fit: Option<crate::analysis::DecayFit>,
}

fn cmd_evolve(ctx: &mut Context) -> Result<(), CliError> {
    let config = ctx.run.validate()?;
    let evo = ctx.run.evolution;
    let level = evo.initial;
    let variant = match level {
        Level::A => DispersionVariant::ScalarA0,
        Level::B => DispersionVariant::ScalarB0Exact,
    };
    let gamma = match solve(ctx, variant) {
        Ok(pole) => Some(pole.gamma),
        Err(e) => {
            ctx.progress(&format!("no envelope: {e}"));
            None
        }
    };
    ctx.progress(&format!("evolving {level} for t = {} ({} steps)", evo.t_max, evo.steps()));
    let series = evolve(&config, &evo)?;
    let stem = format!("evolve_{level}");
    let uniform = ctx.out.join(format!("{stem}.csv"));
    let strobe = ctx.out.join(format!("{stem}_strobe.csv"));
    output::write_series_csv(&uniform, &series, gamma)?;
    ctx.outputs.push(uniform);
    output::write_strobe_csv(&strobe, &series, gamma)?;
    ctx.outputs.push(strobe);
    let fit = crate::analysis::fit_decay(&series, FitWindow::default_for(evo.t_max), FitMethod::Stroboscopic).ok();
    let meta = SeriesMetadata {
        model: &series.model,
        evolution: &series.evolution,
        version: &series.version,
        steps: evo.steps(),
        stride: evo.stride(),
        gamma_pole: gamma,
        fit,
    };
    let path = ctx.out.join(format!("{stem}.json"));
    output::write_json(&path, &meta)?;
    ctx.outputs.push(path);
    if !ctx.quiet {
        println!("P_{level}(t_max) = {:.12e}", series.final_survival());
    }
    Ok(())
}

fn cmd_sweep(ctx: &mut Context, axis: SweepAxis, grid: &str, with_evolution: bool) -> Result<(), CliError> {
    ctx.run.validated_model()?;
    let grid = parse_grid(grid).map_err(CliError::Usage)?;
    if with_evolution {
        ctx.run.evolution.validate()?;
    }
    let options = SweepOptions {
        variant: ctx.run.solver.variant,
        truncation_tol: ctx.run.solver.truncation_tol,
        solver: ctx.run.solver.options,
        evolution: with_evolution.then_some(ctx.run.evolution),
        jobs: None,
    };
    ctx.progress(&format!("sweeping {} points", grid.len()));
    let rows = sweep(axis, &grid, &ctx.run.model, &options);
    let axis_name = match axis {
        SweepAxis::Omega => "omega",
        SweepAxis::Chi => "chi",
    };
    let path = ctx.out.join(format!("sweep_{axis_name}.csv"));
    output::write_sweep_csv(&path, &rows)?;
    ctx.outputs.push(path);
    ctx.truncation = rows.iter().find_map(|r| r.pole.as_ref().map(|p| p.truncation));
    for row in rows.iter().filter(|r| r.status != "ok") {
        ctx.progress(&format!(
            "row {axis_name} = {}: {}",
            if axis == SweepAxis::Omega { row.omega } else { row.chi },
            row.status
        ));
    }
    if rows.iter().all(|r| r.status != "ok") {
        return Err(CliError::EmptySweep);
    }
    Ok(())
}

fn cmd_repro(ctx: &mut Context, figure: Preset) -> Result<(), CliError> {
    let dir = ctx.out.join(figure.name());
    let quiet = ctx.quiet;
    let progress = move |msg: &str| {
        if !quiet {
            eprintln!("{msg}");
        }
    };
    let outcome = repro::reproduce(figure, &ctx.run, &dir, &progress)?;
    ctx.outputs.extend(outcome.outputs.iter().cloned());
    ctx.truncation = outcome.poles.first().map(|p| p.truncation);
    for check in &outcome.checks {
        println!("{check}");
    }
    if outcome.passed() {
        Ok(())
    } else {
        let failed = outcome.checks.iter().filter(|c| !c.pass).count();
        Err(CliError::ChecksFailed(format!("{failed} check(s) failed for {}", figure.name())))
    }
}
