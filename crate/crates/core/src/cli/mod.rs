//! Command-line front end: configuration, run orchestration, output.

mod config;
mod output;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::experiments::{convergence_study, perturbation_study, quasistatic_sweep, ExperimentError, InitialField, SweepResult};
use crate::steppers::SimError;

pub use config::{parse_config, parse_config_str, ConfigError, ExperimentConfig, OutputConfig, RunConfig};
pub use output::{
    diagnostics_csv, snapshot_name, vtk_string, write_diagnostics_csv, write_sweep, write_vtk, DIAGNOSTIC_COLUMNS,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

pub const THREADS_ENV: &str = "MECHANOCHEM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "mechanochem", version, about = "Phase-field tumour growth with elasticity and nutrient transport")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides [output] dir).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Write a VTK snapshot every N steps (overrides [output] snapshot_every).
    #[arg(long, global = true)]
    pub snapshot_every: Option<usize>,
    /// Seed for random initial data (overrides [model] phi0_seed).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Run one simulation and write diagnostics and snapshots.
    Run,
    /// Sweep beta towards the quasi-static limit.
    Quasistatic,
    /// Continuous-dependence study on perturbed data.
    Perturb,
    /// Self-convergence study over a grid sequence.
    Converge,
    /// Parse and validate the configuration only.
    Validate,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn runtime(message: impl ToString) -> Self {
        Failure { code: EXIT_RUNTIME, message: message.to_string() }
    }
}

fn is_hypothesis(e: &SimError) -> bool {
    match e {
        SimError::Hypothesis(_) | SimError::InitialBounds { .. } | SimError::Grid(_) => true,
        SimError::Stage { source, .. } | SimError::AtStep { source, .. } => is_hypothesis(source),
        _ => false,
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        let code = if is_hypothesis(&e) { EXIT_VALIDATION } else { EXIT_RUNTIME };
        Failure { code, message: e.to_string() }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        let code = match &e {
            ExperimentError::Hypotheses(_) | ExperimentError::InvalidInput(_) => EXIT_VALIDATION,
            ExperimentError::Setup(s) | ExperimentError::Run { source: s, .. } if is_hypothesis(s) => EXIT_VALIDATION,
            _ => EXIT_RUNTIME,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure { code: EXIT_VALIDATION, message: e.to_string() }
    }
}

/// Thread count: the flag, else the environment variable, else the default.
pub fn resolve_threads(flag: Option<usize>, env: Option<&str>) -> Option<usize> {
    flag.or_else(|| env.and_then(|v| v.trim().parse().ok())).filter(|&n| n > 0)
}

fn load(cli: &Cli) -> Result<RunConfig, Failure> {
    let path = cli.config.as_ref().ok_or_else(|| Failure { code: EXIT_USAGE, message: "--config PATH is required".into() })?;
    let mut cfg = parse_config(path)?;
    if let Some(dir) = &cli.output {
        cfg.output.dir = dir.clone();
    }
    if let Some(n) = cli.snapshot_every {
        cfg.output.snapshot_every = n;
    }
    if let Some(seed) = cli.seed {
        if let InitialField::Random { seed: s, .. } = &mut cfg.scenario.initial_phi {
            *s = seed;
        }
    }
    Ok(cfg)
}

fn prepare_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::runtime(format!("cannot create {}: {e}", dir.display())))
}

fn run_simulation(cfg: &RunConfig) -> Result<(), Failure> {
    let scenario = cfg.scenario.build()?;
    let sim = &scenario.sim;
    sim.check_initial_nutrient(&scenario.sigma0)?;
    let dir = &cfg.output.dir;
    prepare_dir(dir)?;
    println!("setup: grid {}, dt {}, {} steps", cfg.scenario.grid.describe(), scenario.dt, scenario.steps);
    let every = cfg.output.snapshot_every;
    let mut io_error: Option<String> = None;
    let mut hook = |step: usize, state: &crate::steppers::FieldState, rec: &crate::diagnostics::DiagnosticsRecord| {
        log::debug!("step {step}: t = {}, energy = {}, newton = {}", rec.time, rec.total_energy, rec.newton_iters);
        if every > 0 && step % every == 0 && io_error.is_none() {
            let path = dir.join(snapshot_name(step));
            if let Err(e) = write_vtk(&sim.grid, state, &path) {
                io_error = Some(format!("cannot write {}: {e}", path.display()));
            }
        }
    };
    let (state, records) = sim.run(&scenario.phi0, &scenario.sigma0, scenario.dt, scenario.steps, Some(&mut hook))?;
    if let Some(e) = io_error {
        return Err(Failure::runtime(e));
    }
    let last = records.last().expect("initial record");
    println!(
        "run: t = {}, energy {:.6e} -> {:.6e}, mass {:.6e}, sigma in [{:.6e}, {:.6e}]",
        state.time, records[0].total_energy, last.total_energy, last.mass, last.sigma_min, last.sigma_max
    );
    let csv = dir.join(&cfg.output.diagnostics);
    write_diagnostics_csv(&records, &csv).map_err(|e| Failure::runtime(format!("cannot write {}: {e}", csv.display())))?;
    let snaps = if every > 0 { scenario.steps / every + 1 } else { 0 };
    println!("output: {} rows in {}, {snaps} snapshots", records.len(), csv.display());
    Ok(())
}

fn finish_sweep(cfg: &RunConfig, result: &SweepResult, stem: &str) -> Result<(), Failure> {
    prepare_dir(&cfg.output.dir)?;
    write_sweep(result, &cfg.output.dir, stem).map_err(|e| Failure::runtime(format!("cannot write sweep output: {e}")))?;
    print!("{}", result.summary());
    println!("output: {}", cfg.output.dir.join(format!("{stem}.csv")).display());
    Ok(())
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let cfg = load(cli)?;
    println!("config: valid ({})", cli.config.as_ref().map(|p| p.display().to_string()).unwrap_or_default());
    let ex = &cfg.experiment;
    match cli.command {
        Command::Validate => {
            let scenario = cfg.scenario.build()?;
            scenario.sim.check_initial_nutrient(&scenario.sigma0)?;
            println!("validate: model hypotheses hold, nutrient bound M = {}", scenario.sim.params.sigma_bound());
            Ok(())
        }
        Command::Run => run_simulation(&cfg),
        Command::Quasistatic => finish_sweep(&cfg, &quasistatic_sweep(&cfg.scenario, &ex.betas)?, "quasistatic"),
        Command::Perturb => finish_sweep(&cfg, &perturbation_study(&cfg.scenario, &ex.deltas, ex.target, ex.norm)?, "perturbation"),
        Command::Converge => finish_sweep(&cfg, &convergence_study(&cfg.scenario, &ex.grids, ex.dt_rule)?, "convergence"),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let env = std::env::var(THREADS_ENV).ok();
    let threads = resolve_threads(cli.threads, env.as_deref());
    let result = match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&cli)),
            Err(e) => Err(Failure::runtime(format!("cannot start {n} threads: {e}"))),
        },
        None => execute(&cli),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
