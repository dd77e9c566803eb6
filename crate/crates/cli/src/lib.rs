//! Command-line layer for `calr3d-core`: JSON run configurations, the
//! `solve`/`sweep`/`field`/`classify`/`lemma-check` commands and their
//! CSV/JSON outputs.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::RunConfig;
pub use error::{CliError, EXIT_NUMERICAL, EXIT_USAGE};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "CALR3D_THREADS";

const AFTER_HELP: &str = "\
Exit status: 0 on success (including inconclusive verdicts, which are
reported in the output), 2 for usage or configuration errors, 3 for
numerical failures (resonant systems, failed bisection).

Set CALR3D_THREADS to cap the number of worker threads.";

#[derive(Debug, Parser)]
#[command(name = "calr3d", version, about = "Spectral CALR simulator for the folded coated sphere", after_help = AFTER_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, clap::Args)]
pub struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; overrides `output.path`. Standard output if neither is set.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for randomized checks.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Debug, clap::Args)]
pub struct LemmaArgs {
    /// JSON configuration; only its `lemma` and `output` sections are read.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energies and truncation for a single loss value (JSON).
    Solve(CommonArgs),
    /// Energies over a loss grid (CSV: delta,E_exact,E_approx,N_used,N_delta).
    Sweep(CommonArgs),
    /// Potential on a planar grid (CSV: x,y,z,region,V_re,V_im).
    Field(CommonArgs),
    /// Blow-up verdict, regime, gap diagnostics and optional critical radius (JSON).
    Classify(CommonArgs),
    /// Randomized check of the explicit harmonic polynomials (CSV).
    LemmaCheck(LemmaArgs),
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))
}

fn emit(out: Option<&Path>, e: &commands::Emitted) -> Result<(), CliError> {
    match out {
        Some(p) => {
            output::write_atomic(p, e.primary.as_bytes())?;
            for (suffix, text) in &e.sidecars {
                output::write_atomic(&output::sidecar(p, suffix), text.as_bytes())?;
            }
        }
        None => {
            print!("{}", e.primary);
            for (_, text) in &e.sidecars {
                eprint!("{text}");
            }
        }
    }
    Ok(())
}

/// Configure the worker pool from [`THREADS_ENV`]; ignored if unset.
pub fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer (got {v:?})")))?;
        // a second initialisation (e.g. in tests) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Run a parsed command line; returns the exit status.
pub fn run(cli: Cli) -> Result<i32, CliError> {
    init_threads()?;
    let (emitted, out) = match cli.command {
        Command::LemmaCheck(a) => {
            let run = match &a.config {
                Some(p) => commands::LemmaRun::from_json(&read(p)?)?,
                None => commands::LemmaRun::default(),
            };
            let out = a.out.clone().or_else(|| run.output.path.as_ref().map(PathBuf::from));
            (commands::cmd_lemma_check(&run, a.seed)?, out)
        }
        cmd => {
            let (a, f): (CommonArgs, fn(&RunConfig) -> Result<commands::Emitted, CliError>) = match cmd {
                Command::Solve(a) => (a, commands::cmd_solve),
                Command::Sweep(a) => (a, commands::cmd_sweep),
                Command::Field(a) => (a, commands::cmd_field),
                Command::Classify(a) => (a, commands::cmd_classify),
                Command::LemmaCheck(_) => unreachable!(),
            };
            let cfg = RunConfig::from_json(&read(&a.config)?)?;
            let out = a.out.clone().or_else(|| cfg.output.path.as_ref().map(PathBuf::from));
            (f(&cfg)?, out)
        }
    };
    emit(out.as_deref(), &emitted)?;
    Ok(emitted.status)
}
