//! `polykin`: command-line surface of the kinetic-theory toolkit.
//!
//! One binary with six subcommands, a shared flat-config loader and a
//! shared manifest writer. Every run drops `manifest.json` and a replayable
//! `resolved.cfg` next to its data outputs; data outputs are bit-exact
//! under replay with the same config and seed, independent of the
//! `POLYKIN_THREADS` worker count.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 statistical-test failure (only with `--strict`).

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Config;
use manifest::ManifestWriter;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
    StatFailure(String),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(m) => write!(f, "config: {m}"),
            Self::Numeric(m) => write!(f, "numeric: {m}"),
            Self::StatFailure(m) => write!(f, "statistical test failed: {m}"),
            Self::Io(m) => write!(f, "io: {m}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Numeric(_) | Self::Io(_) => 3,
            Self::StatFailure(_) => 4,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "polykin",
    version,
    about = "Polyatomic kinetic-theory toolkit: frequency tables, kernel and gain probes, entropy and equilibrium checks, DSMC runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat `key = value` configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override the config seed.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Output directory (created if missing).
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Turn statistical-test failures into exit code 4.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Collision frequency ν and its (1+|v|+√I)^{2−α} ratio over a scan.
    NuTable,
    /// Weighted kernel-bound products over a scan.
    KernelBounds,
    /// Pointwise gain-estimate ratios and their sup.
    GainProbe,
    /// Relative entropy against its quadratic/linear split bound.
    EntropyCheck,
    /// KS goodness of fit for equilibrium ensemble marginals.
    EquilibriumCheck,
    /// DSMC run streaming the diagnostics CSV.
    Simulate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Self::NuTable => "nu-table",
            Self::KernelBounds => "kernel-bounds",
            Self::GainProbe => "gain-probe",
            Self::EntropyCheck => "entropy-check",
            Self::EquilibriumCheck => "equilibrium-check",
            Self::Simulate => "simulate",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_thread_pool() {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code());
    }
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// `POLYKIN_THREADS` caps the rayon worker count; 0 or unset means auto.
fn init_thread_pool() -> Result<(), CliError> {
    match std::env::var("POLYKIN_THREADS") {
        Err(_) => Ok(()),
        Ok(v) => {
            let n: usize = v
                .parse()
                .map_err(|_| CliError::Config(format!("POLYKIN_THREADS = {v} is not an integer")))?;
            if n == 0 {
                return Ok(());
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let mut cfg = Config::load(config_path)?;
    let seed = cli.seed.unwrap_or(cfg.u64_or("seed", 0)?);
    std::fs::create_dir_all(&cli.out)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", cli.out.display())))?;

    let writer = ManifestWriter::start(cli.command.name());
    let result = match cli.command {
        Command::NuTable => commands::nu_table(&cfg, seed, &cli.out, cli.strict),
        Command::KernelBounds => commands::kernel_bounds(&cfg, seed, &cli.out, cli.strict),
        Command::GainProbe => commands::gain_probe(&cfg, seed, &cli.out, cli.strict),
        Command::EntropyCheck => commands::entropy_check(&cfg, seed, &cli.out, cli.strict),
        Command::EquilibriumCheck => commands::equilibrium_check(&cfg, seed, &cli.out, cli.strict),
        Command::Simulate => match commands::simulate(&cfg, seed, &cli.out, cli.strict) {
            Ok(sim) => {
                // Fold the resolved step size back in so a replayed config
                // reproduces the run even when dt was derived.
                cfg.set("sim.dt", format!("{}", sim.dt));
                Ok(())
            }
            Err(e) => Err(e),
        },
    };

    // Statistical failures still produce complete outputs and a manifest.
    match result {
        Ok(()) => writer.finish(&cli.out, &cfg, seed),
        Err(e @ CliError::StatFailure(_)) => {
            writer.finish(&cli.out, &cfg, seed)?;
            Err(e)
        }
        Err(e) => Err(e),
    }
}
