//! `su2cs`: run one experiment from a JSON config and write a JSON report
//! (plus CSV series) into the output directory.
//!
//! Exit codes: 0 on success, 2 for an invalid config, 3 when the computation
//! fails or a check misses its tolerance (the report is still written).

mod commands;
mod config;
mod report;

use clap::{Args, Parser, Subcommand};
use config::{ConfigError, Invocation};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "su2cs", version, about = "SU(2) coherent-state experiments")]
struct Cli {
    #[command(flatten)]
    global: GlobalFlags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
pub struct GlobalFlags {
    /// JSON config for the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for random inputs (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for the report and CSV files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the default tolerance of the subcommand's checks.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand, Clone)]
pub enum Command {
    /// Wigner d-matrix and rotation matrix at given Euler angles.
    Wigner(WignerFlags),
    /// Resolution-of-unity residuals for random fiducial vectors.
    VerifyResolution,
    /// Overlap and matrix elements of two coherent states.
    Overlap,
    /// Discrete path integral against the exact propagator.
    Propagate,
    /// Continuous and time-sliced actions along a sampled path.
    Action,
    /// One-form, two-form, gauge potentials and geometric phases.
    Geometry,
    /// Integrate the classical equations of motion.
    Semiclassical,
    /// High-spin contraction sweep.
    Contract,
    /// Run the built-in acceptance criteria.
    Acceptance(AcceptanceFlags),
}

#[derive(Args, Clone, Default)]
pub struct WignerFlags {
    /// Twice the spin.
    #[arg(long = "two-s")]
    two_s: Option<u32>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    psi: Option<f64>,
}

#[derive(Args, Clone, Default)]
pub struct AcceptanceFlags {
    /// Run a single criterion (1–12).
    #[arg(long)]
    criterion: Option<u8>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Wigner(_) => "wigner",
            Command::VerifyResolution => "verify-resolution",
            Command::Overlap => "overlap",
            Command::Propagate => "propagate",
            Command::Action => "action",
            Command::Geometry => "geometry",
            Command::Semiclassical => "semiclassical",
            Command::Contract => "contract",
            Command::Acceptance(_) => "acceptance",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(Failure::Config(e)) => {
            eprintln!("su2cs: invalid config: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("su2cs: {e:#}");
            ExitCode::from(1)
        }
    }
}

enum Failure {
    Config(ConfigError),
    Io(anyhow::Error),
}

fn execute(cli: Cli) -> Result<ExitCode, Failure> {
    let inv = Invocation::load(&cli.command, &cli.global).map_err(Failure::Config)?;
    if let Some(n) = inv.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Io(e.into()))?;
    }
    let result = commands::run(&cli.command, &inv).map_err(Failure::Config)?;
    let record = report::ReportRecord::new(&cli.command, &inv, result);
    let written = report::write(&record, &inv.out).map_err(Failure::Io)?;
    for path in &written {
        println!("{}", path.display());
    }
    println!("{}: {}", record.command, if record.passed { "ok" } else { "FAILED" });
    if let Some(e) = &record.error {
        eprintln!("su2cs: {e}");
    }
    for c in record.checks.iter().filter(|c| !c.passed) {
        eprintln!("su2cs: check failed: {c}");
    }
    Ok(if record.passed { ExitCode::SUCCESS } else { ExitCode::from(3) })
}
