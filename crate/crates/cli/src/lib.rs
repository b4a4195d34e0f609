//! `unopt`: command-line runner for circuit unoptimization experiments.
//!
//! Exit codes: 0 success, 1 input error, 2 violated precondition,
//! 3 internal failure, 4 `verify` found the circuits inequivalent.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use unopt_core::zne::FitKind;
use unopt_core::Strategy;

pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "unopt", version, about = "Circuit unoptimization and zero-noise extrapolation experiments")]
pub struct Cli {
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, global = true, env = "UNOPT_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply the unoptimization recipe to a QASM circuit.
    Unoptimize(UnoptimizeArgs),
    /// Run a zero-noise extrapolation sweep from a config file.
    Zne(ExperimentArgs),
    /// Run the RMSE benchmark over a circuit ensemble from a config file.
    Benchmark(ExperimentArgs),
    /// Check two QASM circuits for equivalence up to global phase.
    Verify(VerifyArgs),
    /// Write a quantum-volume circuit as QASM.
    QvGen(QvGenArgs),
    /// Write a Max-Cut QAOA circuit on a random 3-regular graph as QASM.
    QaoaGen(QaoaGenArgs),
}

#[derive(Debug, Args)]
pub struct UnoptimizeArgs {
    /// Input circuit (OpenQASM 2.0, U3/CX subset).
    pub input: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub iterations: usize,
    #[arg(long, default_value_t = Strategy::Random)]
    pub strategy: Strategy,
    #[arg(long)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory, overriding `output_dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub strategy: Option<Strategy>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub variants: Option<usize>,
    /// Fit kinds, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub fit: Option<Vec<FitKind>>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub a: PathBuf,
    pub b: PathBuf,
}

#[derive(Debug, Args)]
pub struct QvGenArgs {
    #[arg(long)]
    pub qubits: usize,
    #[arg(long)]
    pub seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QaoaGenArgs {
    #[arg(long, default_value_t = 12)]
    pub vertices: usize,
    /// Graph seed.
    #[arg(long, default_value_t = unopt_core::workloads::qaoa::DEFAULT_GRAPH_SEED)]
    pub seed: u64,
    /// Cost angles, comma separated; defaults to the reference p = 2 angles.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub gammas: Option<Vec<f64>>,
    /// Mixer angles, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub betas: Option<Vec<f64>>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ExperimentArgs {
    fn overrides(&self) -> config::Overrides {
        config::Overrides {
            seed: self.seed,
            out: self.out.clone(),
            strategy: self.strategy,
            iterations: self.iterations,
            variants: self.variants,
            fits: self.fit.clone(),
        }
    }
}

fn configure_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        // a pool may already exist when commands run in-process repeatedly
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    configure_threads(cli.threads);
    match cli.command {
        Command::Unoptimize(a) => commands::unoptimize::run(&a),
        Command::Zne(a) => commands::zne::run(&a.config, &a.overrides()),
        Command::Benchmark(a) => commands::benchmark::run(&a.config, &a.overrides()),
        Command::Verify(a) => commands::verify::run(&a.a, &a.b),
        Command::QvGen(a) => commands::generate::qv(&a),
        Command::QaoaGen(a) => commands::generate::qaoa(&a),
    }
}
