//! `circflow`: generate circulation matrices, run and analyze simulations,
//! and cross-check the sparse engine against the dense oracle.
//!
//! Exit codes: 0 success, 1 configuration or validation error, 2 runtime
//! error, 3 verification failure.

mod commands;
mod config;
mod setup;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "circflow", version, about = "Income-circulation simulations")]
struct Cli {
    /// Output directory (overrides `[output] dir`).
    #[arg(long, global = true, env = "CIRCFLOW_OUT", value_name = "DIR")]
    out: Option<PathBuf>,

    /// Only print errors.
    #[arg(long, short, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct ConfigArgs {
    /// Run configuration (TOML).
    #[arg(long, short, value_name = "PATH")]
    pub config: PathBuf,

    /// Overrides the configuration's seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the configured matrices in triplet format.
    Gen(ConfigArgs),
    /// Run the simulation; writes snapshots, drift and the final state.
    Run(ConfigArgs),
    /// Inequality, tail and convergence reports for a trace.
    Analyze(commands::AnalyzeArgs),
    /// Compare the sparse engine with the dense oracle (n <= 4096).
    Verify {
        #[command(flatten)]
        config: ConfigArgs,
        /// Largest accepted difference, relative to the monetary base.
        #[arg(long, default_value_t = 1e-12)]
        tolerance: f64,
    },
}

/// How a command failed; decides the exit code.
#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
    Verify(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Runtime(_) => 2,
            Failure::Verify(_) => 3,
        }
    }
}

pub trait Classify<T> {
    fn config_err(self) -> Result<T, Failure>;
    fn runtime_err(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn config_err(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Config(e.into()))
    }

    fn runtime_err(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Runtime(e.into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .format_target(false)
        .init();

    let out = cli.out;
    let result = match cli.command {
        Command::Gen(args) => commands::gen(&args, out),
        Command::Run(args) => commands::run(&args, out),
        Command::Analyze(args) => commands::analyze(&args, out),
        Command::Verify { config, tolerance } => commands::verify(&config, out, tolerance),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(e) | Failure::Runtime(e) => eprintln!("error: {e:#}"),
                Failure::Verify(msg) => eprintln!("verification failed: {msg}"),
            }
            ExitCode::from(f.code())
        }
    }
}
