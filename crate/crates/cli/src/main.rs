use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod input;
mod output;

use input::SpaceArgs;

/// k-clustering under monotone norm objectives.
#[derive(Debug, Parser)]
#[command(name = "normclust", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Approximate a norm k-clustering instance.
    Solve(SolveArgs),
    /// Exact or baseline solution for small instances.
    Oracle(OracleArgs),
    /// Play the scattering game and report record lengths.
    Scatter(ScatterArgs),
    /// Solve one Ball Intersection instance.
    Ballint(BallintArgs),
    /// Check a metric and/or a norm spec.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub space: SpaceArgs,

    /// Norm spec JSON.
    #[arg(long)]
    pub norm: PathBuf,

    #[arg(long)]
    pub k: usize,

    #[arg(long)]
    pub eps: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Runs per optimum guess.
    #[arg(long, default_value_t = 100)]
    pub restarts: usize,

    /// Optimum guess; when absent a geometric grid of guesses is searched.
    #[arg(long)]
    pub opt: Option<f64>,

    /// Ratio between consecutive guesses (default 1 + eps/3).
    #[arg(long)]
    pub opt_grid_factor: Option<f64>,

    /// Main-loop iterations per run (default from --lambda).
    #[arg(long)]
    pub iteration_cap: Option<usize>,

    /// Scatter-dimension stand-in in the default iteration cap.
    #[arg(long, default_value_t = normclust::epas::DEFAULT_LAMBDA)]
    pub lambda: f64,

    /// Line-delimited JSON trace of the run that produced the answer.
    #[arg(long)]
    pub trace: Option<PathBuf>,

    /// Worker threads for restarts.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OracleMethod {
    Brute,
    Gonzalez,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub space: SpaceArgs,

    #[arg(long)]
    pub norm: PathBuf,

    #[arg(long)]
    pub k: usize,

    #[arg(long, value_enum, default_value = "brute")]
    pub method: OracleMethod,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StrategyArg {
    Farthest,
    Random,
}

#[derive(Debug, Args)]
pub struct ScatterArgs {
    #[command(flatten)]
    pub space: SpaceArgs,

    #[arg(long)]
    pub eps: f64,

    /// Games are played with seeds 0..n.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,

    #[arg(long, default_value_t = 100)]
    pub max_len: usize,

    /// Point player.
    #[arg(long, value_enum, default_value = "farthest")]
    pub strategy: StrategyArg,

    /// Play on the raw distances instead of rescaling around the first point.
    #[arg(long)]
    pub no_normalize: bool,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BallintArgs {
    #[command(flatten)]
    pub space: SpaceArgs,

    /// CSV of `point_id,radius` rows.
    #[arg(long)]
    pub requests: PathBuf,

    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub space: SpaceArgs,

    #[arg(long)]
    pub norm: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Solve(a) => commands::solve(a),
        Command::Oracle(a) => commands::oracle(a),
        Command::Scatter(a) => commands::scatter(a),
        Command::Ballint(a) => commands::ballint(a),
        Command::Validate(a) => commands::validate(a),
    };
    match result {
        Ok(status) => status.into(),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
