use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod failure;

use failure::Failure;

/// Dynamic virtual power plant simulator.
#[derive(Debug, Parser)]
#[command(name = "dvpp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario with an optional event script and write traces.
    Simulate(SimulateArgs),
    /// Wind-turbine power step grid: 3 wind speeds by 6 demand steps.
    StepExperiment(StepArgs),
    /// Robust day-ahead offer for an uncertain price and availability profile.
    Offer(OfferArgs),
    /// Solve the dispatch of a scenario snapshot.
    Redispatch(RedispatchArgs),
    /// Parse and check a scenario and event script without running.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// Scenario file, or a built-in name: type-i, type-ii-south, type-ii-north, type-iii.
    #[arg(long, default_value = "type-i")]
    pub scenario: String,
    /// Event script (TOML, `[[event]]` tables).
    #[arg(long)]
    pub events: Option<PathBuf>,
    /// Overrides the DVPP droop gain D.
    #[arg(long)]
    pub spec_droop: Option<f64>,
    /// Overrides the DVPP virtual inertia H.
    #[arg(long)]
    pub spec_inertia: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Simulation settings (TOML); flags win over file values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Simulated time in seconds.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Seed for availability noise.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StrategyArg {
    Os1,
    Os2,
}

#[derive(Debug, Args)]
pub struct StepArgs {
    #[arg(long, value_enum, default_value = "os1")]
    pub strategy: StrategyArg,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Length of every step trace in seconds.
    #[arg(long)]
    pub duration: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OfferArgs {
    /// Market input (TOML with `gamma` and `[[period]]` intervals).
    #[arg(long)]
    pub input: PathBuf,
    /// Overrides the uncertainty budget.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Seed for the sampled certificate check.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RedispatchArgs {
    /// Scenario file or built-in name.
    #[arg(long, default_value = "type-i")]
    pub scenario: String,
    /// Overrides the DVPP output target in MW.
    #[arg(long)]
    pub target: Option<f64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Run length the event times are checked against.
    #[arg(long)]
    pub duration: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::StepExperiment(a) => commands::step_experiment(&a),
        Command::Offer(a) => commands::offer(&a),
        Command::Redispatch(a) => commands::redispatch(&a),
        Command::Validate(a) => commands::validate(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}
