//! `uavplan`: generate scenarios, solve them, export and import the MILP,
//! evaluate plans and run engine comparisons.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use uavplan::experiments::EquipmentMode;

#[derive(Debug, Parser)]
#[command(name = "uavplan", version, about = "Mission planning for multitask UAV fleets")]
struct Cli {
    /// Generator seed (echoed in manifests of other commands).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; sibling files share its name.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print machine-readable JSON on standard output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a seeded synthetic scenario.
    Generate(GenerateArgs),
    /// Check a scenario file.
    Validate { scenario: PathBuf },
    /// Solve a scenario with the heuristic or the exact engine.
    Solve(SolveArgs),
    /// Write the linear model in CPLEX LP format.
    ExportLp { scenario: PathBuf },
    /// Turn an external `name value` solution of the exported model into a plan.
    ImportSolution { scenario: PathBuf, solution: PathBuf },
    /// Check a plan and report its satisfaction.
    Evaluate { scenario: PathBuf, plan: PathBuf },
    /// Run several engines over fleet sizes and equipment modes into a CSV.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SizePreset {
    /// 40 locations, 50 zones, 10 UAVs, 20 deliveries, 20 epochs.
    SfSmall,
    /// 3 locations, 2 zones, 2 UAVs, 1 delivery, 3 epochs.
    Small,
    /// 3 locations, 2 zones, 2 UAVs, 1 delivery, 4 epochs.
    Tiny,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "sf-small")]
    preset: SizePreset,
    #[arg(long)]
    locations: Option<usize>,
    #[arg(long)]
    zones: Option<usize>,
    #[arg(long)]
    uavs: Option<usize>,
    #[arg(long)]
    deliveries: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Satisfaction horizon H.
    #[arg(long)]
    horizon: Option<usize>,
    /// Give every delivery its own target location.
    #[arg(long)]
    unique_targets: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EngineKind {
    Heuristic,
    Exact,
}

#[derive(Debug, Args)]
struct WeightArgs {
    /// Heuristic weights preset: save-time, coverage or monitoring.
    #[arg(long, conflicts_with_all = ["alpha1", "alpha2"])]
    preset: Option<String>,
    /// Weight of coverage in the insertion cost.
    #[arg(long)]
    alpha1: Option<f64>,
    /// Weight of monitoring in the insertion cost.
    #[arg(long)]
    alpha2: Option<f64>,
}

#[derive(Debug, Args)]
struct ExactArgs {
    #[arg(long, default_value_t = 5_000_000)]
    max_assignments: u64,
    /// Wall-clock budget in seconds; none by default so results do not
    /// depend on machine speed.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Search UAV trajectories on all cores.
    #[arg(long)]
    parallel: bool,
}

#[derive(Debug, Args)]
struct SolveArgs {
    scenario: PathBuf,
    #[arg(long, value_enum, default_value = "heuristic")]
    engine: EngineKind,
    #[command(flatten)]
    weights: WeightArgs,
    #[command(flatten)]
    exact: ExactArgs,
    #[arg(long, default_value = "flexible")]
    equipment: EquipmentMode,
    /// Override the fleet size.
    #[arg(long)]
    uavs: Option<usize>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    scenario: PathBuf,
    /// `exact`, `heuristic`, `heuristic:PRESET` or `heuristic:A1,A2`; repeatable.
    #[arg(long = "run", required = true)]
    runs: Vec<String>,
    /// Fleet sizes to sweep, comma separated.
    #[arg(long, value_delimiter = ',')]
    uavs: Vec<usize>,
    /// Equipment modes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "flexible")]
    equipment: Vec<EquipmentMode>,
    #[command(flatten)]
    exact: ExactArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            f.code()
        }
    }
}
