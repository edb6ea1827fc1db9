use clap::Parser;
use ecopattern_cli::{execute, RunArgs};
use std::path::PathBuf;

/// Bifurcation, pattern-formation and transient analysis of a prey-predator
/// model with group defense and prey-taxis.
#[derive(Parser, Debug)]
#[command(name = "ecopattern", version)]
struct Cli {
    /// equilibria, bifurcate, codim2, cycles, ode, transient, dispersion,
    /// turing, surface, pde, wna, sweep or render
    task: String,
    /// Scenario file (not needed for render)
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Worker threads for sweeps
    #[arg(long, env = "ECOPATTERN_WORKERS", default_value_t = 1)]
    workers: usize,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Base seed; overrides `seed` in the scenario
    #[arg(long)]
    seed: Option<u64>,
}

fn main() {
    let cli = Cli::parse();
    let code = execute(&RunArgs { task: cli.task, scenario: cli.scenario, workers: cli.workers, out: cli.out, seed: cli.seed });
    std::process::exit(code);
}
