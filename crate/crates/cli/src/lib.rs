//! Scenario-driven frontend: parse a scenario, dispatch the task, write CSVs
//! and a manifest.

pub mod error;
pub mod render;
pub mod scenario;
pub mod sweep;
pub mod table;
pub mod tasks;

use error::CliError;
use scenario::{Scenario, Task};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;
use table::Outputs;
use tasks::TaskFailure;

#[derive(Debug, Clone, PartialEq)]
pub struct RunArgs {
    /// Task name or `render`.
    pub task: String,
    pub scenario: Option<PathBuf>,
    pub workers: usize,
    pub out: PathBuf,
    pub seed: Option<u64>,
}

/// Run the command and return the process exit code. Diagnostics go to stderr.
pub fn execute(args: &RunArgs) -> i32 {
    if args.task == "render" {
        return match render::render_dir(&args.out) {
            Ok(made) => {
                for p in made {
                    println!("{}", p.display());
                }
                0
            }
            Err(e) => {
                eprintln!("ecopattern: {e}");
                e.exit_code()
            }
        };
    }
    match prepare(args) {
        Ok((task, sc, seed)) => run_prepared(args, task, &sc, seed),
        Err(e) => {
            eprintln!("ecopattern: {e}");
            e.exit_code()
        }
    }
}

fn prepare(args: &RunArgs) -> Result<(Task, Scenario, u64), CliError> {
    let task: Task = args.task.parse()?;
    let path = args.scenario.as_ref().ok_or_else(|| CliError::Parse("--scenario is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    let sc = Scenario::parse(&text)?;
    if let Some(named) = sc.task()? {
        if named != task {
            return Err(CliError::Parse(format!("scenario is for `{named}`, not `{task}`")));
        }
    }
    if args.workers == 0 {
        return Err(CliError::Parse("--workers must be at least 1".into()));
    }
    let seed = match args.seed {
        Some(s) => s,
        None => sc.get_or("", "seed", 0u64)?,
    };
    Ok((task, sc, seed))
}

fn run_prepared(args: &RunArgs, task: Task, sc: &Scenario, seed: u64) -> i32 {
    let start = Instant::now();
    let result = match task {
        Task::Sweep => sweep::run_sweep(sc, seed, args.workers).map_err(TaskFailure::from),
        _ => tasks::run_task(task, sc, seed),
    };
    let elapsed = start.elapsed().as_secs_f64();
    let (outputs, failure) = match result {
        Ok(out) => (out, None),
        Err(TaskFailure { error: e @ CliError::Parse(_), .. }) => {
            eprintln!("ecopattern: {e}");
            return e.exit_code();
        }
        Err(f) => (f.partial, Some(f.error)),
    };
    let status = match &failure {
        None => "ok".to_string(),
        Some(e) => format!("failed: {e}"),
    };
    if let Err(e) = write_outputs(&args.out, task, sc, seed, args.workers, elapsed, &outputs, &status) {
        eprintln!("ecopattern: {e}");
        return e.exit_code();
    }
    match failure {
        None => 0,
        Some(e) => {
            eprintln!("ecopattern: {e} (partial outputs in {})", args.out.display());
            e.exit_code()
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn write_outputs(
    dir: &Path,
    task: Task,
    sc: &Scenario,
    seed: u64,
    workers: usize,
    elapsed: f64,
    outputs: &Outputs,
    status: &str,
) -> Result<(), CliError> {
    outputs.write(dir)?;
    std::fs::write(dir.join("scenario.txt"), &sc.source)?;
    let mut m = String::new();
    let _ = writeln!(m, "tool = ecopattern {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(m, "task = {task}");
    let _ = writeln!(m, "seed = {seed}");
    let _ = writeln!(m, "workers = {workers}");
    let _ = writeln!(m, "status = {status}");
    let _ = writeln!(m, "wall_time_s = {elapsed:.3}");
    let names: Vec<String> = outputs.tables.iter().map(|t| format!("{}.csv", t.name)).collect();
    let _ = writeln!(m, "outputs = {}", names.join(", "));
    let _ = writeln!(m, "rerun = ecopattern {task} --scenario scenario.txt --seed {seed} --workers {workers}");
    if !outputs.facts.is_empty() {
        m.push_str("\n[facts]\n");
        for (k, v) in &outputs.facts {
            let _ = writeln!(m, "{k} = {v}");
        }
    }
    std::fs::write(dir.join("manifest.txt"), m)?;
    Ok(())
}
