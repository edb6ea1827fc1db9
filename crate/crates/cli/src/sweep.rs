//! Parameter sweeps: a grid of jobs run on a worker pool and merged in job order.
//!
//! ```text
//! [sweep]
//! tasks = equilibria, cycles
//! f = 0.75, 1.15, 81
//! ```

use crate::error::CliError;
use crate::scenario::{Scenario, Task};
use crate::table::{format_f64, Cell, Outputs, Table};
use crate::tasks::run_task;
use rayon::prelude::*;

const AXES: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepJob {
    pub index: usize,
    pub overrides: Vec<(&'static str, f64)>,
    pub seed: u64,
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn job_seed(base: u64, index: usize) -> u64 {
    mix(mix(base) ^ index as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub tasks: Vec<Task>,
    pub axes: Vec<(&'static str, Vec<f64>)>,
    pub jobs: Vec<SweepJob>,
}

pub fn plan(sc: &Scenario, base_seed: u64) -> Result<SweepPlan, CliError> {
    let s = "sweep";
    if sc.has_section("dimensional") {
        return Err(CliError::Parse("sweeps override [params]; use dimensionless parameters".into()));
    }
    let tasks: Vec<Task> = sc.list(s, "tasks")?.ok_or_else(|| CliError::Parse("missing `tasks` in [sweep]".into()))?;
    if tasks.contains(&Task::Sweep) {
        return Err(CliError::Parse("sweep cannot be nested".into()));
    }
    let mut axes = Vec::new();
    for name in AXES {
        if let Some(values) = sc.grid(s, name)? {
            axes.push((name, values));
        }
    }
    if axes.is_empty() {
        return Err(CliError::Parse("[sweep] needs at least one range such as `f = lo, hi, n`".into()));
    }
    // Row-major: the last axis varies fastest.
    let total: usize = axes.iter().map(|(_, v)| v.len()).product();
    let jobs = (0..total)
        .map(|index| {
            let mut rest = index;
            let mut overrides = vec![("", 0.0); axes.len()];
            for (slot, (name, values)) in overrides.iter_mut().zip(&axes).rev() {
                *slot = (*name, values[rest % values.len()]);
                rest /= values.len();
            }
            SweepJob { index, overrides, seed: job_seed(base_seed, index) }
        })
        .collect();
    Ok(SweepPlan { tasks, axes, jobs })
}

struct JobOutcome {
    outputs: Vec<Outputs>,
    failures: Vec<(Task, String)>,
}

fn run_job(sc: &Scenario, tasks: &[Task], job: &SweepJob) -> JobOutcome {
    let mut local = sc.clone();
    for (name, value) in &job.overrides {
        local.set("params", name, format_f64(*value));
    }
    let mut outcome = JobOutcome { outputs: Vec::new(), failures: Vec::new() };
    for &task in tasks {
        match run_task(task, &local, job.seed) {
            Ok(out) => outcome.outputs.push(out),
            Err(fail) => {
                outcome.failures.push((task, fail.error.to_string()));
                outcome.outputs.push(fail.partial);
            }
        }
    }
    outcome
}

/// Run every job on `workers` threads and merge per-table in job order.
pub fn run_sweep(sc: &Scenario, base_seed: u64, workers: usize) -> Result<Outputs, CliError> {
    let plan = plan(sc, base_seed)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Parse(format!("worker pool: {e}")))?;
    let outcomes: Vec<JobOutcome> = pool.install(|| plan.jobs.par_iter().map(|j| run_job(sc, &plan.tasks, j)).collect());

    let axis_names: Vec<&str> = plan.axes.iter().map(|(n, _)| *n).collect();
    let prefix = |job: &SweepJob| -> Vec<Cell> {
        let mut row: Vec<Cell> = vec![job.index.into(), job.seed.into()];
        row.extend(job.overrides.iter().map(|(_, v)| Cell::from(*v)));
        row
    };

    let mut merged = Outputs::default();
    let mut failures = Table::new("sweep_failures", &[&["job", "seed"][..], &axis_names, &["task", "error"]].concat());
    for (job, outcome) in plan.jobs.iter().zip(&outcomes) {
        for out in &outcome.outputs {
            for t in &out.tables {
                let name = format!("sweep_{}", t.name);
                let idx = match merged.tables.iter().position(|m| m.name == name) {
                    Some(i) => i,
                    None => {
                        let mut header: Vec<&str> = vec!["job", "seed"];
                        header.extend(&axis_names);
                        header.extend(t.header.iter().map(String::as_str));
                        merged.tables.push(Table::new(&name, &header));
                        merged.tables.len() - 1
                    }
                };
                for r in &t.rows {
                    let mut row = prefix(job);
                    row.extend(r.iter().cloned());
                    merged.tables[idx].push(row);
                }
            }
        }
        for (task, err) in &outcome.failures {
            let mut row = prefix(job);
            row.extend([Cell::from(task.name()), Cell::from(err.as_str())]);
            failures.push(row);
        }
    }
    if plan.axes.len() == 1 {
        merged.tables.push(events(&plan, &merged));
    }
    if sc.get_or("sweep", "codim2", false)? {
        let mut local = sc.clone();
        for (name, values) in &plan.axes {
            if matches!(*name, "f" | "b") {
                let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                local.set("codim2", &format!("{name}_range"), format!("{}, {}", format_f64(lo), format_f64(hi)));
            }
        }
        match run_task(Task::Codim2, &local, base_seed) {
            Ok(out) => merged.tables.extend(out.tables),
            Err(fail) => {
                let mut row: Vec<Cell> = vec![Cell::Empty, base_seed.into()];
                row.extend(axis_names.iter().map(|_| Cell::Empty));
                row.extend([Cell::from("codim2"), Cell::from(fail.error.to_string())]);
                failures.push(row);
            }
        }
    }
    merged.fact("jobs", plan.jobs.len());
    merged.fact("failed_jobs", outcomes.iter().filter(|o| !o.failures.is_empty()).count());
    merged.tables.push(failures);
    Ok(merged)
}

/// Qualitative changes between neighbouring jobs of a 1-D sweep, read off the
/// merged equilibria and attractor tables.
fn events(plan: &SweepPlan, merged: &Outputs) -> Table {
    let axis = plan.axes[0].0;
    let mut t = Table::new("sweep_events", &["event", "from", "to", "detail"]);
    let n = plan.jobs.len();
    let column = |table: &Table, name: &str| table.header.iter().position(|h| h == name);
    let by_job = |name: &str| -> Vec<Vec<Vec<Cell>>> {
        let mut rows = vec![Vec::new(); n];
        if let Some(table) = merged.get(name) {
            for r in &table.rows {
                if let Cell::I(j) = r[0] {
                    rows[j as usize].push(r.clone());
                }
            }
        }
        rows
    };
    let eq = by_job("sweep_equilibria");
    let att = by_job("sweep_attractors");
    let eq_table = merged.get("sweep_equilibria");
    let att_table = merged.get("sweep_attractors");
    let text = |c: &Cell| match c {
        Cell::S(s) => s.clone(),
        _ => String::new(),
    };
    let summary = |rows: &[Vec<Cell>]| -> (usize, Vec<(String, String)>) {
        let Some(tb) = eq_table else { return (0, Vec::new()) };
        let (k, st) = (column(tb, "kind").unwrap(), column(tb, "stability").unwrap());
        let im = column(tb, "im1").unwrap();
        let interior = rows.iter().filter(|r| text(&r[k]).ends_with('*')).count();
        let labels = rows
            .iter()
            .map(|r| {
                let complex = matches!(r[im], Cell::F(x) if x != 0.0);
                (text(&r[k]), format!("{}{}", text(&r[st]), if complex { "-focus" } else { "" }))
            })
            .collect();
        (interior, labels)
    };
    let cycle_period = |rows: &[Vec<Cell>]| -> Option<f64> {
        let tb = att_table?;
        let (l, per) = (column(tb, "label").unwrap(), column(tb, "period").unwrap());
        rows.iter()
            .filter(|r| text(&r[l]).starts_with("cycle"))
            .filter_map(|r| if let Cell::F(x) = r[per] { Some(x) } else { None })
            .reduce(f64::max)
    };
    let periods: Vec<Option<f64>> = att.iter().map(|r| cycle_period(r)).collect();
    let shortest = periods.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    // a single job disagreeing with both neighbours is a basin artefact of the probes
    let mut present: Vec<bool> = periods.iter().map(Option::is_some).collect();
    for j in 1..n.saturating_sub(1) {
        if present[j - 1] == present[j + 1] && present[j] != present[j - 1] {
            present[j] = present[j - 1];
        }
    }
    let value = |j: usize| Cell::F(plan.jobs[j].overrides[0].1);
    for j in 1..n {
        let (c0, l0) = summary(&eq[j - 1]);
        let (c1, l1) = summary(&eq[j]);
        let axial_changed = l0.iter().find(|(k, _)| k == "E1") != l1.iter().find(|(k, _)| k == "E1");
        if c0 != c1 {
            let kind = if axial_changed { "TC" } else { "SN" };
            t.push(vec![kind.into(), value(j - 1), value(j), format!("{axis}: interior {c0} -> {c1}").into()]);
        }
        let mut hopf = false;
        for (k, s0) in &l0 {
            if let Some((_, s1)) = l1.iter().find(|(k1, _)| k1 == k) {
                let (f0, f1) = (s0.ends_with("-focus"), s1.ends_with("-focus"));
                if f0 && f1 && s0 != s1 {
                    hopf = true;
                    t.push(vec!["H".into(), value(j - 1), value(j), format!("{k}: {s0} -> {s1}").into()]);
                }
            }
        }
        if present[j - 1] != present[j] && !hopf {
            // a cycle that ends with a diverging period is homoclinic
            let period = periods[j - 1].or(periods[j]).unwrap_or(f64::NAN);
            let kind = if period > 2.0 * shortest { "HOM" } else { "SNLC" };
            t.push(vec![kind.into(), value(j - 1), value(j), format!("stable cycle, period {period:.4}").into()]);
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_depend_only_on_base_and_index() {
        assert_eq!(job_seed(7, 3), job_seed(7, 3));
        assert_ne!(job_seed(7, 3), job_seed(7, 4));
        assert_ne!(job_seed(7, 3), job_seed(8, 3));
    }

    #[test]
    fn plan_is_row_major() {
        let sc = Scenario::parse("[params]\na=7\nb=7\ne=0.95\nf=0.9\n[sweep]\ntasks = equilibria\nf = 0.8, 0.9, 2\nb = 5, 7, 3\n")
            .unwrap();
        let p = plan(&sc, 1).unwrap();
        assert_eq!(p.jobs.len(), 6);
        assert_eq!(p.jobs[0].overrides, vec![("b", 5.0), ("f", 0.8)]);
        assert_eq!(p.jobs[1].overrides, vec![("b", 5.0), ("f", 0.9)]);
        assert_eq!(p.jobs[5].overrides, vec![("b", 7.0), ("f", 0.9)]);
        assert!(p.jobs.iter().enumerate().all(|(i, j)| j.index == i));
    }

    #[test]
    fn plan_errors() {
        let base = "[params]\na=7\nb=7\ne=0.95\nf=0.9\n";
        assert!(plan(&Scenario::parse(&format!("{base}[sweep]\nf = 0.8, 0.9, 2\n")).unwrap(), 0).is_err());
        assert!(plan(&Scenario::parse(&format!("{base}[sweep]\ntasks = turing\n")).unwrap(), 0).is_err());
        assert!(plan(&Scenario::parse(&format!("{base}[sweep]\ntasks = sweep\nf = 0.8, 0.9, 2\n")).unwrap(), 0).is_err());
    }
}
