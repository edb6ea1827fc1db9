//! End-to-end runs of the `ecopattern` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use tempfile::TempDir;

const PARAMS: &str = "[params]\na = 7\ne = 0.95\n";

struct Run {
    code: i32,
    out: PathBuf,
    stderr: String,
}

fn run(dir: &TempDir, task: &str, scenario: &str, extra: &[&str]) -> Run {
    let path = dir.path().join(format!("{task}.txt"));
    fs::write(&path, scenario).unwrap();
    let out = dir.path().join(format!("out_{task}"));
    let o = Command::new(env!("CARGO_BIN_EXE_ecopattern"))
        .arg(task)
        .arg("--scenario")
        .arg(&path)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .env_remove("ECOPATTERN_WORKERS")
        .output()
        .unwrap();
    Run { code: o.status.code().unwrap_or(-1), out, stderr: String::from_utf8_lossy(&o.stderr).into_owned() }
}

fn render(out: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_ecopattern"))
        .args(["render", "--out"])
        .arg(out)
        .status()
        .unwrap()
        .code()
        .unwrap_or(-1)
}

/// Rows of a CSV as header-keyed maps.
fn rows(path: &Path) -> Vec<Vec<(String, String)>> {
    let text = fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(str::to_string).collect();
    lines.map(|l| header.iter().cloned().zip(l.split(',').map(str::to_string)).collect()).collect()
}

fn field<'a>(row: &'a [(String, String)], name: &str) -> &'a str {
    &row.iter().find(|(k, _)| k == name).unwrap_or_else(|| panic!("no column {name}")).1
}

#[test]
fn turing_threshold_csv_and_manifest() {
    let dir = TempDir::new().unwrap();
    let r = run(&dir, "turing", &format!("task = turing\n{PARAMS}b = 5.65\nf = 0.98\nd = 80\n"), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rows = rows(&r.out.join("turing.csv"));
    let c_t: f64 = field(&rows[0], "c_T").parse().unwrap();
    assert!((c_t - 26.889081).abs() < 1e-5, "{c_t}");
    let manifest = fs::read_to_string(r.out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("task = turing") && manifest.contains("turing.csv"), "{manifest}");
    assert!(r.out.join("scenario.txt").exists());
}

#[test]
fn floats_use_seventeen_significant_digits() {
    let dir = TempDir::new().unwrap();
    let r = run(&dir, "turing", &format!("{PARAMS}b = 5.65\nf = 0.98\nd = 80\n"), &[]);
    let rows = rows(&r.out.join("turing.csv"));
    let text = field(&rows[0], "c_T");
    let digits = text.split(['e', 'E']).next().unwrap().chars().filter(char::is_ascii_digit).count();
    assert_eq!(digits, 17, "{text}");
}

#[test]
fn empty_interior_set_lists_boundary_equilibria_only() {
    let dir = TempDir::new().unwrap();
    // f above e a / (2 sqrt b)
    let r = run(&dir, "equilibria", &format!("{PARAMS}b = 7\nf = 1.3\n"), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let kinds: Vec<String> = rows(&r.out.join("equilibria.csv")).iter().map(|r| field(r, "kind").to_string()).collect();
    assert_eq!(kinds, ["E0", "E1"]);
}

#[test]
fn malformed_scenario_exits_2_without_outputs() {
    let dir = TempDir::new().unwrap();
    let r = run(&dir, "equilibria", "[params]\nb = 7\ne = 0.95\nf = 0.8\n", &[]);
    assert_eq!(r.code, 2);
    assert!(!r.out.exists() || fs::read_dir(&r.out).unwrap().next().is_none());

    let r = run(&dir, "turing", "[params\na = 7\n", &[]);
    assert_eq!(r.code, 2);
    let r = run(&dir, "ode", &format!("task = turing\n{PARAMS}b = 7\nf = 0.8\n"), &[]);
    assert_eq!(r.code, 2, "task mismatch");
}

#[test]
fn zero_workers_rejected() {
    let dir = TempDir::new().unwrap();
    let r = run(&dir, "equilibria", &format!("{PARAMS}b = 7\nf = 0.82\n"), &["--workers", "0"]);
    assert_eq!(r.code, 2);
}

#[test]
fn numeric_failure_exits_3_and_keeps_partial_frames() {
    let dir = TempDir::new().unwrap();
    let scenario = format!(
        "{PARAMS}b = 5.65\nf = 0.98\nd = 80\nc = 27\n[pde]\ncells = 64\nt_end = 100\nframe_dt = 1\nmax_steps = 300\n"
    );
    let r = run(&dir, "pde", &scenario, &[]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    let frames = rows(&r.out.join("frames.csv"));
    assert!(!frames.is_empty());
    let manifest = fs::read_to_string(r.out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("status = failed"), "{manifest}");
}

#[test]
fn seed_from_flag_is_recorded_and_reproducible() {
    let dir = TempDir::new().unwrap();
    let scenario = format!("{PARAMS}b = 5.65\nf = 0.98\nd = 80\nc = 30\n[pde]\ncells = 32\nlength = 40\nt_end = 5\nframe_dt = 1\n");
    let a = run(&dir, "pde", &scenario, &["--seed", "9"]);
    let frames_a = fs::read(a.out.join("frames.csv")).unwrap();
    let b = run(&dir, "pde", &scenario, &["--seed", "9"]);
    assert_eq!(frames_a, fs::read(b.out.join("frames.csv")).unwrap());
    assert!(fs::read_to_string(a.out.join("manifest.txt")).unwrap().contains("seed = 9"));
    let c = run(&dir, "pde", &scenario, &["--seed", "10"]);
    assert_ne!(frames_a, fs::read(c.out.join("frames.csv")).unwrap());
}

#[test]
fn one_dimensional_sweep_finds_branch_events() {
    let dir = TempDir::new().unwrap();
    let scenario = format!(
        "{PARAMS}b = 7\nf = 0.9\n[sweep]\ntasks = equilibria, cycles\nf = 0.75, 1.15, 41\n[cycles]\nics = 0.97, 0.45, 0.2, 0.07\n"
    );
    let r = run(&dir, "sweep", &scenario, &["--workers", "2"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let events: Vec<String> = rows(&r.out.join("sweep_events.csv")).iter().map(|r| field(r, "event").to_string()).collect();
    for kind in ["SN", "H", "SNLC"] {
        assert!(events.iter().any(|e| e == kind), "{kind} missing from {events:?}");
    }
    assert!(events.iter().filter(|e| *e == "SN").count() >= 2, "{events:?}");
    let merged = rows(&r.out.join("sweep_equilibria.csv"));
    let jobs: Vec<usize> = merged.iter().map(|r| field(r, "job").parse().unwrap()).collect();
    assert!(jobs.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(*jobs.last().unwrap(), 40);
}

#[test]
fn two_dimensional_sweep_overlays_codim2_points() {
    let dir = TempDir::new().unwrap();
    let scenario = format!("{PARAMS}b = 5\nf = 1\n[sweep]\ntasks = equilibria\nf = 0.9, 1.3, 3\nb = 4, 6, 3\ncodim2 = true\n");
    let r = run(&dir, "sweep", &scenario, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let points = rows(&r.out.join("codim2.csv"));
    for kind in ["CP", "GH", "BT"] {
        let row = points.iter().find(|r| field(r, "kind") == kind).unwrap_or_else(|| panic!("{kind} missing"));
        let (f, b): (f64, f64) = (field(row, "f").parse().unwrap(), field(row, "b").parse().unwrap());
        assert!((0.9..=1.3).contains(&f) && (4.0..=6.0).contains(&b));
    }
    assert_eq!(rows(&r.out.join("sweep_equilibria.csv")).iter().filter(|r| field(r, "kind") == "E0").count(), 9);
}

#[test]
fn sweep_failures_are_isolated() {
    let dir = TempDir::new().unwrap();
    // f = 0 is invalid, the other jobs still run
    let scenario = format!("{PARAMS}b = 7\nf = 0.8\n[sweep]\ntasks = equilibria\nf = 0, 0.8, 3\n");
    let r = run(&dir, "sweep", &scenario, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let failures = rows(&r.out.join("sweep_failures.csv"));
    assert_eq!(failures.len(), 1);
    assert_eq!(field(&failures[0], "job"), "0");
    let jobs: Vec<String> = rows(&r.out.join("sweep_equilibria.csv")).iter().map(|r| field(r, "job").to_string()).collect();
    assert!(jobs.contains(&"1".to_string()) && jobs.contains(&"2".to_string()));
}

#[test]
fn render_pde_heatmaps_and_amplitude_chart() {
    let dir = TempDir::new().unwrap();
    let pde = format!("{PARAMS}b = 5.65\nf = 0.98\nd = 80\nc = 30\n[pde]\ncells = 32\nlength = 40\nt_end = 10\nframe_dt = 1\n");
    let r = run(&dir, "pde", &pde, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(render(&r.out), 0);
    let pgm = fs::read_to_string(r.out.join("frames_u.pgm")).unwrap();
    assert!(pgm.starts_with("P2\n32 11\n"), "{}", &pgm[..20]);

    let r = run(&dir, "wna", &format!("{PARAMS}b = 5.65\nf = 0.98\nd = 80\nc = 27\n"), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(render(&r.out), 0);
    let svg = fs::read_to_string(r.out.join("amplitude.svg")).unwrap();
    assert!(svg.contains("stroke-dasharray"));
}

#[test]
fn render_rejects_empty_data() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("trajectory.csv"), "").unwrap();
    assert_eq!(render(dir.path()), 2);
    fs::write(dir.path().join("trajectory.csv"), "t,u,v\n").unwrap();
    assert_eq!(render(dir.path()), 2);
    assert_eq!(render(&dir.path().join("missing")), 2);
}

#[test]
fn ode_trajectory_csv() {
    let dir = TempDir::new().unwrap();
    let r = run(&dir, "ode", &format!("{PARAMS}b = 7\nf = 0.8\n[ode]\nic = 1.4, 0.05\nt_end = 50\nsample_dt = 1\n"), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let traj = rows(&r.out.join("trajectory.csv"));
    assert_eq!(traj.len(), 51);
    assert_eq!(traj[0].iter().map(|(k, _)| k.as_str()).collect::<Vec<_>>(), ["t", "u", "v"]);
}
