//! One function per task. Each reads its own section of the scenario and
//! returns the tables it produced.

use crate::error::CliError;
use crate::scenario::{linspace, Scenario, Task};
use crate::table::{Cell, Outputs, Table};
use ecopattern::bifurcation::{
    codim2_points, hopf_thresholds, hopf_thresholds_in, lyapunov_first_coefficient, saddle_node_thresholds,
    transcritical_threshold, Control, ThresholdResult,
};
use ecopattern::cycles::{cycle_branch, PeriodicOrbit};
use ecopattern::equilibria::{find_equilibria, Equilibrium};
use ecopattern::integrate::{
    classify_attractor, cycle_fold_ghost, saddle_node_ghost, solve_ode_sampled, transient_time_near, AttractorKind,
    AttractorLabel, Ghost, Trajectory,
};
use ecopattern::pde::{
    field_statistics, simulate_pde, Field1D, GridSpec, PdeOptions, SteadyCriterion, TaxisScheme, NOISE_AMPLITUDE,
};
use ecopattern::spatial::{classify_region, dispersion, turing_threshold};
use ecopattern::wna::{amplitude_model, C2Convention, WnaOptions, PRINTED_QUINTIC_WEIGHT, TAYLOR_QUINTIC_WEIGHT};
use ecopattern::{Params, State};

/// A task that stopped on a numeric error after producing some output.
#[derive(Debug)]
pub struct TaskFailure {
    pub error: CliError,
    pub partial: Outputs,
}

impl From<CliError> for TaskFailure {
    fn from(error: CliError) -> Self {
        Self { error, partial: Outputs::default() }
    }
}

impl From<ecopattern::Error> for TaskFailure {
    fn from(e: ecopattern::Error) -> Self {
        CliError::from(e).into()
    }
}

pub type TaskResult = Result<Outputs, TaskFailure>;

/// Run a single (non-sweep) task.
pub fn run_task(task: Task, sc: &Scenario, seed: u64) -> TaskResult {
    match task {
        Task::Equilibria => equilibria(sc),
        Task::Bifurcate => bifurcate(sc),
        Task::Codim2 => codim2(sc),
        Task::Cycles => cycles(sc),
        Task::Ode => ode(sc),
        Task::Transient => transient(sc),
        Task::Dispersion => dispersion_task(sc),
        Task::Turing => turing(sc),
        Task::Surface => surface(sc),
        Task::Pde => pde(sc, seed),
        Task::Wna => wna(sc),
        Task::Sweep => Err(CliError::Parse("sweep cannot be nested".into()).into()),
    }
}

fn e1_star(p: &Params) -> Result<State, CliError> {
    find_equilibria(p)?
        .e1_star()
        .map(|e| e.state)
        .ok_or_else(|| ecopattern::Error::NotFound("no coexistence equilibrium E1*".into()).into())
}

/// `[section] state = u, v`, falling back to `E1*`.
fn base_state(sc: &Scenario, section: &str, p: &Params) -> Result<State, CliError> {
    match sc.state(section, "state")? {
        Some(s) => Ok(s),
        None => e1_star(p),
    }
}

fn equilibrium_row(t: &mut Table, prefix: Vec<Cell>, e: &Equilibrium) {
    let mut row = prefix;
    row.extend([
        Cell::from(e.kind.to_string()),
        e.state.u.into(),
        e.state.v.into(),
        e.stability.to_string().into(),
        e.eigenvalues[0].re.into(),
        e.eigenvalues[0].im.into(),
        e.eigenvalues[1].re.into(),
        e.eigenvalues[1].im.into(),
        e.degenerate.into(),
    ]);
    t.push(row);
}

const EQ_COLUMNS: [&str; 9] = ["kind", "u", "v", "stability", "re1", "im1", "re2", "im2", "degenerate"];

fn equilibria(sc: &Scenario) -> TaskResult {
    let p = sc.params()?;
    let set = find_equilibria(&p)?;
    let mut out = Outputs::default();
    let t = out.table("equilibria", &EQ_COLUMNS);
    for e in &set.equilibria {
        equilibrium_row(t, vec![], e);
    }
    out.fact("interior_count", set.interior_count());
    Ok(out)
}

fn control(sc: &Scenario, section: &str) -> Result<Control, CliError> {
    match sc.get_or(section, "control", "f".to_string())?.as_str() {
        "f" => Ok(Control::F),
        "b" => Ok(Control::B),
        other => Err(CliError::Parse(format!("[{section}] control must be `f` or `b`, got `{other}`"))),
    }
}

fn threshold_row(t: &mut Table, r: &ThresholdResult, l1: Option<f64>, criticality: Option<String>) {
    t.push(vec![
        r.kind.to_string().into(),
        r.control.to_string().into(),
        r.value.into(),
        r.state.u.into(),
        r.state.v.into(),
        r.period.into(),
        l1.into(),
        criticality.into(),
        r.residual.into(),
    ]);
}

fn bifurcate(sc: &Scenario) -> TaskResult {
    let s = "bifurcate";
    let p = sc.params()?;
    let ctl = control(sc, s)?;
    let range = sc.range(s, "range")?;
    let samples: usize = sc.get_or(s, "samples", 200)?;
    let want_cycles: bool = sc.get_or(s, "cycles", ctl == Control::F)?;
    if want_cycles && ctl != Control::F {
        return Err(CliError::Parse("[bifurcate] cycles = true needs control = f".into()).into());
    }

    let mut out = Outputs::default();
    let mut thresholds = Table::new(
        "thresholds",
        &["kind", "control", "value", "u", "v", "period", "l1", "criticality", "residual"],
    );
    if ctl == Control::F {
        threshold_row(&mut thresholds, &transcritical_threshold(&p), None, None);
    }
    for r in saddle_node_thresholds(&p, ctl) {
        threshold_row(&mut thresholds, &r, None, None);
    }
    let hopf = match range {
        Some((lo, hi)) => hopf_thresholds_in(&p, ctl, lo, hi, 800),
        None => hopf_thresholds(&p, ctl),
    };
    for h in &hopf {
        let (l1, crit) = match lyapunov_first_coefficient(&p, h) {
            Ok(c) => (Some(c.l1), Some(c.criticality.to_string())),
            Err(_) => (None, None),
        };
        threshold_row(&mut thresholds, h, l1, crit);
    }

    let mut failure = None;
    if want_cycles {
        let window = range.or_else(|| {
            let vals: Vec<f64> = hopf.iter().map(|h| h.value).collect();
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            lo.is_finite().then_some((lo - 0.05, hi + 0.05))
        });
        if let Some(window) = window {
            match cycle_branch(&p, window, None) {
                Ok(branch) => {
                    for (r, _) in &branch.folds {
                        threshold_row(&mut thresholds, r, None, None);
                    }
                    cycle_tables(&mut out, &branch.orbits, &branch.folds);
                }
                Err(e) => failure = Some(e),
            }
        }
    }
    out.tables.insert(0, thresholds);

    if let Some((lo, hi)) = range {
        let mut cols = vec!["value"];
        cols.extend(EQ_COLUMNS);
        let t = out.table("branch", &cols);
        for x in linspace(lo, hi, samples.max(2)) {
            let q = ctl.set(&p, x);
            if q.validate().is_err() {
                continue;
            }
            if let Ok(set) = find_equilibria(&q) {
                for e in &set.equilibria {
                    equilibrium_row(t, vec![x.into()], e);
                }
            }
        }
    }
    match failure {
        Some(e) => Err(TaskFailure { error: e.into(), partial: out }),
        None => Ok(out),
    }
}

fn cycle_tables(out: &mut Outputs, orbits: &[PeriodicOrbit], folds: &[(ThresholdResult, PeriodicOrbit)]) {
    let t = out.table("cycle_branch", &["f", "period", "u", "v", "multiplier", "stable", "residual"]);
    for o in orbits {
        t.push(vec![
            o.f.into(),
            o.period.into(),
            o.point.u.into(),
            o.point.v.into(),
            o.multiplier.into(),
            o.stable.into(),
            o.residual.into(),
        ]);
    }
    let t = out.table("cycle_folds", &["kind", "f", "period", "u", "v", "residual"]);
    for (r, o) in folds {
        t.push(vec![
            r.kind.to_string().into(),
            r.value.into(),
            o.period.into(),
            o.point.u.into(),
            o.point.v.into(),
            r.residual.into(),
        ]);
    }
}

fn codim2(sc: &Scenario) -> TaskResult {
    let p = sc.params()?;
    let mut points = codim2_points(p.a, p.e)?;
    // optional box filter for overlays on sweep grids
    if let (Some(fr), Some(br)) = (sc.range("codim2", "f_range")?, sc.range("codim2", "b_range")?) {
        points.retain(|c| (fr.0..=fr.1).contains(&c.f) && (br.0..=br.1).contains(&c.b));
    }
    let mut out = Outputs::default();
    let t = out.table("codim2", &["kind", "f", "b", "u", "v", "residual"]);
    for c in &points {
        t.push(vec![c.kind.to_string().into(), c.f.into(), c.b.into(), c.state.u.into(), c.state.v.into(), c.residual.into()]);
    }
    Ok(out)
}

fn attractor_cells(label: &AttractorLabel) -> Vec<Cell> {
    let (period, amplitude) = match label.kind {
        AttractorKind::LimitCycle { period, amplitude } => (Some(period), Some(amplitude)),
        _ => (None, None),
    };
    vec![
        label.to_string().into(),
        period.into(),
        amplitude.into(),
        label.terminal.u.into(),
        label.terminal.v.into(),
        label.t_final.into(),
    ]
}

const ATTRACTOR_COLUMNS: [&str; 6] = ["label", "period", "amplitude", "terminal_u", "terminal_v", "t_final"];

fn cycles(sc: &Scenario) -> TaskResult {
    let s = "cycles";
    let p = sc.params()?;
    let mut out = Outputs::default();
    if let Some(range) = sc.range(s, "range")? {
        let branch = cycle_branch(&p, range, None)?;
        cycle_tables(&mut out, &branch.orbits, &branch.folds);
        out.fact("branch_ends", branch.ends.join("; "));
        return Ok(out);
    }
    // Basin probes: E1* nudged, plus any listed starting points.
    let mut ics = Vec::new();
    if let Ok(eq) = e1_star(&p) {
        ics.push(State::new(eq.u + 0.02, eq.v));
    }
    if let Some(list) = sc.list::<f64>(s, "ics")? {
        if list.len() % 2 != 0 {
            return Err(CliError::Parse("[cycles] ics: expected u, v pairs".into()).into());
        }
        ics.extend(list.chunks(2).map(|c| State::new(c[0], c[1])));
    }
    if ics.is_empty() {
        return Err(ecopattern::Error::NotFound("no E1* to probe from and no `ics` given".into()).into());
    }
    let mut cols = vec!["u0", "v0"];
    cols.extend(ATTRACTOR_COLUMNS);
    let t = out.table("attractors", &cols);
    for ic in ics {
        let label = classify_attractor(&p, ic)?;
        let mut row: Vec<Cell> = vec![ic.u.into(), ic.v.into()];
        row.extend(attractor_cells(&label));
        t.push(row);
    }
    Ok(out)
}

fn trajectory_table(tr: &Trajectory) -> Table {
    let mut t = Table::new("trajectory", &["t", "u", "v"]);
    for (time, s) in tr.times.iter().zip(&tr.states) {
        t.push(vec![(*time).into(), s.u.into(), s.v.into()]);
    }
    t
}

fn ode(sc: &Scenario) -> TaskResult {
    let s = "ode";
    let p = sc.params()?;
    let ic: State = sc.state(s, "ic")?.ok_or_else(|| CliError::Parse("missing `ic` in [ode]".into()))?;
    let t_end: f64 = sc.require(s, "t_end")?;
    let rel_tol: f64 = sc.get_or(s, "rel_tol", 1e-8)?;
    let sample_dt: Option<f64> = sc.get(s, "sample_dt")?;
    let classify: bool = sc.get_or(s, "classify", false)?;
    let mut out = Outputs::default();
    match solve_ode_sampled(&p, ic, t_end, rel_tol, sample_dt) {
        Ok(tr) => {
            out.fact("steps", tr.stats.steps);
            out.fact("rejected_steps", tr.stats.rejected);
            out.tables.push(trajectory_table(&tr));
        }
        Err(fail) => {
            out.tables.push(trajectory_table(&fail.partial));
            return Err(TaskFailure { error: fail.error.into(), partial: out });
        }
    }
    if classify {
        let label = classify_attractor(&p, ic).map_err(|e| TaskFailure { error: e.into(), partial: out.clone() })?;
        out.table("attractor", &ATTRACTOR_COLUMNS).push(attractor_cells(&label));
    }
    Ok(out)
}

fn transient(sc: &Scenario) -> TaskResult {
    let s = "transient";
    let p = sc.params()?;
    let ic: State = sc.state(s, "ic")?.ok_or_else(|| CliError::Parse("missing `ic` in [transient]".into()))?;
    let delta: f64 = sc.get_or(s, "delta", 1e-2)?;
    let ghost_kind = sc.get_or(s, "ghost", "auto".to_string())?;
    let ghost = match ghost_kind.as_str() {
        "auto" => saddle_node_ghost(&p).or_else(|| cycle_fold_ghost(&p)),
        "sn" => saddle_node_ghost(&p),
        "cycle" => cycle_fold_ghost(&p),
        other => return Err(CliError::Parse(format!("[transient] ghost must be auto, sn or cycle, got `{other}`")).into()),
    }
    .ok_or_else(|| ecopattern::Error::NotFound(format!("no ghost near f = {}", p.f)))?;
    let ghost_name = match ghost {
        Ghost::Point(_) => "saddle-node",
        Ghost::Cycle(_) => "cycle-fold",
    };
    let r = transient_time_near(&p, ic, delta, &ghost)?;
    let mut out = Outputs::default();
    let mut cols = vec!["f", "b", "u0", "v0", "delta", "ghost", "dwell", "t_total"];
    cols.extend(ATTRACTOR_COLUMNS);
    let mut row: Vec<Cell> =
        vec![p.f.into(), p.b.into(), ic.u.into(), ic.v.into(), r.delta.into(), ghost_name.into(), r.dwell.into(), r.t_total.into()];
    row.extend(attractor_cells(&r.label));
    out.table("transient", &cols).push(row);
    Ok(out)
}

fn dispersion_task(sc: &Scenario) -> TaskResult {
    let s = "dispersion";
    let p = sc.spatial_params()?;
    let eq = base_state(sc, s, &p)?;
    let k_grid = match sc.grid(s, "k_grid")? {
        Some(g) => g,
        None => {
            let k_min = ecopattern::spatial::Linearization::new(&p, eq)?.k_min();
            linspace(0.0, 3.0 * k_min.max(0.05), 301)
        }
    };
    let r = dispersion(&p, eq, &k_grid)?;
    let mut out = Outputs::default();
    let t = out.table("dispersion", &["k", "T", "H", "re_lambda"]);
    for i in 0..r.k.len() {
        t.push(vec![r.k[i].into(), r.trace[i].into(), r.det[i].into(), r.re_lambda[i].into()]);
    }
    out.fact("k_min", r.k_min);
    out.fact("h_min", r.h_min);
    out.fact("region", classify_region(&p, eq)?.to_string());
    Ok(out)
}

fn turing(sc: &Scenario) -> TaskResult {
    let p = sc.spatial_params()?;
    let eq = base_state(sc, "turing", &p)?;
    let tp = turing_threshold(&p, eq)?;
    let mut out = Outputs::default();
    out.table("turing", &["a", "b", "e", "f", "d", "c", "u", "v", "c_T", "k_T", "region"]).push(vec![
        p.a.into(),
        p.b.into(),
        p.e.into(),
        p.f.into(),
        p.d.into(),
        p.c.into(),
        eq.u.into(),
        eq.v.into(),
        tp.c_t.into(),
        tp.k_t.into(),
        tp.region.to_string().into(),
    ]);
    Ok(out)
}

fn surface(sc: &Scenario) -> TaskResult {
    let s = "surface";
    let p = sc.params()?;
    let fs = sc.grid(s, "f")?.ok_or_else(|| CliError::Parse("missing `f = lo, hi, n` in [surface]".into()))?;
    let ds = sc.grid(s, "d")?.ok_or_else(|| CliError::Parse("missing `d = lo, hi, n` in [surface]".into()))?;
    let mut out = Outputs::default();
    let t = out.table("surface", &["f", "d", "c_T", "k_T", "hopf"]);
    for &f in &fs {
        for &d in &ds {
            let q = p.with_f(f).with_d(d);
            let point = q.validate().ok().and_then(|_| {
                let eq = e1_star(&q).ok()?;
                let tp = turing_threshold(&q, eq).ok()?;
                let lin = ecopattern::spatial::Linearization::new(&q, eq).ok()?;
                Some((tp, lin.trace(0.0) > 0.0))
            });
            match point {
                Some((tp, hopf)) => t.push(vec![f.into(), d.into(), tp.c_t.into(), tp.k_t.into(), hopf.into()]),
                None => t.push(vec![f.into(), d.into(), Cell::Empty, Cell::Empty, Cell::Empty]),
            }
        }
    }
    Ok(out)
}

fn wna_options(sc: &Scenario, s: &str) -> Result<WnaOptions, CliError> {
    let mut o = WnaOptions::default();
    o.convention = match sc.get_or(s, "c2", "relative".to_string())?.as_str() {
        "relative" => C2Convention::Relative,
        "absolute" => C2Convention::Absolute,
        other => return Err(CliError::Parse(format!("[{s}] c2 must be relative or absolute, got `{other}`"))),
    };
    o.quintic_weight = match sc.get_or(s, "quintic_weight", "printed".to_string())?.as_str() {
        "printed" => PRINTED_QUINTIC_WEIGHT,
        "taylor" => TAYLOR_QUINTIC_WEIGHT,
        other => return Err(CliError::Parse(format!("[{s}] quintic_weight must be printed or taylor, got `{other}`"))),
    };
    Ok(o)
}

fn wna(sc: &Scenario) -> TaskResult {
    let s = "wna";
    let p = sc.spatial_params()?;
    let m = amplitude_model(&p, wna_options(sc, s)?)?;
    let fold = m.fold();
    let mut out = Outputs::default();
    out.table("wna", &["c_T", "k_T", "c2", "sigma", "l", "sigma_p", "l_p", "rho_p", "c_fold"]).push(vec![
        m.c_t.into(),
        m.k_t.into(),
        m.c2.into(),
        m.sigma.into(),
        m.l.into(),
        m.sigma_p.into(),
        m.l_p.into(),
        m.rho_p.into(),
        fold.into(),
    ]);
    let t = out.table("workspace", &["name", "u", "v"]);
    for (name, w) in m.workspace.named() {
        t.push(vec![name.into(), w[0].into(), w[1].into()]);
    }
    let cs = match sc.grid(s, "c_grid")? {
        Some(g) => g,
        None => linspace(fold.unwrap_or(m.c_t - 3.0).min(m.c_t) - 2.0, m.c_t + 3.0, 201),
    };
    let t = out.table("amplitude", &["c", "B_stable", "B_unstable", "branch"]);
    for r in m.amplitude_curve(&cs) {
        t.push(vec![r.c.into(), r.stable.into(), r.unstable.into(), r.branch.into()]);
    }
    out.fact("max_residual", m.workspace.max_residual);
    out.fact("max_fredholm", m.workspace.max_fredholm);
    if p.c > 0.0 {
        let pred = m.pattern_prediction(p.c)?;
        if pred.b > 0.0 {
            let n = 200;
            let period = 2.0 * std::f64::consts::PI / m.k_t;
            let t = out.table("profile", &["x", "u", "v"]);
            for i in 0..=n {
                let x = period * i as f64 / n as f64;
                let st = pred.profile.eval(x);
                t.push(vec![x.into(), st.u.into(), st.v.into()]);
            }
            out.fact("predicted_peak_to_peak_u", pred.profile.peak_to_peak_u());
        }
        out.fact("eps2", pred.eps2);
        out.fact("B", pred.b);
        if let Some(a) = pred.a_inf {
            out.fact("A_inf", a);
        }
    }
    Ok(out)
}

fn grid_for(sc: &Scenario, s: &str, p: &Params) -> Result<GridSpec, CliError> {
    let cells: usize = sc.get_or(s, "cells", 1024)?;
    let grid = match sc.get::<f64>(s, "length")? {
        Some(l) => GridSpec::new(l, cells),
        None => {
            let waves: usize = sc.get_or(s, "wavelengths", 9)?;
            let eq = e1_star(p)?;
            let k = turing_threshold(p, eq)?.k_t;
            if !(k > 0.0) {
                return Err(CliError::Parse(format!("[{s}] no Turing wavenumber here; set `length`")));
            }
            GridSpec::fitted(k, waves, cells)
        }
    };
    grid.map_err(|e| CliError::Parse(format!("[{s}] {e}")))
}

fn initial_field(sc: &Scenario, s: &str, p: &Params, grid: &GridSpec, seed: u64) -> Result<Field1D, TaskFailure> {
    let ic = sc.get_or(s, "ic", "noise".to_string())?;
    let amplitude: f64 = sc.get_or(s, "amplitude", NOISE_AMPLITUDE)?;
    let field = match ic.as_str() {
        "homogeneous" => Field1D::homogeneous(grid, base_state(sc, s, p)?),
        "noise" => Field1D::noisy(grid, base_state(sc, s, p)?, amplitude, seed)?,
        "cosine" => {
            let base = base_state(sc, s, p)?;
            let modes: f64 = sc.get_or(s, "mode", 1.0)?;
            let k = modes * std::f64::consts::PI / grid.length;
            Field1D::from_fn(grid, |x| State::new((base.u + amplitude * (k * x).cos()).max(0.0), base.v))
        }
        "block" => {
            // noise confined to the middle half of the domain
            let base = base_state(sc, s, p)?;
            let noisy = Field1D::noisy(grid, base, amplitude, seed)?;
            let mut f = Field1D::homogeneous(grid, base);
            for i in 0..grid.cells {
                if (grid.x(i) - 0.5 * grid.length).abs() < 0.25 * grid.length {
                    f.u[i] = noisy.u[i];
                    f.v[i] = noisy.v[i];
                }
            }
            f
        }
        "wna" => {
            let m = amplitude_model(p, wna_options(sc, "wna")?)?;
            let pred = m.pattern_prediction(p.c)?;
            if !(pred.b > 0.0) {
                return Err(ecopattern::Error::NotFound(format!("no stable pattern predicted at c = {}", p.c)).into());
            }
            let profile = pred.profile;
            Field1D::from_fn(grid, |x| {
                let st = profile.eval(x);
                State::new(st.u.max(0.0), st.v.max(0.0))
            })
        }
        other => {
            return Err(CliError::Parse(format!(
                "[{s}] ic must be homogeneous, noise, cosine, block or wna, got `{other}`"
            ))
            .into())
        }
    };
    Ok(field)
}

fn frame_tables(out: &mut Outputs, frames: &[Field1D], grid: &GridSpec, every: usize) {
    let t = out.table("frames", &["t", "x", "u", "v"]);
    for f in frames.iter().step_by(every.max(1)) {
        for i in 0..grid.cells {
            t.push(vec![f.t.into(), grid.x(i).into(), f.u[i].into(), f.v[i].into()]);
        }
    }
    let t = out.table("series", &["t", "mean_u", "mean_v", "peak_to_peak_u"]);
    for f in frames {
        let (lo, hi) = f.u.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        t.push(vec![f.t.into(), f.mean_u().into(), f.mean_v().into(), (hi - lo).into()]);
    }
}

fn pde(sc: &Scenario, seed: u64) -> TaskResult {
    let s = "pde";
    let p = sc.spatial_params()?;
    let grid = grid_for(sc, s, &p)?;
    let ic = initial_field(sc, s, &p, &grid, seed)?;
    let defaults = PdeOptions::default();
    let opts = PdeOptions {
        t_end: sc.get_or(s, "t_end", defaults.t_end)?,
        frame_dt: sc.get_or(s, "frame_dt", defaults.frame_dt)?,
        rel_tol: sc.get_or(s, "rel_tol", defaults.rel_tol)?,
        scheme: match sc.get_or(s, "scheme", "central".to_string())?.as_str() {
            "central" => TaxisScheme::Central,
            "upwind" => TaxisScheme::Upwind,
            other => return Err(CliError::Parse(format!("[{s}] scheme must be central or upwind, got `{other}`")).into()),
        },
        reactions: sc.get_or(s, "reactions", true)?,
        steady: sc.get_or(s, "steady", false)?.then(SteadyCriterion::default),
        max_steps: sc.get(s, "max_steps")?,
        ..defaults
    };
    let every: usize = sc.get_or(s, "frame_every", 1)?;
    let stats_from: f64 = sc.get_or(s, "stats_from", 0.0)?;

    let mut out = Outputs::default();
    out.fact("length", grid.length);
    out.fact("cells", grid.cells);
    let run = match simulate_pde(&p, &grid, &ic, &opts) {
        Ok(run) => run,
        Err(fail) => {
            frame_tables(&mut out, &fail.frames, &grid, every);
            return Err(TaskFailure { error: fail.error.into(), partial: out });
        }
    };
    frame_tables(&mut out, &run.frames, &grid, every);
    let t = out.table("bounds", &["t", "K1", "K2", "A", "B", "C", "u_min", "u_max", "v_min", "holds"]);
    for b in &run.bounds {
        t.push(vec![
            b.t.into(),
            b.k1.into(),
            b.k2.into(),
            b.a.into(),
            b.b.into(),
            b.c.into(),
            b.u_min.into(),
            b.u_max.into(),
            b.v_min.into(),
            b.holds().into(),
        ]);
    }
    let window: Vec<Field1D> = run.frames.iter().filter(|f| f.t >= stats_from).cloned().collect();
    let window = if window.is_empty() { vec![run.last().clone()] } else { window };
    let st = field_statistics(&window, &grid)?;
    let last = field_statistics(std::slice::from_ref(run.last()), &grid)?;
    out.table(
        "stats",
        &[
            "t_final",
            "mean_u",
            "mean_v",
            "peak_to_peak_u",
            "dominant_mode",
            "dominant_wavenumber",
            "window_start",
            "temporal_std_mean_u",
            "spatial_std_u",
            "spatial_std_u_max",
            "steady_at",
        ],
    )
    .push(vec![
        run.last().t.into(),
        last.mean_u.into(),
        last.mean_v.into(),
        last.peak_to_peak_u.into(),
        last.dominant_mode.map(|m| m as u64).into(),
        last.dominant_wavenumber.into(),
        window[0].t.into(),
        st.temporal_std_mean_u.into(),
        st.spatial_std_u.into(),
        st.spatial_std_u_max.into(),
        run.steady_at.into(),
    ]);
    out.fact("steps", run.stats.steps);
    Ok(out)
}
