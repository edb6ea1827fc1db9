//! Trajectories of the temporal model, attractor labels and transient dwell times.

use crate::bifurcation::{saddle_node_thresholds, Control};
use crate::equilibria::{find_equilibria, EquilibriumKind, Stability};
use crate::error::{domain, Error, Result};
use crate::kinetics::{rates_unchecked, Params, State};
use crate::ode::{Dopri5, OdeSystem, SolverOptions, SolverStats};
use std::fmt;

/// Distance in `f` within which a saddle-node or cycle fold counts as "nearby".
pub const GHOST_WINDOW: f64 = 1e-2;

/// The planar reaction system as an [`OdeSystem`].
#[derive(Debug, Clone, Copy)]
pub struct Planar<'a>(pub &'a Params);

impl OdeSystem for Planar<'_> {
    fn dim(&self) -> usize {
        2
    }
    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let (du, dv) = rates_unchecked(self.0, y[0], y[1]);
        dy[0] = du;
        dy[1] = dv;
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub stats: SolverStats,
}

/// Integration stopped early; carries what was computed so far.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{error} (partial trajectory up to t = {})", partial.times.last().copied().unwrap_or(0.0))]
pub struct OdeFailure {
    pub error: Error,
    pub partial: Trajectory,
}

impl From<OdeFailure> for Error {
    fn from(f: OdeFailure) -> Self {
        f.error
    }
}

fn options(rel_tol: f64) -> SolverOptions {
    SolverOptions { rtol: rel_tol, atol: rel_tol * 1e-2, nonnegative: true, ..SolverOptions::default() }
}

fn check_ic(p: &Params, ic: State) -> Result<State> {
    p.validate()?;
    ic.sanitized()
}

/// Integrate to `t_end`, recording every accepted step. With `sample_dt`, the
/// record is instead the dense output on a uniform grid.
pub fn solve_ode_sampled(
    p: &Params,
    ic: State,
    t_end: f64,
    rel_tol: f64,
    sample_dt: Option<f64>,
) -> std::result::Result<Trajectory, OdeFailure> {
    let fail = |error| OdeFailure { error, partial: Trajectory::default() };
    let ic = check_ic(p, ic).map_err(fail)?;
    if !(1e-12..=1e-3).contains(&rel_tol) {
        return Err(fail(Error::Usage(format!("rel_tol {rel_tol} outside [1e-12, 1e-3]"))));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(fail(Error::Usage("t_end must be positive".into())));
    }
    if let Some(dt) = sample_dt {
        if !(dt > 0.0) {
            return Err(fail(Error::Usage("sample spacing must be positive".into())));
        }
    }
    let sys = Planar(p);
    let mut solver = Dopri5::new(&sys, 0.0, &[ic.u, ic.v], options(rel_tol)).map_err(fail)?;
    let mut traj = Trajectory { times: vec![0.0], states: vec![ic], stats: SolverStats::default() };
    let mut next_sample = 1usize;
    let mut buf = [0.0; 2];
    while solver.t() < t_end {
        if let Err(error) = solver.step(t_end) {
            traj.stats = solver.stats;
            return Err(OdeFailure { error, partial: traj });
        }
        match sample_dt {
            None => {
                traj.times.push(solver.t());
                traj.states.push(State::new(solver.y()[0], solver.y()[1]));
            }
            Some(dt) => loop {
                let ts = next_sample as f64 * dt;
                if ts > solver.t() + 1e-12 * ts || ts > t_end * (1.0 + 1e-12) {
                    break;
                }
                solver.dense_into(ts.min(solver.t()), &mut buf);
                traj.times.push(ts);
                traj.states.push(State::new(buf[0].max(0.0), buf[1].max(0.0)));
                next_sample += 1;
            },
        }
    }
    traj.stats = solver.stats;
    Ok(traj)
}

/// Integrate to `t_end`, recording every accepted step.
pub fn solve_ode(p: &Params, ic: State, t_end: f64, rel_tol: f64) -> std::result::Result<Trajectory, OdeFailure> {
    solve_ode_sampled(p, ic, t_end, rel_tol, None)
}

#[derive(Debug, Clone, PartialEq)]
pub enum AttractorKind {
    Equilibrium(EquilibriumKind),
    LimitCycle { period: f64, amplitude: f64 },
    Undecided,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttractorLabel {
    pub kind: AttractorKind,
    /// State at the end of the integration; a section point for cycles.
    pub terminal: State,
    pub t_final: f64,
}

impl fmt::Display for AttractorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            AttractorKind::Equilibrium(k) => write!(f, "equilibrium({k})"),
            AttractorKind::LimitCycle { period, .. } => write!(f, "cycle({period:.6})"),
            AttractorKind::Undecided => f.write_str("undecided"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub t_max: f64,
    pub rel_tol: f64,
    /// Spacing of the settling samples.
    pub sample_dt: f64,
    pub settle_samples: usize,
    pub rate_tol: f64,
    /// Agreement of successive section returns.
    pub return_tol: f64,
    pub returns: usize,
    pub min_amplitude: f64,
    pub max_step: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            t_max: 1e5,
            rel_tol: 1e-10,
            sample_dt: 5.0,
            settle_samples: 10,
            rate_tol: 1e-8,
            return_tol: 1e-6,
            returns: 5,
            min_amplitude: 1e-4,
            max_step: f64::INFINITY,
        }
    }
}

/// Run until the trajectory settles or cycles; `observe` sees every accepted step.
pub(crate) fn run_classifier(
    p: &Params,
    ic: State,
    opts: &ClassifyOptions,
    mut observe: impl FnMut(&Dopri5<'_, Planar<'_>>),
) -> Result<AttractorLabel> {
    let ic = check_ic(p, ic)?;
    let eqs = find_equilibria(p)?;
    let section = eqs.e1_star().or_else(|| eqs.interior().next()).map(|e| e.state);
    let sys = Planar(p);
    let mut solver_opts = options(opts.rel_tol);
    solver_opts.max_step = opts.max_step;
    let mut solver = Dopri5::new(&sys, 0.0, &[ic.u, ic.v], solver_opts)?;

    let mut next_sample = opts.sample_dt;
    let mut settled = 0usize;
    let mut crossings: Vec<(f64, f64)> = Vec::new();
    let (mut u_max, mut u_min) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut buf = [0.0; 2];

    while solver.t() < opts.t_max {
        let u_prev = solver.y()[0];
        solver.step(opts.t_max)?;
        observe(&solver);
        let (u, _) = (solver.y()[0], solver.y()[1]);
        u_max = u_max.max(u);
        u_min = u_min.min(u);

        if let Some(centre) = section {
            let us = centre.u;
            if u_prev < us && u >= us {
                // refine the crossing on the dense interpolant
                let tc = crate::bifurcation::bisect(
                    |t| {
                        let mut y = [0.0; 2];
                        solver.dense_into(t, &mut y);
                        y[0] - us
                    },
                    solver.t_prev(),
                    solver.t(),
                );
                solver.dense_into(tc, &mut buf);
                crossings.push((tc, buf[1]));
                let amplitude = u_max - u_min;
                u_max = f64::NEG_INFINITY;
                u_min = f64::INFINITY;
                let n = crossings.len();
                if n > opts.returns && amplitude > opts.min_amplitude {
                    let tail = &crossings[n - opts.returns - 1..];
                    // a slowly contracting focus also has small returns, but they
                    // stay a fixed fraction of the distance to the equilibrium
                    let offset = (buf[1] - centre.v).abs();
                    let recurrent = tail.windows(2).all(|w| {
                        let dv = (w[1].1 - w[0].1).abs();
                        dv < opts.return_tol && dv < 1e-3 * offset
                    });
                    if recurrent {
                        let period = (tail[opts.returns].0 - tail[0].0) / opts.returns as f64;
                        return Ok(AttractorLabel {
                            kind: AttractorKind::LimitCycle { period, amplitude },
                            terminal: State::new(us, buf[1]),
                            t_final: solver.t(),
                        });
                    }
                }
            }
        }

        while next_sample <= solver.t() {
            solver.dense_into(next_sample, &mut buf);
            let (du, dv) = rates_unchecked(p, buf[0].max(0.0), buf[1].max(0.0));
            if du.abs().max(dv.abs()) < opts.rate_tol {
                settled += 1;
            } else {
                settled = 0;
            }
            next_sample += opts.sample_dt;
            if settled >= opts.settle_samples {
                let terminal = State::new(buf[0].max(0.0), buf[1].max(0.0));
                let eq = eqs
                    .nearest(terminal)
                    .filter(|e| e.state.distance(&terminal) < 1e-4)
                    .ok_or_else(|| Error::Invariant(format!("settled at {terminal:?} away from every equilibrium")))?;
                return Ok(AttractorLabel {
                    kind: AttractorKind::Equilibrium(eq.kind),
                    terminal,
                    t_final: solver.t(),
                });
            }
        }
    }
    Ok(AttractorLabel {
        kind: AttractorKind::Undecided,
        terminal: State::new(solver.y()[0], solver.y()[1]),
        t_final: solver.t(),
    })
}

/// Long-time fate of the trajectory starting at `ic`.
pub fn classify_attractor(p: &Params, ic: State) -> Result<AttractorLabel> {
    run_classifier(p, ic, &ClassifyOptions::default(), |_| {})
}

pub fn classify_attractor_with(p: &Params, ic: State, opts: &ClassifyOptions) -> Result<AttractorLabel> {
    run_classifier(p, ic, opts, |_| {})
}

/// Where a slow passage is expected.
#[derive(Debug, Clone, PartialEq)]
pub enum Ghost {
    /// Double root at a saddle-node threshold.
    Point(State),
    /// Samples along the cycle at a fold of cycles.
    Cycle(Vec<State>),
}

impl Ghost {
    pub fn distance(&self, s: State) -> f64 {
        match self {
            Self::Point(g) => g.distance(&s),
            Self::Cycle(pts) => {
                let mut best = f64::INFINITY;
                for w in pts.windows(2).chain(std::iter::once(&[pts[pts.len() - 1], pts[0]][..])) {
                    best = best.min(segment_distance(w[0], w[1], s));
                }
                best
            }
        }
    }
}

fn segment_distance(a: State, b: State, s: State) -> f64 {
    let (dx, dy) = (b.u - a.u, b.v - a.v);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { (((s.u - a.u) * dx + (s.v - a.v) * dy) / len2).clamp(0.0, 1.0) };
    State::new(a.u + t * dx, a.v + t * dy).distance(&s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransientReport {
    pub delta: f64,
    pub dwell: f64,
    pub t_total: f64,
    pub label: AttractorLabel,
}

/// Sub-samples per accepted step used for the dwell measure.
const DWELL_SUBSAMPLES: usize = 8;

/// Time spent within `delta` of `ghost` before the trajectory's fate is decided.
pub fn transient_time_near(p: &Params, ic: State, delta: f64, ghost: &Ghost) -> Result<TransientReport> {
    if !(delta > 0.0) {
        return Err(Error::Usage("delta must be positive".into()));
    }
    let mut dwell = 0.0;
    let mut buf = [0.0; 2];
    let opts = ClassifyOptions { max_step: 0.5, ..ClassifyOptions::default() };
    let label = run_classifier(p, ic, &opts, |s| {
        let (t0, t1) = (s.t_prev(), s.t());
        let dt = (t1 - t0) / DWELL_SUBSAMPLES as f64;
        for k in 0..DWELL_SUBSAMPLES {
            s.dense_into(t0 + (k as f64 + 0.5) * dt, &mut buf);
            if ghost.distance(State::new(buf[0], buf[1])) < delta {
                dwell += dt;
            }
        }
    })?;
    Ok(TransientReport { delta, dwell, t_total: label.t_final, label })
}

/// Ghost of the nearest saddle-node threshold in `f`, if one lies within
/// [`GHOST_WINDOW`]. On the side where the fold pair exists, the stable member
/// of the pair stands in for the ghost.
pub fn saddle_node_ghost(p: &Params) -> Option<Ghost> {
    let sn = saddle_node_thresholds(p, Control::F)
        .into_iter()
        .filter(|r| (r.value - p.f).abs() <= GHOST_WINDOW)
        .min_by(|x, y| (x.value - p.f).abs().total_cmp(&(y.value - p.f).abs()))?;
    let node = find_equilibria(p).ok().and_then(|set| {
        set.interior()
            .filter(|e| e.stability == Stability::Stable && e.state.distance(&sn.state) < 0.1)
            .min_by(|x, y| x.state.distance(&sn.state).total_cmp(&y.state.distance(&sn.state)))
            .map(|e| e.state)
    });
    Some(Ghost::Point(node.unwrap_or(sn.state)))
}

/// Ghost of a fold of cycles within [`GHOST_WINDOW`] of `p.f`.
pub fn cycle_fold_ghost(p: &Params) -> Option<Ghost> {
    let lo = p.f - 4.0 * GHOST_WINDOW;
    let hi = p.f + 4.0 * GHOST_WINDOW;
    let branch = crate::cycles::cycle_branch(p, (lo, hi), None).ok()?;
    let (fold, orbit) = branch.fold()?;
    if (fold.value - p.f).abs() > GHOST_WINDOW {
        return None;
    }
    let pts = crate::cycles::orbit_samples(&p.with_f(fold.value), orbit, 400).ok()?;
    Some(Ghost::Cycle(pts))
}

/// Dwell near the ghost of the closest saddle-node or cycle fold.
pub fn transient_time(p: &Params, ic: State, delta: f64) -> Result<TransientReport> {
    let ghost = saddle_node_ghost(p)
        .or_else(|| cycle_fold_ghost(p))
        .ok_or_else(|| domain(format!("no saddle-node or cycle fold within {GHOST_WINDOW} of f = {}", p.f)))?;
    transient_time_near(p, ic, delta, &ghost)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn base(b: f64, f: f64) -> Params {
        Params::temporal(7.0, b, 0.95, f).unwrap()
    }

    #[test]
    fn equilibrium_initial_condition_stays_put() {
        let p = base(5.65, 0.98);
        let e = *find_equilibria(&p).unwrap().e1_star().map(|e| &e.state).unwrap();
        let traj = solve_ode(&p, e, 200.0, 1e-10).unwrap();
        for s in &traj.states {
            assert!(s.distance(&e) < 1e-10);
        }
    }

    #[test]
    fn sampled_grid_is_uniform_and_increasing() {
        let p = base(7.0, 0.8);
        let traj = solve_ode_sampled(&p, State::new(1.4, 0.05), 10.0, 1e-8, Some(0.5)).unwrap();
        assert_eq!(traj.times.len(), 21);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        assert_relative_eq!(*traj.times.last().unwrap(), 10.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_tolerance_out_of_range() {
        let p = base(7.0, 0.8);
        assert!(matches!(solve_ode(&p, State::new(0.5, 0.5), 1.0, 1e-2), Err(OdeFailure { error: Error::Usage(_), .. })));
    }

    #[test]
    fn converges_to_e1_star_below_sn2() {
        let p = base(7.0, 0.80);
        let e = find_equilibria(&p).unwrap().e1_star().unwrap().state;
        let traj = solve_ode(&p, State::new(1.4, 0.05), 1000.0, 1e-9).unwrap();
        let hit = traj.times.iter().zip(&traj.states).find(|(_, s)| s.distance(&e) < 1e-3);
        assert!(hit.is_some());
    }

    #[test]
    fn origin_is_invariant() {
        let label = classify_attractor(&base(7.0, 0.85), State::new(0.0, 0.0)).unwrap();
        assert_eq!(label.kind, AttractorKind::Equilibrium(EquilibriumKind::Trivial));
    }

    #[test]
    fn axial_equilibrium_above_tc() {
        let p = base(5.65, 1.2);
        let label = classify_attractor(&p, State::new(0.98, 0.01)).unwrap();
        assert_eq!(label.kind, AttractorKind::Equilibrium(EquilibriumKind::Axial));
    }

    #[test]
    fn stable_cycle_detected() {
        // b = 5.2 sits between two supercritical Hopf points
        let p = base(5.2, 1.25);
        let e = find_equilibria(&p).unwrap().e1_star().unwrap().state;
        let label = classify_attractor(&p, State::new(e.u + 0.01, e.v)).unwrap();
        assert!(matches!(label.kind, AttractorKind::LimitCycle { .. }), "{label:?}");
    }

    #[test]
    fn existing_node_stands_in_for_ghost() {
        let p = base(7.0, 0.802);
        let r = transient_time(&p, State::new(1.4, 0.05), 1e-2).unwrap();
        assert_eq!(r.label.kind, AttractorKind::Equilibrium(EquilibriumKind::Interior(3)));
        assert!(r.dwell > 0.5 * r.t_total, "{r:?}");
    }

    #[test]
    fn dwell_near_point_ghost() {
        let p = base(7.0, 0.8013);
        let ghost = saddle_node_ghost(&p).unwrap();
        let r = transient_time_near(&p, State::new(1.4, 0.05), 1e-2, &ghost).unwrap();
        assert!(r.dwell > 0.0 && r.dwell <= r.t_total);
    }
}
