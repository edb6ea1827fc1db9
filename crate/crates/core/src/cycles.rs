//! Periodic orbits of the temporal model: single shooting on the section
//! `u = u1*(f)`, pseudo-arclength continuation in `f`, and cycle folds.

use crate::bifurcation::{bisect, Control, ThresholdKind, ThresholdResult};
use crate::equilibria::find_equilibria;
use crate::error::{domain, Error, Result};
use crate::integrate::{classify_attractor_with, AttractorKind, ClassifyOptions, Planar};
use crate::kinetics::{jacobian_unchecked, rates_unchecked, Params, State};
use crate::ode::{integrate_to, Dopri5, OdeSystem, SolverOptions};
use nalgebra::{Matrix3, Vector3};

const SHOOT_RTOL: f64 = 1e-10;
const SHOOT_ATOL: f64 = 1e-12;
const NEWTON_TOL: f64 = 1e-10;
const NEWTON_MAX: usize = 12;
/// Cycles closer than this to `E1*` (in `v` on the section) count as born at a Hopf point.
const HOPF_AMPLITUDE: f64 = 2e-3;
const MAX_PERIOD: f64 = 5000.0;
const MAX_POINTS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicOrbit {
    pub f: f64,
    pub period: f64,
    /// Point on the section `u = u1*(f)`.
    pub point: State,
    /// Nontrivial Floquet multiplier.
    pub multiplier: f64,
    pub stable: bool,
    /// `|φ_T(x) − x|` at the converged point.
    pub residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CycleBranch {
    /// Orbits in continuation order.
    pub orbits: Vec<PeriodicOrbit>,
    pub folds: Vec<(ThresholdResult, PeriodicOrbit)>,
    /// Why each end of the branch stopped.
    pub ends: Vec<String>,
}

impl CycleBranch {
    /// First fold of cycles on the branch.
    pub fn fold(&self) -> Option<(&ThresholdResult, &PeriodicOrbit)> {
        self.folds.first().map(|(t, o)| (t, o))
    }
}

/// Flow, sensitivities to `v0` and `f`, and the integral of the trace.
struct Variational<'a> {
    p: &'a Params,
}

impl OdeSystem for Variational<'_> {
    fn dim(&self) -> usize {
        7
    }
    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let (u, v) = (y[0], y[1]);
        let (du, dv) = rates_unchecked(self.p, u, v);
        let j = jacobian_unchecked(self.p, u, v);
        dy[0] = du;
        dy[1] = dv;
        let w = j.mul_vec([y[2], y[3]]);
        dy[2] = w[0];
        dy[3] = w[1];
        let z = j.mul_vec([y[4], y[5]]);
        dy[4] = z[0];
        dy[5] = z[1] - v;
        dy[6] = j.trace();
    }
}

fn section_u(p: &Params) -> Result<f64> {
    find_equilibria(p)?
        .e1_star()
        .map(|e| e.state.u)
        .ok_or_else(|| domain(format!("E1* absent at f = {}", p.f)))
}

fn section_slope(p: &Params) -> Result<f64> {
    let h = 1e-6;
    Ok((section_u(&p.with_f(p.f + h))? - section_u(&p.with_f(p.f - h))?) / (2.0 * h))
}

struct Shot {
    residual: [f64; 2],
    /// Columns `∂R/∂v0`, `∂R/∂T`, `∂R/∂f`.
    jac: [[f64; 3]; 2],
    multiplier: f64,
    u_s: f64,
}

fn shoot(p: &Params, v0: f64, period: f64) -> Result<Shot> {
    if !(period > 0.0 && period < MAX_PERIOD) || !(v0 > 0.0) {
        return Err(domain("shooting guess left the admissible region"));
    }
    let u_s = section_u(p)?;
    let slope = section_slope(p)?;
    let sys = Variational { p };
    let y0 = [u_s, v0, 0.0, 1.0, slope, 0.0, 0.0];
    let opts = SolverOptions { rtol: SHOOT_RTOL, atol: SHOOT_ATOL, ..SolverOptions::default() };
    let (y, _) = integrate_to(&sys, 0.0, &y0, period, opts)?;
    let (fu, fv) = rates_unchecked(p, y[0], y[1]);
    Ok(Shot {
        residual: [y[0] - u_s, y[1] - v0],
        jac: [[y[2], fu, y[4] - slope], [y[3] - 1.0, fv, y[5]]],
        multiplier: y[6].exp(),
        u_s,
    })
}

fn orbit_from(p: &Params, v0: f64, period: f64, shot: &Shot) -> PeriodicOrbit {
    PeriodicOrbit {
        f: p.f,
        period,
        point: State::new(shot.u_s, v0),
        multiplier: shot.multiplier,
        stable: shot.multiplier < 1.0,
        residual: shot.residual[0].hypot(shot.residual[1]),
    }
}

/// Newton on `(v0, T)` at fixed parameters.
pub fn shoot_orbit(p: &Params, v0: f64, period: f64) -> Result<PeriodicOrbit> {
    let (mut v0, mut period) = (v0, period);
    for _ in 0..NEWTON_MAX {
        let shot = shoot(p, v0, period)?;
        let r = shot.residual;
        if r[0].hypot(r[1]) < NEWTON_TOL {
            let v_star = find_equilibria(p)?.e1_star().map_or(f64::NAN, |e| e.state.v);
            if (v0 - v_star).abs() < HOPF_AMPLITUDE {
                return Err(Error::NoConvergence("shooting collapsed onto E1*".into()));
            }
            return Ok(orbit_from(p, v0, period, &shot));
        }
        let m = crate::linalg::Mat2::new(shot.jac[0][0], shot.jac[0][1], shot.jac[1][0], shot.jac[1][1]);
        let step = m.solve(r).ok_or_else(|| Error::NoConvergence("singular shooting matrix".into()))?;
        v0 -= step[0];
        period -= step[1];
    }
    Err(Error::NoConvergence(format!("shooting did not converge at f = {}", p.f)))
}

/// Points along an orbit, uniformly spaced in time.
pub fn orbit_samples(p: &Params, orbit: &PeriodicOrbit, n: usize) -> Result<Vec<State>> {
    let sys = Planar(p);
    let opts = SolverOptions { rtol: SHOOT_RTOL, atol: SHOOT_ATOL, ..SolverOptions::default() };
    let mut solver = Dopri5::new(&sys, 0.0, &[orbit.point.u, orbit.point.v], opts)?;
    let mut out = Vec::with_capacity(n);
    let mut buf = [0.0; 2];
    for k in 0..n {
        let t = orbit.period * k as f64 / n as f64;
        while solver.t() < t {
            solver.step(orbit.period)?;
        }
        solver.dense_into(t, &mut buf);
        out.push(State::new(buf[0], buf[1]));
    }
    Ok(out)
}

/// Unknowns `(v0, T / t_scale, f)` with the period rescaled so all three are O(1).
#[derive(Clone, Copy)]
struct Point {
    x: Vector3<f64>,
    tangent: Vector3<f64>,
    orbit: PeriodicOrbit,
}

struct Continuation<'a> {
    base: &'a Params,
    t_scale: f64,
}

impl Continuation<'_> {
    fn eval(&self, x: &Vector3<f64>) -> Result<(Shot, PeriodicOrbit)> {
        let p = self.base.with_f(x[2]);
        p.validate()?;
        let period = x[1] * self.t_scale;
        let shot = shoot(&p, x[0], period)?;
        let orbit = orbit_from(&p, x[0], period, &shot);
        Ok((shot, orbit))
    }

    fn jac_rows(&self, shot: &Shot) -> [Vector3<f64>; 2] {
        let row = |i: usize| Vector3::new(shot.jac[i][0], shot.jac[i][1] * self.t_scale, shot.jac[i][2]);
        [row(0), row(1)]
    }

    fn tangent(&self, shot: &Shot, previous: &Vector3<f64>) -> Vector3<f64> {
        let [r0, r1] = self.jac_rows(shot);
        let t = r0.cross(&r1).normalize();
        if t.dot(previous) < 0.0 {
            -t
        } else {
            t
        }
    }

    /// Predictor–corrector step of arclength `ds` from `from`.
    fn step(&self, from: &Point, ds: f64) -> Result<Point> {
        let pred = from.x + from.tangent * ds;
        let mut x = pred;
        for _ in 0..NEWTON_MAX {
            let (shot, orbit) = self.eval(&x)?;
            let arc = from.tangent.dot(&(x - pred));
            let r = shot.residual;
            if r[0].hypot(r[1]) < NEWTON_TOL && arc.abs() < 1e-10 {
                let tangent = self.tangent(&shot, &from.tangent);
                return Ok(Point { x, tangent, orbit });
            }
            let [r0, r1] = self.jac_rows(&shot);
            let m = Matrix3::from_rows(&[r0.transpose(), r1.transpose(), from.tangent.transpose()]);
            let rhs = Vector3::new(r[0], r[1], arc);
            let dx = m.lu().solve(&rhs).ok_or_else(|| Error::NoConvergence("singular continuation matrix".into()))?;
            x -= dx;
        }
        Err(Error::NoConvergence("corrector failed".into()))
    }

    fn run(&self, start: Point, range: (f64, f64), branch: &mut Vec<Point>) -> (Vec<(Point, Point)>, String) {
        let (ds_min, ds_max) = (1e-7, 0.02);
        let mut ds = 1e-3;
        let mut cur = start;
        let mut fold_brackets = Vec::new();
        loop {
            if branch.len() >= MAX_POINTS {
                return (fold_brackets, "point budget exhausted".into());
            }
            match self.step(&cur, ds) {
                Ok(next) => {
                    let f = next.x[2];
                    let offset = |pt: &Point| {
                        find_equilibria(&self.base.with_f(pt.x[2]))
                            .ok()
                            .and_then(|s| s.e1_star().map(|e| pt.x[0] - e.state.v))
                    };
                    if let (Some(a), Some(b)) = (offset(&cur), offset(&next)) {
                        // a zero-amplitude cycle sits on E1*: the branch ends at a Hopf point
                        if b.abs() < HOPF_AMPLITUDE || (a > 0.0) != (b > 0.0) {
                            return (fold_brackets, format!("shrank onto E1* (Hopf) near f = {f}"));
                        }
                    }
                    if next.tangent[2].signum() != cur.tangent[2].signum() {
                        fold_brackets.push((cur, next));
                    }
                    branch.push(next);
                    cur = next;
                    if f < range.0 || f > range.1 {
                        return (fold_brackets, format!("left range at f = {f}"));
                    }
                    ds = (ds * 1.5).min(ds_max);
                }
                Err(e) => {
                    ds *= 0.5;
                    if ds < ds_min {
                        return (fold_brackets, format!("truncated at f = {}: {e}", cur.x[2]));
                    }
                }
            }
        }
    }

    /// Bisection in arclength for the zero of the tangent's `f` component.
    fn refine_fold(&self, before: &Point, after: &Point) -> Option<Point> {
        let total = (after.x - before.x).dot(&before.tangent);
        let sign0 = before.tangent[2] > 0.0;
        let mut best = None;
        let g = |s: f64| -> f64 {
            match self.step(before, s) {
                Ok(pt) => {
                    let val = pt.tangent[2];
                    if (val > 0.0) != sign0 { -1.0 } else { 1.0 }
                }
                Err(_) => f64::NAN,
            }
        };
        let s = bisect(g, 0.0, total);
        if let Ok(pt) = self.step(before, s) {
            best = Some(pt);
        }
        best
    }
}

/// Continue periodic orbits in `f` over `range`, starting from `seed` or from a
/// stable cycle found by integration.
pub fn cycle_branch(p: &Params, range: (f64, f64), seed: Option<PeriodicOrbit>) -> Result<CycleBranch> {
    p.validate()?;
    if !(range.0 < range.1) {
        return Err(Error::Usage("empty continuation range".into()));
    }
    let seed = match seed {
        Some(s) => shoot_orbit(&p.with_f(s.f), s.point.v, s.period)?,
        None => find_stable_cycle(p, range)?,
    };
    let cont = Continuation { base: p, t_scale: seed.period };
    let shot = shoot(&p.with_f(seed.f), seed.point.v, seed.period)?;
    let x0 = Vector3::new(seed.point.v, 1.0, seed.f);
    let mut out = CycleBranch::default();
    let mut halves = Vec::new();
    for dir in [1.0, -1.0] {
        let guess = Vector3::new(0.0, 0.0, dir);
        let start = Point { x: x0, tangent: cont.tangent(&shot, &guess), orbit: seed };
        let mut pts = Vec::new();
        let (brackets, end) = cont.run(start, range, &mut pts);
        out.ends.push(end);
        for (a, b) in brackets {
            if let Some(fold) = cont.refine_fold(&a, &b) {
                let o = fold.orbit;
                out.folds.push((
                    ThresholdResult {
                        kind: ThresholdKind::Snlc,
                        control: Control::F,
                        value: o.f,
                        state: o.point,
                        period: Some(o.period),
                        residual: o.residual,
                    },
                    o,
                ));
            }
        }
        halves.push(pts);
    }
    let back = halves.pop().unwrap_or_default();
    let fwd = halves.pop().unwrap_or_default();
    out.orbits.extend(back.iter().rev().map(|pt| pt.orbit));
    out.orbits.push(seed);
    out.orbits.extend(fwd.iter().map(|pt| pt.orbit));
    Ok(out)
}

/// Initial conditions probed when looking for a stable cycle: perturbations of
/// `E1*` plus a point far out in the prey direction.
fn probe_states(p: &Params) -> Vec<State> {
    let mut out = Vec::new();
    if let Some(e) = find_equilibria(p).ok().and_then(|s| s.e1_star().cloned()) {
        out.push(State::new(e.state.u + 0.02, e.state.v));
        out.push(State::new(e.state.u * 0.5, e.state.v));
    }
    out.push(State::new(0.97, 0.45));
    out
}

fn find_stable_cycle(p: &Params, range: (f64, f64)) -> Result<PeriodicOrbit> {
    let opts = ClassifyOptions { t_max: 2e4, ..ClassifyOptions::default() };
    let n = 16;
    // probe from the middle of the range outwards
    let mut fs: Vec<f64> = (0..=n).map(|i| range.0 + (range.1 - range.0) * i as f64 / n as f64).collect();
    let mid = 0.5 * (range.0 + range.1);
    fs.sort_by(|a, b| (a - mid).abs().total_cmp(&(b - mid).abs()));
    for f in fs {
        let q = p.with_f(f);
        if q.validate().is_err() {
            continue;
        }
        for ic in probe_states(&q) {
            let Ok(label) = classify_attractor_with(&q, ic, &opts) else { continue };
            if let AttractorKind::LimitCycle { period, .. } = label.kind {
                if let Ok(o) = shoot_orbit(&q, label.terminal.v, period) {
                    return Ok(o);
                }
            }
        }
    }
    Err(Error::NotFound("no stable cycle in the continuation range".into()))
}

/// Value of `f` where the cycle reached from `ic` disappears without a fold,
/// by bisection on the attractor label between `f_cycle` and `f_none`.
pub fn homoclinic_proxy(p: &Params, ic: State, f_cycle: f64, f_none: f64, tol: f64) -> Result<ThresholdResult> {
    let has_cycle = |f: f64| -> Result<bool> {
        let label = classify_attractor_with(&p.with_f(f), ic, &ClassifyOptions { t_max: 2e4, ..Default::default() })?;
        Ok(matches!(label.kind, AttractorKind::LimitCycle { .. }))
    };
    if !has_cycle(f_cycle)? || has_cycle(f_none)? {
        return Err(Error::NotFound("cycle presence does not change across the bracket".into()));
    }
    let (mut a, mut b) = (f_cycle, f_none);
    while (b - a).abs() > tol {
        let m = 0.5 * (a + b);
        if has_cycle(m)? {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(ThresholdResult {
        kind: ThresholdKind::HomProxy,
        control: Control::F,
        value: 0.5 * (a + b),
        state: ic,
        period: None,
        residual: (b - a).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(b: f64, f: f64) -> Params {
        Params::temporal(7.0, b, 0.95, f).unwrap()
    }

    #[test]
    fn seed_orbit_closes() {
        let p = base(7.0, 0.87);
        let o = find_stable_cycle(&p, (0.869, 0.871)).unwrap();
        assert!(o.residual < 1e-9);
        assert!(o.stable);
        assert!(o.multiplier > 0.0);
    }

    #[test]
    fn snlc_at_b7() {
        let p = base(7.0, 0.87);
        let br = cycle_branch(&p, (0.85, 0.9), None).unwrap();
        let (fold, orbit) = br.fold().expect("fold of cycles");
        assert!((fold.value - 0.867805).abs() < 5e-3, "{}", fold.value);
        assert!((orbit.multiplier - 1.0).abs() < 1e-2, "{}", orbit.multiplier);
    }
}
