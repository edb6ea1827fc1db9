//! Codimension-1 thresholds and codimension-2 points of the temporal model.
//!
//! Equilibrium thresholds reduce to scalar root problems: the saddle-node
//! condition is a critical point of `f(u)` (or `b(u)`) on `Q = 0`, and the Hopf
//! condition is a sign change of the trace along `E1*`. Limit-cycle folds live
//! in [`crate::cycles`].

use crate::equilibria::{find_equilibria, quintic_coefficients, Equilibrium};
use crate::error::{domain, Error, Result};
use crate::kinetics::{jacobian_unchecked, partials_unchecked, Params, PartialTensor, State};
use num_complex::Complex64;
use std::fmt;

/// Grid resolution for the scalar threshold scans.
const SCAN_POINTS: usize = 800;
/// `|l1|` below this counts as a degenerate Hopf point.
pub const L1_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ThresholdKind {
    Tc,
    Sn1,
    Sn2,
    Hopf,
    Snlc,
    HomProxy,
}

impl fmt::Display for ThresholdKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Tc => "TC",
            Self::Sn1 => "SN1",
            Self::Sn2 => "SN2",
            Self::Hopf => "H",
            Self::Snlc => "SNLC",
            Self::HomProxy => "HOM-proxy",
        };
        f.write_str(s)
    }
}

/// Which parameter is varied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Control {
    B,
    F,
}

impl Control {
    pub fn get(self, p: &Params) -> f64 {
        match self {
            Self::B => p.b,
            Self::F => p.f,
        }
    }

    pub fn set(self, p: &Params, x: f64) -> Params {
        match self {
            Self::B => p.with_b(x),
            Self::F => p.with_f(x),
        }
    }
}

impl fmt::Display for Control {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::B => "b",
            Self::F => "f",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    pub kind: ThresholdKind,
    pub control: Control,
    pub value: f64,
    /// Equilibrium at the threshold, or a point of the critical cycle.
    pub state: State,
    /// Period of the critical cycle for SNLC results.
    pub period: Option<f64>,
    /// Defining residual at `value`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criticality {
    Supercritical,
    Subcritical,
    Degenerate,
}

impl fmt::Display for Criticality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Supercritical => "super",
            Self::Subcritical => "sub",
            Self::Degenerate => "degenerate",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfClassification {
    pub l1: f64,
    pub omega: f64,
    pub criticality: Criticality,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Codim2Kind {
    Cp,
    Gh,
    Bt,
}

impl fmt::Display for Codim2Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Cp => "CP",
            Self::Gh => "GH",
            Self::Bt => "BT",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codim2Point {
    pub kind: Codim2Kind,
    pub f: f64,
    pub b: f64,
    pub state: State,
    /// Largest of the two defining residuals.
    pub residual: f64,
}

/// Bisection on a sign change of `g`; `g(lo)` and `g(hi)` must differ in sign.
pub(crate) fn bisect(mut g: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut g_lo = g(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid);
        if g_mid == 0.0 {
            return mid;
        }
        if (g_mid > 0.0) == (g_lo > 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Predator death rate at which `E1 = (1, 0)` exchanges stability.
pub fn transcritical_threshold(p: &Params) -> ThresholdResult {
    let value = p.f_tc();
    let residual = quintic_coefficients(&p.with_f(value)).eval(1.0).abs();
    ThresholdResult {
        kind: ThresholdKind::Tc,
        control: Control::F,
        value,
        state: State::new(1.0, 0.0),
        period: None,
        residual,
    }
}

/// `f` solving `Q'(u) = 0` at a given `u`.
pub fn f_sn_closed_form(p: &Params, u: f64) -> f64 {
    let (a, b, e) = (p.a, p.b, p.e);
    (5.0 * b * b * u.powi(4) - 4.0 * b * b * u.powi(3) + 6.0 * b * u * u - 4.0 * b * u + a * a * e + 1.0)
        / (2.0 * a * b * u)
}

/// `Q(u) = P(u) − a f (b u² + 1)`; this is `P`.
fn f_free_part(p: &Params, u: f64) -> (f64, f64) {
    let b = p.b;
    let k = p.a * p.a * p.e + 1.0;
    let val = ((((b * b * u - b * b) * u + 2.0 * b) * u - 2.0 * b) * u + k) * u - 1.0;
    let der = 5.0 * b * b * u.powi(4) - 4.0 * b * b * u.powi(3) + 6.0 * b * u * u - 4.0 * b * u + k;
    (val, der)
}

/// Saddle-node thresholds, ordered by the location `u` of the double root.
/// The fold with the smaller `u` is SN1.
pub fn saddle_node_thresholds(p: &Params, control: Control) -> Vec<ThresholdResult> {
    let roots = match control {
        Control::F => sn_in_f(p),
        Control::B => sn_in_b(p),
    };
    let mut out: Vec<ThresholdResult> = roots
        .into_iter()
        .filter_map(|(u, x)| {
            let q = control.set(p, x);
            if q.validate().is_err() {
                return None;
            }
            let v = crate::equilibria::predator_nullcline(&q, u);
            if v <= crate::equilibria::V_POSITIVE_TOL {
                return None;
            }
            let poly = quintic_coefficients(&q);
            let residual = poly.eval(u).abs().max(poly.eval_derivative(u).abs());
            Some(ThresholdResult {
                kind: ThresholdKind::Sn1,
                control,
                value: x,
                state: State::new(u, v),
                period: None,
                residual,
            })
        })
        .collect();
    out.sort_by(|x, y| x.state.u.total_cmp(&y.state.u));
    for (i, r) in out.iter_mut().enumerate() {
        r.kind = if i == 0 { ThresholdKind::Sn1 } else { ThresholdKind::Sn2 };
    }
    out
}

fn u_grid() -> impl Iterator<Item = f64> {
    (1..SCAN_POINTS * 4).map(|i| i as f64 / (SCAN_POINTS * 4) as f64)
}

fn sn_in_f(p: &Params) -> Vec<(f64, f64)> {
    // f(u) = P(u) / (a (b u² + 1)); folds are its critical points.
    let g = |u: f64| {
        let (val, der) = f_free_part(p, u);
        der * (p.b * u * u + 1.0) - 2.0 * p.b * u * val
    };
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for u in u_grid() {
        let gu = g(u);
        if let Some((u0, g0)) = prev {
            if (g0 > 0.0) != (gu > 0.0) {
                let r = bisect(g, u0, u);
                let f = f_free_part(p, r).0 / (p.a * (p.b * r * r + 1.0));
                if f > 0.0 {
                    out.push((r, f));
                }
            }
        }
        prev = Some((u, gu));
    }
    out
}

fn sn_in_b(p: &Params) -> Vec<(f64, f64)> {
    // Q is quadratic in b: A b² + B b + C with A = u⁴(u − 1).
    let af = p.a * p.f;
    let b_roots = |u: f64| -> [Option<f64>; 2] {
        let qa = u.powi(4) * (u - 1.0);
        let qb = 2.0 * u.powi(3) - (af + 2.0) * u * u;
        let qc = (p.a * p.a * p.e + 1.0) * u - (af + 1.0);
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 || qa == 0.0 {
            return [None, None];
        }
        let s = disc.sqrt();
        let pick = |b: f64| (b > 0.0 && b.is_finite()).then_some(b);
        [pick((-qb + s) / (2.0 * qa)), pick((-qb - s) / (2.0 * qa))]
    };
    let dq = |u: f64, b: f64| quintic_coefficients(&p.with_b(b)).eval_derivative(u);
    let mut out = Vec::new();
    for branch in 0..2 {
        let g = |u: f64| b_roots(u)[branch].map(|b| dq(u, b));
        let mut prev: Option<(f64, f64)> = None;
        for u in u_grid() {
            let Some(gu) = g(u) else {
                prev = None;
                continue;
            };
            if let Some((u0, g0)) = prev {
                if (g0 > 0.0) != (gu > 0.0) {
                    let r = bisect(|x| g(x).unwrap_or(f64::NAN), u0, u);
                    if let Some(b) = b_roots(r)[branch] {
                        out.push((r, b));
                    }
                }
            }
            prev = Some((u, gu));
        }
    }
    out
}

/// Trace and determinant at `E1*` for a control value, if `E1*` exists.
fn e1_star_at(p: &Params, control: Control, x: f64) -> Option<Equilibrium> {
    let q = control.set(p, x);
    q.validate().ok()?;
    find_equilibria(&q).ok()?.e1_star().cloned()
}

fn hopf_search_range(p: &Params, control: Control) -> (f64, f64) {
    // interior equilibria need e²a² ≥ 4bf²
    let ea = p.e * p.a;
    match control {
        Control::F => (1e-3, ea / (2.0 * p.b.sqrt())),
        Control::B => (1e-3, (ea / (2.0 * p.f)).powi(2)),
    }
}

/// All Hopf points of `E1*` for the control in `[lo, hi]`.
pub fn hopf_thresholds_in(p: &Params, control: Control, lo: f64, hi: f64, n: usize) -> Vec<ThresholdResult> {
    let trace = |x: f64| {
        e1_star_at(p, control, x).map(|e| {
            let j = jacobian_unchecked(&control.set(p, x), e.state.u, e.state.v);
            (j.trace(), j.det())
        })
    };
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let cur = trace(x).filter(|(_, det)| *det > 0.0).map(|(t, _)| (x, t));
        if let (Some((x0, t0)), Some((x1, t1))) = (prev, cur) {
            if (t0 > 0.0) != (t1 > 0.0) {
                let root = bisect(|x| trace(x).map_or(f64::NAN, |(t, _)| t), x0, x1);
                if let Some(e) = e1_star_at(p, control, root) {
                    let j = jacobian_unchecked(&control.set(p, root), e.state.u, e.state.v);
                    if j.trace().abs() < 1e-8 && j.det() > 0.0 {
                        out.push(ThresholdResult {
                            kind: ThresholdKind::Hopf,
                            control,
                            value: root,
                            state: e.state,
                            period: Some(2.0 * std::f64::consts::PI / j.det().sqrt()),
                            residual: j.trace().abs(),
                        });
                    }
                }
            }
        }
        prev = cur;
    }
    out
}

/// All Hopf points of `E1*` over the range where interior equilibria can exist.
pub fn hopf_thresholds(p: &Params, control: Control) -> Vec<ThresholdResult> {
    let (lo, hi) = hopf_search_range(p, control);
    hopf_thresholds_in(p, control, lo, hi, SCAN_POINTS)
}

/// The Hopf point closest to the current value of the control parameter.
pub fn hopf_threshold(p: &Params, control: Control) -> Result<ThresholdResult> {
    let x0 = control.get(p);
    hopf_thresholds(p, control)
        .into_iter()
        .min_by(|a, b| (a.value - x0).abs().total_cmp(&(b.value - x0).abs()))
        .ok_or_else(|| Error::NotFound(format!("no Hopf point of E1* in {control}")))
}

type C2 = [Complex64; 2];

fn multilinear(t: &PartialTensor, args: &[C2]) -> C2 {
    let mut out = [Complex64::new(0.0, 0.0); 2];
    for mask in 0..(1usize << t.order) {
        let mut prod = Complex64::new(1.0, 0.0);
        let mut q = 0;
        for (j, arg) in args.iter().enumerate() {
            let bit = (mask >> j) & 1;
            q += bit;
            prod *= arg[bit];
        }
        out[0] += prod * t.entries[0][q];
        out[1] += prod * t.entries[1][q];
    }
    out
}

fn inner(p: C2, q: C2) -> Complex64 {
    p[0].conj() * q[0] + p[1].conj() * q[1]
}

fn solve_complex(m: [[Complex64; 2]; 2], r: C2) -> C2 {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [
        (r[0] * m[1][1] - m[0][1] * r[1]) / det,
        (m[0][0] * r[1] - m[1][0] * r[0]) / det,
    ]
}

/// First Lyapunov coefficient at a Hopf point of `E1*`.
pub fn lyapunov_first_coefficient(p: &Params, hopf: &ThresholdResult) -> Result<HopfClassification> {
    let q_params = hopf.control.set(p, hopf.value);
    let s = hopf.state;
    let j = jacobian_unchecked(&q_params, s.u, s.v);
    if j.det() <= 0.0 {
        return Err(domain("Hopf point needs det(J) > 0"));
    }
    let omega = j.det().sqrt();
    let (a00, a01, a10) = (j.m[0][0], j.m[0][1], j.m[1][0]);
    let i = Complex64::new(0.0, 1.0);
    let c = |x: f64| Complex64::new(x, 0.0);
    // eigenvectors for the zero-trace linear part
    let mut q: C2 = [c(a01), i * omega - a00];
    let norm = (q[0].norm_sqr() + q[1].norm_sqr()).sqrt();
    q = [q[0] / norm, q[1] / norm];
    let mut pv: C2 = [c(a10), -i * omega - a00];
    let s_pq = inner(pv, q);
    pv = [pv[0] / s_pq.conj(), pv[1] / s_pq.conj()];
    let qb: C2 = [q[0].conj(), q[1].conj()];

    let b2 = partials_unchecked(&q_params, s.u, s.v, 2);
    let c3 = partials_unchecked(&q_params, s.u, s.v, 3);
    let a = [[c(j.m[0][0]), c(j.m[0][1])], [c(j.m[1][0]), c(j.m[1][1])]];

    let b_qqb = multilinear(&b2, &[q, qb]);
    let a_inv_b = solve_complex(a, b_qqb);
    let b_qq = multilinear(&b2, &[q, q]);
    let shifted = [
        [2.0 * i * omega - a[0][0], -a[0][1]],
        [-a[1][0], 2.0 * i * omega - a[1][1]],
    ];
    let r2 = solve_complex(shifted, b_qq);

    let term = inner(pv, multilinear(&c3, &[q, q, qb]))
        - 2.0 * inner(pv, multilinear(&b2, &[q, a_inv_b]))
        + inner(pv, multilinear(&b2, &[qb, r2]));
    let l1 = term.re / (2.0 * omega);
    let criticality = if l1 > L1_TOL {
        Criticality::Subcritical
    } else if l1 < -L1_TOL {
        Criticality::Supercritical
    } else {
        Criticality::Degenerate
    };
    Ok(HopfClassification { l1, omega, criticality })
}

/// Cusp points: the SN2 fold emerging from the transcritical line at `u = 1`.
pub fn cusp_points(a: f64, e: f64) -> Vec<Codim2Point> {
    // 2z³ − ae z² + a e² = 0 with z = f_CP and b_CP = (ae − z)/z.
    let companion = nalgebra::Matrix3::new(a * e / 2.0, 0.0, -a * e * e / 2.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
    let roots = companion.complex_eigenvalues();
    let mut out = Vec::new();
    for z in roots.iter() {
        if z.im.abs() > 1e-9 || z.re <= 0.0 {
            continue;
        }
        let f = z.re;
        let b = (a * e - f) / f;
        if b <= 0.0 {
            continue;
        }
        let Ok(p) = Params::temporal(a, b, e, f) else { continue };
        // the second fold branch must be born here next to an existing one;
        // the other root is where the first fold leaves the boundary u = 1
        let count = |b: f64| saddle_node_thresholds(&p.with_b(b), Control::F).len();
        let (below, above) = (count(b - 0.05), count(b + 0.05));
        if below == 0 || above <= below {
            continue;
        }
        let q = quintic_coefficients(&p);
        out.push(Codim2Point {
            kind: Codim2Kind::Cp,
            f,
            b,
            state: State::new(1.0, 0.0),
            residual: q.eval(1.0).abs().max(q.eval_derivative(1.0).abs()),
        });
    }
    out
}

fn hopf_l1_at_f(base: &Params, f: f64, b_guess: f64, width: f64) -> Option<(ThresholdResult, f64)> {
    let p = base.with_f(f);
    let lo = (b_guess - width).max(1e-3);
    let hits = hopf_thresholds_in(&p, Control::B, lo, b_guess + width, 40);
    let h = hits.into_iter().min_by(|x, y| (x.value - b_guess).abs().total_cmp(&(y.value - b_guess).abs()))?;
    let l1 = lyapunov_first_coefficient(&p, &h).ok()?.l1;
    Some((h, l1))
}

/// Bautin points: zeros of `l1` along the Hopf curve, scanned over `f ∈ [f_lo, f_hi]`.
pub fn bautin_points(a: f64, e: f64, f_lo: f64, f_hi: f64, n: usize) -> Vec<Codim2Point> {
    let Ok(base) = Params::temporal(a, 1.0, e, f_lo) else { return Vec::new() };
    let mut samples: Vec<Vec<(f64, f64)>> = Vec::with_capacity(n + 1);
    let fs: Vec<f64> = (0..=n).map(|i| f_lo + (f_hi - f_lo) * i as f64 / n as f64).collect();
    for &f in &fs {
        let p = base.with_f(f);
        let row = hopf_thresholds(&p, Control::B)
            .into_iter()
            .filter_map(|h| lyapunov_first_coefficient(&p, &h).ok().map(|c| (h.value, c.l1)))
            .collect();
        samples.push(row);
    }
    let mut out = Vec::new();
    for i in 0..n {
        for &(b0, l0) in &samples[i] {
            let Some(&(b1, l1)) = samples[i + 1]
                .iter()
                .min_by(|x, y| (x.0 - b0).abs().total_cmp(&(y.0 - b0).abs()))
            else {
                continue;
            };
            if (b1 - b0).abs() > 0.5 || (l0 > 0.0) == (l1 > 0.0) {
                continue;
            }
            let width = (b1 - b0).abs() + 0.05;
            let track = |f: f64| {
                let t = (f - fs[i]) / (fs[i + 1] - fs[i]);
                hopf_l1_at_f(&base, f, b0 + t * (b1 - b0), width)
            };
            let f_gh = bisect(|f| track(f).map_or(f64::NAN, |x| x.1), fs[i], fs[i + 1]);
            if let Some((h, l1)) = track(f_gh) {
                out.push(Codim2Point {
                    kind: Codim2Kind::Gh,
                    f: f_gh,
                    b: h.value,
                    state: h.state,
                    residual: l1.abs().max(h.residual),
                });
            }
        }
    }
    out
}

/// Bogdanov–Takens points: sign changes of the trace along each saddle-node
/// curve, scanned over `b ∈ [b_lo, b_hi]`.
pub fn bogdanov_takens_points(a: f64, e: f64, b_lo: f64, b_hi: f64, n: usize) -> Vec<Codim2Point> {
    let Ok(base) = Params::temporal(a, b_lo, e, 1.0) else { return Vec::new() };
    let trace_on = |b: f64, kind: ThresholdKind| -> Option<(f64, ThresholdResult)> {
        let p = base.with_b(b);
        let sn = saddle_node_thresholds(&p, Control::F).into_iter().find(|r| r.kind == kind)?;
        let j = jacobian_unchecked(&p.with_f(sn.value), sn.state.u, sn.state.v);
        Some((j.trace(), sn))
    };
    let mut out = Vec::new();
    for kind in [ThresholdKind::Sn1, ThresholdKind::Sn2] {
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..=n {
            let b = b_lo + (b_hi - b_lo) * i as f64 / n as f64;
            let cur = trace_on(b, kind).map(|(t, _)| (b, t));
            if let (Some((b0, t0)), Some((b1, t1))) = (prev, cur) {
                if (t0 > 0.0) != (t1 > 0.0) {
                    let root = bisect(|b| trace_on(b, kind).map_or(f64::NAN, |x| x.0), b0, b1);
                    if let Some((t, sn)) = trace_on(root, kind) {
                        let p = base.with_b(root).with_f(sn.value);
                        let det = jacobian_unchecked(&p, sn.state.u, sn.state.v).det();
                        out.push(Codim2Point {
                            kind: Codim2Kind::Bt,
                            f: sn.value,
                            b: root,
                            state: sn.state,
                            residual: t.abs().max(det.abs()),
                        });
                    }
                }
            }
            prev = cur;
        }
    }
    out
}

/// Cusp, Bautin and Bogdanov–Takens points found inside the default scan box
/// `f ∈ [0.5, 2]`, `b ∈ [0.5, 12]`.
pub fn codim2_points(a: f64, e: f64) -> Result<Vec<Codim2Point>> {
    if !(a > 0.0 && e > 0.0 && a.is_finite() && e.is_finite()) {
        return Err(domain("a and e must be positive"));
    }
    let mut out = cusp_points(a, e);
    out.extend(bautin_points(a, e, 0.5, 2.0, 150));
    out.extend(bogdanov_takens_points(a, e, 0.5, 12.0, 230));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn base(b: f64, f: f64) -> Params {
        Params::temporal(7.0, b, 0.95, f).unwrap()
    }

    #[test]
    fn transcritical_closed_form() {
        let r = transcritical_threshold(&base(5.65, 1.0));
        assert_relative_eq!(r.value, 1.0, epsilon = 1e-12);
        assert!(r.residual < 1e-9);
        assert_relative_eq!(transcritical_threshold(&base(7.0, 1.0)).value, 0.83125, epsilon = 1e-12);
        let mut last = f64::INFINITY;
        for b in [1.0, 10.0, 100.0, 1e4] {
            let f = transcritical_threshold(&base(b, 1.0)).value;
            assert!(f < last);
            last = f;
        }
    }

    #[test]
    fn saddle_nodes_at_b7() {
        let r = saddle_node_thresholds(&base(7.0, 0.9), Control::F);
        assert_eq!(r.len(), 2);
        let sn2 = r.iter().find(|x| x.kind == ThresholdKind::Sn2).unwrap();
        assert!((sn2.value - 0.801336).abs() < 1e-5, "{}", sn2.value);
        for x in &r {
            assert!(x.residual < 1e-9);
            assert_relative_eq!(f_sn_closed_form(&base(7.0, 0.9), x.state.u), x.value, max_relative = 1e-9);
        }
    }

    #[test]
    fn single_fold_at_b42() {
        let r = saddle_node_thresholds(&base(4.2, 1.0), Control::F);
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].kind, ThresholdKind::Sn1);
    }

    #[test]
    fn fold_changes_equilibrium_count_by_two() {
        for b in [5.65, 7.0] {
            for r in saddle_node_thresholds(&base(b, 1.0), Control::F) {
                let n = |f: f64| find_equilibria(&base(b, f)).unwrap().interior_count() as i32;
                assert_eq!((n(r.value + 1e-4) - n(r.value - 1e-4)).abs(), 2, "b={b} {:?}", r);
            }
        }
    }

    #[test]
    fn folds_in_b_agree_with_folds_in_f() {
        let p = base(7.0, 0.801336);
        let in_b = saddle_node_thresholds(&p, Control::B);
        assert!(in_b.iter().any(|r| (r.value - 7.0).abs() < 1e-3), "{in_b:?}");
        for r in &in_b {
            assert!(r.residual < 1e-8);
        }
    }

    #[test]
    fn hopf_points_from_reference() {
        let h = hopf_threshold(&base(5.8, 1.05), Control::B).unwrap();
        assert!((h.value - 5.8759).abs() < 1e-3, "{}", h.value);
        assert!(lyapunov_first_coefficient(&base(5.8, 1.05), &h).unwrap().l1 > 0.0);
        let h = hopf_threshold(&base(5.8, 1.06), Control::B).unwrap();
        assert!((h.value - 5.8234).abs() < 1e-3, "{}", h.value);
        assert!(lyapunov_first_coefficient(&base(5.8, 1.06), &h).unwrap().l1 < 0.0);
        let h = hopf_threshold(&base(7.0, 0.88), Control::F).unwrap();
        assert!((h.value - 0.883805).abs() < 1e-3, "{}", h.value);
        assert!(h.residual < 1e-8);
    }

    #[test]
    fn cusp_point() {
        let cps = cusp_points(7.0, 0.95);
        assert_eq!(cps.len(), 1);
        assert!((cps[0].f - 1.2270).abs() < 1e-3 && (cps[0].b - 4.4195).abs() < 1e-3, "{:?}", cps[0]);
        assert!(cps[0].residual < 1e-6);
    }

    #[test]
    fn bogdanov_takens_point() {
        let bts = bogdanov_takens_points(7.0, 0.95, 4.5, 7.0, 50);
        let bt = bts.iter().find(|x| (x.b - 5.6146).abs() < 1e-2).expect("BT near b = 5.61");
        assert!((bt.f - 1.2388).abs() < 1e-3 && (bt.b - 5.6146).abs() < 1e-3, "{bt:?}");
        assert!(bt.residual < 1e-6);
    }

    #[test]
    fn bautin_point() {
        let gh = bautin_points(7.0, 0.95, 1.0, 1.1, 10);
        assert_eq!(gh.len(), 1, "{gh:?}");
        assert!((gh[0].f - 1.0517).abs() < 1e-3 && (gh[0].b - 5.8671).abs() < 1e-3, "{:?}", gh[0]);
    }
}
