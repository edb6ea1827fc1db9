//! Equilibria of the temporal model and their linear stability.
//!
//! Interior equilibria are the roots of the quintic
//! `Q(u) = b²u⁵ − b²u⁴ + 2bu³ − b(af+2)u² + (a²e+1)u − (af+1)` that land in the
//! feasibility window `u_a < u < min(1, u_b)`, with `v = eau/(bu²+1) − f`.

use crate::error::Result;
use crate::kinetics::{jacobian_unchecked, Params, State};
use crate::linalg::Mat2;
use nalgebra::SMatrix;
use num_complex::Complex64;
use std::fmt;

/// Real parts below this magnitude count as zero.
pub const HYPERBOLIC_TOL: f64 = 1e-9;
/// Interior predator densities must exceed this.
pub const V_POSITIVE_TOL: f64 = 1e-12;
/// `|Q'|` below this at a root marks a double root.
pub const DOUBLE_ROOT_TOL: f64 = 1e-10;

/// Coefficients of `Q(u)`, highest degree first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuinticPoly {
    pub coeffs: [f64; 6],
}

impl QuinticPoly {
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn eval_derivative(&self, x: f64) -> f64 {
        let c = &self.coeffs;
        (((5.0 * c[0] * x + 4.0 * c[1]) * x + 3.0 * c[2]) * x + 2.0 * c[3]) * x + c[4]
    }

    pub fn eval_second_derivative(&self, x: f64) -> f64 {
        let c = &self.coeffs;
        ((20.0 * c[0] * x + 12.0 * c[1]) * x + 6.0 * c[2]) * x + 2.0 * c[3]
    }

    /// All complex roots from the eigenvalues of the companion matrix.
    pub fn complex_roots(&self) -> Vec<Complex64> {
        let lead = self.coeffs[0];
        let mut companion = SMatrix::<f64, 5, 5>::zeros();
        for j in 0..5 {
            companion[(0, j)] = -self.coeffs[j + 1] / lead;
        }
        for i in 1..5 {
            companion[(i, i - 1)] = 1.0;
        }
        companion.complex_eigenvalues().iter().copied().collect()
    }

    /// Newton iteration kept inside `[lo, hi]`, falling back to bisection when
    /// the bracket allows it.
    pub fn polish(&self, x0: f64, lo: f64, hi: f64) -> f64 {
        let mut x = x0.clamp(lo, hi);
        let (mut a, mut b) = (lo, hi);
        let bracketed = self.eval(a) * self.eval(b) < 0.0;
        for _ in 0..100 {
            let fx = self.eval(x);
            if fx == 0.0 {
                return x;
            }
            if bracketed {
                if self.eval(a) * fx < 0.0 {
                    b = x;
                } else {
                    a = x;
                }
            }
            let dfx = self.eval_derivative(x);
            let mut next = if dfx != 0.0 { x - fx / dfx } else { f64::NAN };
            if !next.is_finite() || next < a || next > b {
                if bracketed {
                    next = 0.5 * (a + b);
                } else {
                    break;
                }
            }
            if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300) {
                x = next;
                break;
            }
            x = next;
        }
        x
    }
}

/// Zero set of the predator nullcline `p(u) = eau/(bu²+1) − f` on the u-axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityWindow {
    pub u_a: f64,
    pub u_b: f64,
    /// Peak of the predator nullcline, `1/√b`.
    pub u_m: f64,
}

impl FeasibilityWindow {
    /// `None` when `e²a² < 4bf²` (no positive predator nullcline).
    pub fn new(p: &Params) -> Option<Self> {
        let disc = p.e * p.e * p.a * p.a - 4.0 * p.b * p.f * p.f;
        if disc < 0.0 {
            return None;
        }
        let s = disc.sqrt();
        let denom = 2.0 * p.b * p.f;
        Some(Self {
            u_a: (p.e * p.a - s) / denom,
            u_b: (p.e * p.a + s) / denom,
            u_m: 1.0 / p.b.sqrt(),
        })
    }

    pub fn upper(&self) -> f64 {
        self.u_b.min(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EquilibriumKind {
    /// E0 = (0, 0).
    Trivial,
    /// E1 = (1, 0).
    Axial,
    /// Coexistence equilibrium E_j*, j = 1, 2, 3 by increasing u.
    Interior(u8),
}

impl fmt::Display for EquilibriumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquilibriumKind::Trivial => write!(f, "E0"),
            EquilibriumKind::Axial => write!(f, "E1"),
            EquilibriumKind::Interior(j) => write!(f, "E{j}*"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stability {
    Stable,
    Saddle,
    /// Unstable focus or node.
    Unstable,
    NonHyperbolic,
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stability::Stable => "stable",
            Stability::Saddle => "saddle",
            Stability::Unstable => "unstable",
            Stability::NonHyperbolic => "non-hyperbolic",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub kind: EquilibriumKind,
    pub state: State,
    /// Larger real part first.
    pub eigenvalues: [Complex64; 2],
    pub stability: Stability,
    /// Set for a double root of `Q` (saddle-node point).
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSet {
    pub equilibria: Vec<Equilibrium>,
    pub window: Option<FeasibilityWindow>,
}

impl EquilibriumSet {
    pub fn interior(&self) -> impl Iterator<Item = &Equilibrium> {
        self.equilibria
            .iter()
            .filter(|e| matches!(e.kind, EquilibriumKind::Interior(_)))
    }

    pub fn interior_count(&self) -> usize {
        self.interior().count()
    }

    pub fn get(&self, kind: EquilibriumKind) -> Option<&Equilibrium> {
        self.equilibria.iter().find(|e| e.kind == kind)
    }

    /// The coexistence equilibrium left of the nullcline peak (`E1*`).
    pub fn e1_star(&self) -> Option<&Equilibrium> {
        let u_m = self.window.map(|w| w.u_m)?;
        self.interior().next().filter(|e| e.state.u < u_m)
    }

    /// Equilibrium closest to a state.
    pub fn nearest(&self, s: State) -> Option<&Equilibrium> {
        self.equilibria.iter().min_by(|x, y| {
            x.state
                .distance(&s)
                .partial_cmp(&y.state.distance(&s))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    }
}

pub fn quintic_coefficients(p: &Params) -> QuinticPoly {
    let (a, b, e, f) = (p.a, p.b, p.e, p.f);
    QuinticPoly {
        coeffs: [
            b * b,
            -b * b,
            2.0 * b,
            -b * (a * f + 2.0),
            a * a * e + 1.0,
            -(a * f + 1.0),
        ],
    }
}

/// Predator component on the predator nullcline.
pub fn predator_nullcline(p: &Params, u: f64) -> f64 {
    p.e * p.a * u / (p.b * u * u + 1.0) - p.f
}

/// Prey nullcline `v = (1 + bu²)(1 − u)/a`.
pub fn prey_nullcline(p: &Params, u: f64) -> f64 {
    (1.0 + p.b * u * u) * (1.0 - u) / p.a
}

pub fn classify_eigenvalues(ev: &[Complex64; 2]) -> Stability {
    let (r0, r1) = (ev[0].re, ev[1].re);
    if r0.abs() < HYPERBOLIC_TOL || r1.abs() < HYPERBOLIC_TOL {
        Stability::NonHyperbolic
    } else if r0 < 0.0 && r1 < 0.0 {
        Stability::Stable
    } else if r0 > 0.0 && r1 > 0.0 {
        Stability::Unstable
    } else {
        Stability::Saddle
    }
}

/// Eigenvalues of the Jacobian at `s` and the induced stability label.
pub fn stability_eigenvalues(p: &Params, s: State) -> Result<([Complex64; 2], Stability, Mat2)> {
    let j = crate::kinetics::jacobian(p, s)?;
    let ev = j.eigenvalues();
    Ok((ev, classify_eigenvalues(&ev), j))
}

fn build(p: &Params, kind: EquilibriumKind, s: State, degenerate: bool) -> Equilibrium {
    let j = jacobian_unchecked(p, s.u, s.v);
    let eigenvalues = j.eigenvalues();
    let stability = if degenerate {
        Stability::NonHyperbolic
    } else {
        classify_eigenvalues(&eigenvalues)
    };
    Equilibrium { kind, state: s, eigenvalues, stability, degenerate }
}

/// Real roots of `Q` on `(lo, hi)`, polished, with multiplicity flags.
pub(crate) fn interior_roots(q: &QuinticPoly, lo: f64, hi: f64) -> Vec<(f64, bool)> {
    let mut candidates: Vec<f64> = q
        .complex_roots()
        .into_iter()
        .filter(|z| z.im.abs() <= 1e-6 * z.re.abs().max(1.0))
        .map(|z| z.re)
        .filter(|x| *x > lo - 1e-6 && *x < hi + 1e-6)
        .collect();
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut roots: Vec<(f64, bool)> = Vec::new();
    for x0 in candidates {
        // Local bracket from a small neighbourhood gives Newton a safe fallback.
        let width = 1e-3;
        let (mut a, mut b) = ((x0 - width).max(lo), (x0 + width).min(hi));
        if a >= b {
            a = lo;
            b = hi;
        }
        let x = q.polish(x0, a, b);
        if x <= lo || x >= hi {
            continue;
        }
        let scale = q.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let double = q.eval_derivative(x).abs() < DOUBLE_ROOT_TOL * scale.max(1.0);
        if let Some(last) = roots.last_mut() {
            if (x - last.0).abs() < 1e-7 {
                last.1 = true;
                continue;
            }
        }
        roots.push((x, double));
    }
    roots
}

pub fn find_equilibria(p: &Params) -> Result<EquilibriumSet> {
    p.validate()?;
    let mut equilibria = vec![
        build(p, EquilibriumKind::Trivial, State::new(0.0, 0.0), false),
        build(p, EquilibriumKind::Axial, State::new(1.0, 0.0), false),
    ];
    let window = FeasibilityWindow::new(p);
    if let Some(w) = window {
        let q = quintic_coefficients(p);
        let mut index = 0u8;
        for (u, double) in interior_roots(&q, 0.0, w.upper()) {
            let v = predator_nullcline(p, u);
            if v <= V_POSITIVE_TOL {
                continue;
            }
            index += 1;
            equilibria.push(build(p, EquilibriumKind::Interior(index), State::new(u, v), double));
        }
        // the middle of three coexistence equilibria is always a saddle
        if index == 3 {
            let middle = &equilibria[3];
            let j = jacobian_unchecked(p, middle.state.u, middle.state.v);
            debug_assert!(j.det() < 0.0 || middle.degenerate, "E2* must be a saddle");
        }
    }
    Ok(EquilibriumSet { equilibria, window })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn temporal(b: f64, f: f64) -> Params {
        Params::temporal(7.0, b, 0.95, f).unwrap()
    }

    #[test]
    fn quintic_coefficients_at_reference() {
        let q = quintic_coefficients(&temporal(5.65, 0.98));
        assert_relative_eq!(q.coeffs[0], 31.9225, epsilon = 1e-12);
        assert_relative_eq!(q.coeffs[5], -7.86, epsilon = 1e-12);
        // Horner evaluation agrees with a term-by-term sum at u = 1
        let direct: f64 = q.coeffs.iter().sum();
        assert_relative_eq!(q.eval(1.0), direct, epsilon = 1e-12);
    }

    #[test]
    fn reference_interior_equilibrium() {
        let set = find_equilibria(&temporal(5.65, 0.98)).unwrap();
        let e1 = set.e1_star().unwrap();
        assert!((e1.state.u - 0.210978).abs() < 5e-7);
        assert!((e1.state.v - 0.141065).abs() < 5e-7);
        let set = find_equilibria(&temporal(5.65, 0.95)).unwrap();
        let e1 = set.e1_star().unwrap();
        assert!((e1.state.u - 0.2016).abs() < 5e-5);
        assert!((e1.state.v - 0.1402).abs() < 5e-5);
    }

    #[test]
    fn empty_window_leaves_boundary_equilibria() {
        // e²a² < 4bf² (f well above ea/(2√b))
        let p = temporal(7.0, 1.5);
        assert!(FeasibilityWindow::new(&p).is_none());
        let set = find_equilibria(&p).unwrap();
        assert_eq!(set.equilibria.len(), 2);
        assert_eq!(set.interior_count(), 0);
    }

    #[test]
    fn boundary_equilibria_stability() {
        let p = temporal(7.0, 0.9);
        let set = find_equilibria(&p).unwrap();
        let e0 = set.get(EquilibriumKind::Trivial).unwrap();
        assert_eq!(e0.stability, Stability::Saddle);
        assert_relative_eq!(e0.eigenvalues[0].re, 1.0);
        assert_relative_eq!(e0.eigenvalues[1].re, -0.9);
        // f > f_TC = 0.83125 -> E1 stable
        let e1 = set.get(EquilibriumKind::Axial).unwrap();
        assert_eq!(e1.stability, Stability::Stable);
        assert!(e1.eigenvalues.iter().all(|z| z.re < 0.0));
    }

    #[test]
    fn middle_equilibrium_is_saddle() {
        let set = find_equilibria(&temporal(7.0, 0.82)).unwrap();
        assert_eq!(set.interior_count(), 3);
        let e2 = set.get(EquilibriumKind::Interior(2)).unwrap();
        // sign check via nullcline slopes: predator nullcline steeper downwards
        let p = temporal(7.0, 0.82);
        let h = 1e-6;
        let slope_prey = (prey_nullcline(&p, e2.state.u + h) - prey_nullcline(&p, e2.state.u - h)) / (2.0 * h);
        let slope_pred = (predator_nullcline(&p, e2.state.u + h) - predator_nullcline(&p, e2.state.u - h)) / (2.0 * h);
        assert!(slope_pred < slope_prey);
        let j = jacobian_unchecked(&p, e2.state.u, e2.state.v);
        assert!(j.det() < 0.0);
        assert_eq!(e2.stability, Stability::Saddle);
    }

    #[test]
    fn ordering_around_nullcline_peak() {
        let p = temporal(7.0, 0.82);
        let set = find_equilibria(&p).unwrap();
        let us: Vec<f64> = set.interior().map(|e| e.state.u).collect();
        let u_m = 1.0 / p.b.sqrt();
        assert!(us[0] < u_m && u_m < us[1] && us[1] < us[2] && us[2] < 1.0);
    }

    #[test]
    fn residuals_after_polishing() {
        for &(b, f) in &[(5.65, 0.98), (7.0, 0.85), (4.2, 1.2), (5.2, 0.9)] {
            let p = temporal(b, f);
            let q = quintic_coefficients(&p);
            let set = find_equilibria(&p).unwrap();
            for e in set.interior() {
                assert!(q.eval(e.state.u).abs() < 1e-9);
                let (r1, r2) = crate::kinetics::reaction_rates(&p, e.state).unwrap();
                assert!(r1.abs().max(r2.abs()) < 1e-10);
            }
        }
    }

    #[test]
    fn double_root_flagged_degenerate() {
        // pick f exactly at the saddle-node value for b = 7 near u ≈ 0.8817
        let p0 = temporal(7.0, 0.8);
        let (a, b, e) = (p0.a, p0.b, p0.e);
        // f(u) whose Q(u; f) = 0 has a local minimum there (ternary search)
        let f_of_u = |u: f64| {
            (b * b * u.powi(5) - b * b * u.powi(4) + 2.0 * b * u.powi(3) - 2.0 * b * u * u + (a * a * e + 1.0) * u - 1.0)
                / (a * (b * u * u + 1.0))
        };
        let (mut lo, mut hi) = (0.8f64, 0.95f64);
        for _ in 0..200 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if f_of_u(m1) < f_of_u(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let u_sn = 0.5 * (lo + hi);
        let p = p0.with_f(f_of_u(u_sn));
        let set = find_equilibria(&p).unwrap();
        let deg: Vec<_> = set.interior().filter(|e| e.degenerate).collect();
        assert_eq!(deg.len(), 1, "{:?}", set.equilibria);
        assert!((deg[0].state.u - u_sn).abs() < 1e-4);
        assert_eq!(deg[0].stability, Stability::NonHyperbolic);
    }
}
