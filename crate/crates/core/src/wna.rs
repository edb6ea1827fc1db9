//! Weakly nonlinear analysis at the Turing threshold.
//!
//! The perturbation `W = U − E1*` is expanded as `Σ εⁱ Wᵢ` with every `Wᵢ` a
//! finite sum of terms `Aᵖ cos(n k_T x) w`. Products of cosines fold back
//! into cosines, so each order reduces to one 2×2 solve per `(p, n)` pair.
//! Resonant `n = 1` right-hand sides are made solvable by the Fredholm
//! condition, which yields the Stuart–Landau coefficients.

use crate::equilibria::find_equilibria;
use crate::error::{domain, Error, Result};
use crate::kinetics::{jacobian_unchecked, partials_unchecked, Params, State};
use crate::linalg::{dot, Mat2, Vec2};
use crate::spatial::turing_threshold;
use std::collections::BTreeMap;

/// Denominator of the fifth-order Taylor term as printed with the quintic
/// amplitude equation.
pub const PRINTED_QUINTIC_WEIGHT: f64 = 60.0;
/// Exact Taylor denominator `5!`.
pub const TAYLOR_QUINTIC_WEIGHT: f64 = 120.0;
const SOLVE_TOL: f64 = 1e-9;

/// How `c` maps to `ε²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum C2Convention {
    /// `c = c_T (1 + ε²)`.
    Relative,
    /// `c = c_T + ε²`.
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WnaOptions {
    pub convention: C2Convention,
    /// Denominator applied to the fifth-order Taylor term.
    pub quintic_weight: f64,
    /// Prey components of the kernel parts of `C11` and `C13`.
    pub c11_u: f64,
    pub c13_u: f64,
}

impl Default for WnaOptions {
    fn default() -> Self {
        Self {
            convention: C2Convention::Relative,
            quintic_weight: PRINTED_QUINTIC_WEIGHT,
            c11_u: 1.0,
            c13_u: 1.0,
        }
    }
}

/// Critical eigenvector `Φ = (1, φ)` and adjoint vector `Ψ = (ψ, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    pub phi: Vec2,
    pub psi: Vec2,
    pub residual: f64,
}

impl EigenPair {
    pub fn pairing(&self) -> f64 {
        dot(self.phi, self.psi)
    }
}

/// `(ε order, A power, cosine mode)`.
pub type TermKey = (usize, usize, usize);
type Series = BTreeMap<TermKey, f64>;

const NAMED: [(&str, bool, TermKey); 24] = [
    ("h20", true, (2, 2, 0)),
    ("h22", true, (2, 2, 2)),
    ("k20", false, (2, 2, 0)),
    ("k22", false, (2, 2, 2)),
    ("g11", true, (3, 1, 1)),
    ("g31", true, (3, 3, 1)),
    ("g33", true, (3, 3, 3)),
    ("C11", false, (3, 1, 1)),
    ("C13", false, (3, 3, 1)),
    ("C33", false, (3, 3, 3)),
    ("H20", true, (4, 2, 0)),
    ("H22", true, (4, 2, 2)),
    ("H40", true, (4, 4, 0)),
    ("H42", true, (4, 4, 2)),
    ("H44", true, (4, 4, 4)),
    ("D20", false, (4, 2, 0)),
    ("D22", false, (4, 2, 2)),
    ("D40", false, (4, 4, 0)),
    ("D42", false, (4, 4, 2)),
    ("D44", false, (4, 4, 4)),
    ("I11", true, (5, 1, 1)),
    ("I31", true, (5, 3, 1)),
    ("I51", true, (5, 5, 1)),
    ("W51", false, (5, 1, 1)),
];

/// Every solved term of the expansion together with its right-hand side.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WnaWorkspace {
    /// Coefficient vectors of `W`.
    pub terms: BTreeMap<TermKey, Vec2>,
    /// Right-hand sides before removal of the secular part.
    pub forcing: BTreeMap<TermKey, Vec2>,
    /// Largest linear-solve residual.
    pub max_residual: f64,
    /// Largest `|⟨R, Ψ⟩|` left after secular removal.
    pub max_fredholm: f64,
}

impl WnaWorkspace {
    /// Named vector such as `k22`, `g31` or `I51`.
    pub fn get(&self, name: &str) -> Option<Vec2> {
        let (_, rhs, key) = NAMED.iter().find(|(n, _, _)| *n == name)?;
        let map = if *rhs { &self.forcing } else { &self.terms };
        Some(map.get(key).copied().unwrap_or([0.0, 0.0]))
    }

    pub fn named(&self) -> Vec<(&'static str, Vec2)> {
        NAMED.iter().filter_map(|(n, _, _)| self.get(n).map(|v| (*n, v))).collect()
    }

    /// `Σ_{p,n} Aᵖ cos(n k x) w` for the order-`order` term.
    pub fn eval_order(&self, order: usize, amplitude: f64, kx: f64) -> Vec2 {
        self.terms
            .range((order, 0, 0)..(order + 1, 0, 0))
            .fold([0.0, 0.0], |acc, (&(_, p, n), w)| {
                let s = amplitude.powi(p as i32) * (n as f64 * kx).cos();
                [acc[0] + s * w[0], acc[1] + s * w[1]]
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubicCoefficients {
    pub sigma: f64,
    pub l: f64,
}

/// Stuart–Landau coefficients at a Turing point.
///
/// Cubic: `dA/dτ = σA − lA³`; quintic: `∂A/∂τ₁ = σ′A − l′A³ + ρ′A⁵`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeModel {
    pub sigma: f64,
    pub l: f64,
    pub sigma_p: f64,
    pub l_p: f64,
    pub rho_p: f64,
    pub c_t: f64,
    pub k_t: f64,
    /// `c₂` of `c = c_T + ε² c₂`.
    pub c2: f64,
    pub eq: State,
    pub eigen: EigenPair,
    pub workspace: WnaWorkspace,
}

impl AmplitudeModel {
    pub fn eps2(&self, c: f64) -> f64 {
        (c - self.c_t) / self.c2
    }

    /// `(σ̂, l̂, ρ̂)` at a given `ε²`.
    pub fn combined(&self, eps2: f64) -> (f64, f64, f64) {
        (self.sigma + eps2 * self.sigma_p, self.l + eps2 * self.l_p, eps2 * self.rho_p)
    }

    /// Coefficients `(g0, g1, g2)` of `g(X) = g0 + g1 X + g2 X²` with
    /// `dB/dt = g(B²) B` for the physical amplitude `B = εA`.
    fn physical(&self, eps2: f64) -> (f64, f64, f64) {
        let (s, l, _) = self.combined(eps2);
        (eps2 * s, -l, self.rho_p)
    }

    /// Steady physical amplitudes at `c`, largest first.
    pub fn amplitude_roots(&self, c: f64) -> Vec<AmplitudeRoot> {
        let eps2 = self.eps2(c);
        let (g0, g1, g2) = self.physical(eps2);
        let mut xs = Vec::new();
        if g2 == 0.0 {
            if g1 != 0.0 {
                xs.push(-g0 / g1);
            }
        } else {
            let disc = g1 * g1 - 4.0 * g2 * g0;
            if disc >= 0.0 {
                let q = -0.5 * (g1 + g1.signum() * disc.sqrt());
                xs.push(q / g2);
                if q != 0.0 {
                    xs.push(g0 / q);
                }
            }
        }
        let mut roots: Vec<AmplitudeRoot> = xs
            .into_iter()
            .filter(|x| *x > 0.0 && x.is_finite())
            .map(|x| AmplitudeRoot { b: x.sqrt(), eps2, stable: g1 + 2.0 * g2 * x < 0.0 })
            .collect();
        roots.sort_by(|a, b| b.b.total_cmp(&a.b));
        roots.dedup_by(|a, b| (a.b - b.b).abs() < 1e-14);
        roots
    }

    /// Lower end of the subcritical window, where the two pattern branches merge.
    pub fn fold(&self) -> Option<f64> {
        // discriminant of g in X, as a quadratic in s = ε²
        let qa = self.l_p * self.l_p - 4.0 * self.rho_p * self.sigma_p;
        let qb = 2.0 * self.l * self.l_p - 4.0 * self.rho_p * self.sigma;
        let qc = self.l * self.l;
        let roots: Vec<f64> = if qa.abs() < 1e-300 {
            vec![-qc / qb]
        } else {
            let disc = qb * qb - 4.0 * qa * qc;
            if disc < 0.0 {
                return None;
            }
            vec![(-qb + disc.sqrt()) / (2.0 * qa), (-qb - disc.sqrt()) / (2.0 * qa)]
        };
        let s = roots.into_iter().filter(|s| *s < 0.0).fold(f64::NEG_INFINITY, f64::max);
        s.is_finite().then_some(self.c_t + s * self.c2)
    }

    /// `(c_fold, c_T)` when the bifurcation is subcritical.
    pub fn hysteresis_window(&self) -> Option<(f64, f64)> {
        (self.l < 0.0).then(|| self.fold().map(|cf| (cf, self.c_t))).flatten()
    }

    /// Pattern of physical amplitude `b` at `ε²`, truncated at `order` ≤ 3.
    pub fn profile(&self, eps2: f64, b: f64, order: usize) -> PatternProfile {
        let ws = &self.workspace;
        let w = |key: TermKey| ws.terms.get(&key).copied().unwrap_or([0.0, 0.0]);
        let mut modes = [[0.0; 2]; 4];
        let mut add = |n: usize, s: f64, v: Vec2| {
            modes[n][0] += s * v[0];
            modes[n][1] += s * v[1];
        };
        add(1, b, self.eigen.phi);
        if order >= 2 {
            add(0, b * b, w((2, 2, 0)));
            add(2, b * b, w((2, 2, 2)));
        }
        if order >= 3 {
            add(1, eps2 * b, w((3, 1, 1)));
            add(1, b.powi(3), w((3, 3, 1)));
            add(3, b.powi(3), w((3, 3, 3)));
        }
        PatternProfile { base: self.eq, k: self.k_t, modes }
    }

    /// Stable pattern at `c` reconstructed to third order.
    pub fn pattern_prediction(&self, c: f64) -> Result<PatternPrediction> {
        let roots = self.amplitude_roots(c);
        let stable = roots
            .iter()
            .find(|r| r.stable)
            .copied()
            .ok_or_else(|| domain(format!("no stable pattern amplitude at c = {c}")))?;
        let eps2 = stable.eps2;
        let a_inf = (eps2 > 0.0).then(|| stable.b / eps2.sqrt());
        Ok(PatternPrediction {
            c,
            eps2,
            a_inf,
            b: stable.b,
            unstable_b: roots.iter().find(|r| !r.stable).map(|r| r.b),
            profile: self.profile(eps2, stable.b, 3),
            window: self.hysteresis_window(),
        })
    }

    /// Branch summary over a list of `c` values.
    pub fn amplitude_curve(&self, cs: &[f64]) -> Vec<AmplitudeRow> {
        cs.iter()
            .map(|&c| {
                let roots = self.amplitude_roots(c);
                let stable = roots.iter().find(|r| r.stable).map(|r| r.b);
                let unstable = roots.iter().find(|r| !r.stable).map(|r| r.b);
                let branch = match (stable, unstable) {
                    (Some(_), Some(_)) => "bistable",
                    (Some(_), None) => "pattern",
                    (None, Some(_)) => "unstable-pattern",
                    (None, None) => "homogeneous",
                };
                AmplitudeRow { c, stable, unstable, branch }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeRoot {
    /// Physical amplitude `εA` of the `cos(k_T x)` mode.
    pub b: f64,
    pub eps2: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeRow {
    pub c: f64,
    pub stable: Option<f64>,
    pub unstable: Option<f64>,
    pub branch: &'static str,
}

/// `E1* + Σₙ cos(n k x) mₙ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternProfile {
    pub base: State,
    pub k: f64,
    pub modes: [Vec2; 4],
}

impl PatternProfile {
    pub fn eval(&self, x: f64) -> State {
        let (mut u, mut v) = (self.base.u, self.base.v);
        for (n, m) in self.modes.iter().enumerate() {
            let c = (n as f64 * self.k * x).cos();
            u += c * m[0];
            v += c * m[1];
        }
        State::new(u, v)
    }

    /// `max u − min u` over one period.
    pub fn peak_to_peak_u(&self) -> f64 {
        let period = 2.0 * std::f64::consts::PI / self.k;
        let n = 4096;
        let (lo, hi) = (0..=n).map(|i| self.eval(period * i as f64 / n as f64).u).fold(
            (f64::INFINITY, f64::NEG_INFINITY),
            |(lo, hi), u| (lo.min(u), hi.max(u)),
        );
        hi - lo
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternPrediction {
    pub c: f64,
    pub eps2: f64,
    /// `A∞` of the `ε`-scaled equation; absent below threshold.
    pub a_inf: Option<f64>,
    pub b: f64,
    pub unstable_b: Option<f64>,
    pub profile: PatternProfile,
    pub window: Option<(f64, f64)>,
}

/// `x·y` for cosine series, `cos n cos m = ½cos(n+m) + ½cos|n−m|`.
fn mul(x: &Series, y: &Series, emax: usize) -> Series {
    let mut r = Series::new();
    for (&(e1, p1, n1), a) in x {
        for (&(e2, p2, n2), b) in y {
            if e1 + e2 > emax {
                continue;
            }
            let h = 0.5 * a * b;
            *r.entry((e1 + e2, p1 + p2, n1 + n2)).or_default() += h;
            *r.entry((e1 + e2, p1 + p2, n1.abs_diff(n2))).or_default() += h;
        }
    }
    r
}

/// `(v u_x)_x` for cosine series in units of the base wavenumber `k`.
fn taxis(v: &Series, u: &Series, k: f64, emax: usize) -> Series {
    let mut r = Series::new();
    for (&(e1, p1, m), a) in v {
        for (&(e2, p2, n), b) in u {
            if e1 + e2 > emax || n == 0 {
                continue;
            }
            let (nf, mf) = (n as f64, m as f64);
            let base = -nf * k * k * a * b * 0.5;
            *r.entry((e1 + e2, p1 + p2, n + m)).or_default() += base * (nf + mf);
            *r.entry((e1 + e2, p1 + p2, n.abs_diff(m))).or_default() += base * (nf - mf);
        }
    }
    r
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

struct Expansion {
    j: Mat2,
    v_star: f64,
    c_t: f64,
    c2: f64,
    k: f64,
    d: f64,
    /// `∂ᵐF / ∂uᵖ ∂v^{m−p}`, indexed `[m][p]`.
    taylor: Vec<Vec<Vec2>>,
    eigen: EigenPair,
    opts: WnaOptions,
    wu: Series,
    wv: Series,
    ws: WnaWorkspace,
    /// Known `dA/dτ` polynomial as `(power, coefficient)`.
    slow: Vec<(usize, f64)>,
}

impl Expansion {
    fn operator(&self, n: usize) -> Mat2 {
        let q = (n * n) as f64 * self.k * self.k;
        Mat2::new(
            self.j.m[0][0] - q,
            self.j.m[0][1],
            self.j.m[1][0] - q * self.c_t * self.v_star,
            self.j.m[1][1] - q * self.d,
        )
    }

    fn set(&mut self, key: TermKey, w: Vec2) {
        self.wu.insert(key, w[0]);
        self.wv.insert(key, w[1]);
        self.ws.terms.insert(key, w);
    }

    fn forcing(&self, order: usize) -> BTreeMap<(usize, usize), Vec2> {
        let mut r: BTreeMap<(usize, usize), Vec2> = BTreeMap::new();
        let mut acc = |key: (usize, usize), du: f64, dv: f64| {
            let e = r.entry(key).or_insert([0.0, 0.0]);
            e[0] += du;
            e[1] += dv;
        };
        // slow-time derivatives of lower orders
        for (&(eo, p, n), w) in &self.ws.terms {
            if eo + 2 == order {
                for &(q, cf) in &self.slow {
                    let s = p as f64 * cf;
                    acc((p - 1 + q, n), s * w[0], s * w[1]);
                }
            }
        }
        // linear part of c − c_T
        for (&(eo, p, n), wu) in &self.wu {
            if eo + 2 == order {
                let q = (n * n) as f64 * self.k * self.k;
                acc((p, n), 0.0, self.c2 * self.v_star * q * wu);
            }
        }
        let emax = order;
        let t = taxis(&self.wv, &self.wu, self.k, emax);
        for (&(eo, p, n), val) in &t {
            if eo == order {
                acc((p, n), 0.0, -self.c_t * val);
            }
            if eo + 2 == order {
                acc((p, n), 0.0, -self.c2 * val);
            }
        }
        // Taylor terms of order 2..=5
        let one: Series = [((0, 0, 0), 1.0)].into_iter().collect();
        let mut pu = vec![one.clone()];
        let mut pv = vec![one];
        for m in 1..=order.min(5) {
            pu.push(mul(&pu[m - 1], &self.wu, emax));
            pv.push(mul(&pv[m - 1], &self.wv, emax));
        }
        for m in 2..=order.min(5) {
            let denom = if m == 5 { self.opts.quintic_weight } else { factorial(m) };
            for p in 0..=m {
                let g = self.taylor[m][p];
                if g == [0.0, 0.0] {
                    continue;
                }
                let fac = binomial(m, p) / denom;
                for (&(eo, pa, n), val) in &mul(&pu[p], &pv[m - p], emax) {
                    if eo == order {
                        acc((pa, n), -fac * g[0] * val, -fac * g[1] * val);
                    }
                }
            }
        }
        r
    }

    /// Solves order `order`; returns the secular coefficients found.
    fn solve_order(&mut self, order: usize) -> Result<Vec<(usize, f64)>> {
        let mut secular = Vec::new();
        for ((p, n), rhs) in self.forcing(order) {
            if rhs[0].abs().max(rhs[1].abs()) < 1e-14 {
                continue;
            }
            self.ws.forcing.insert((order, p, n), rhs);
            let op = self.operator(n);
            let sol = if n == 1 {
                let s = -dot(rhs, self.eigen.psi) / self.eigen.pairing();
                secular.push((p, s));
                let r = [rhs[0] + s * self.eigen.phi[0], rhs[1] + s * self.eigen.phi[1]];
                self.ws.max_fredholm = self.ws.max_fredholm.max(dot(r, self.eigen.psi).abs());
                let t = match (order, p) {
                    (3, 1) => self.opts.c11_u,
                    (3, 3) => self.opts.c13_u,
                    _ => 0.0,
                };
                let y = (r[1] - op.m[1][0] * t) / op.m[1][1];
                self.check(&op, [t, y], r)?
            } else {
                let sol = op.solve(rhs).ok_or_else(|| domain(format!("singular operator for mode {n}")))?;
                self.check(&op, sol, rhs)?
            };
            self.set((order, p, n), sol);
        }
        Ok(secular)
    }

    fn check(&mut self, op: &Mat2, sol: Vec2, rhs: Vec2) -> Result<Vec2> {
        let back = op.mul_vec(sol);
        let scale = 1.0f64.max(rhs[0].abs()).max(rhs[1].abs());
        let res = (back[0] - rhs[0]).abs().max((back[1] - rhs[1]).abs()) / scale;
        self.ws.max_residual = self.ws.max_residual.max(res);
        if res > SOLVE_TOL {
            return Err(Error::NoConvergence(format!("WNA linear solve residual {res:e}")));
        }
        Ok(sol)
    }
}

fn coefficient(secular: &[(usize, f64)], power: usize) -> f64 {
    secular.iter().filter(|(p, _)| *p == power).map(|(_, s)| s).sum()
}

fn expand(p: &Params, eq: State, max_order: usize, opts: WnaOptions) -> Result<(Expansion, Vec<(usize, f64)>)> {
    let tp = turing_threshold(p, eq)?;
    if !(tp.c_t > 0.0) {
        return Err(domain(format!("Turing threshold c_T = {} is not positive", tp.c_t)));
    }
    let p_t = p.with_c(tp.c_t);
    let eq = eq.sanitized()?;
    let j = jacobian_unchecked(&p_t, eq.u, eq.v);
    let (a10, a01, b01) = (j.m[0][0], j.m[0][1], j.m[1][1]);
    let k2 = tp.k_t * tp.k_t;
    if !(k2 > 0.0) || a01 == 0.0 {
        return Err(domain("degenerate Turing wavenumber"));
    }
    let phi = [1.0, (k2 - a10) / a01];
    let psi = [(p.d * k2 - b01) / a01, 1.0];
    let mut taylor = vec![Vec::new(), Vec::new()];
    for m in 2..=5 {
        let t = partials_unchecked(&p_t, eq.u, eq.v, m);
        // index by prey power p, i.e. m − p derivatives in v
        taylor.push((0..=m).map(|pw| [t.entries[0][m - pw], t.entries[1][m - pw]]).collect());
    }
    let c2 = match opts.convention {
        C2Convention::Relative => tp.c_t,
        C2Convention::Absolute => 1.0,
    };
    let mut ex = Expansion {
        j,
        v_star: eq.v,
        c_t: tp.c_t,
        c2,
        k: tp.k_t,
        d: p.d,
        taylor,
        eigen: EigenPair { phi, psi, residual: 0.0 },
        opts,
        wu: Series::new(),
        wv: Series::new(),
        ws: WnaWorkspace::default(),
        slow: Vec::new(),
    };
    let op = ex.operator(1);
    let r1 = op.mul_vec(phi);
    let r2 = op.transpose().mul_vec(psi);
    ex.eigen.residual = r1.iter().chain(&r2).fold(0.0f64, |m, x| m.max(x.abs()));
    if ex.eigen.residual > 1e-10 * (1.0 + p.d * k2) || ex.eigen.pairing().abs() < 1e-14 {
        return Err(domain("critical eigenvectors do not satisfy their defining equations"));
    }
    ex.set((1, 1, 1), phi);
    let mut last = Vec::new();
    for order in 2..=max_order {
        let secular = ex.solve_order(order)?;
        if order == 3 {
            ex.slow = secular.clone();
        }
        if order == max_order {
            last = secular;
        }
    }
    Ok((ex, last))
}

/// Cubic coefficients at the Turing threshold of `p` (its own `c` is ignored).
pub fn stuart_landau_cubic(p: &Params, eq: State, opts: WnaOptions) -> Result<(CubicCoefficients, WnaWorkspace)> {
    let (ex, sec) = expand(p, eq, 3, opts)?;
    Ok((CubicCoefficients { sigma: coefficient(&sec, 1), l: -coefficient(&sec, 3) }, ex.ws))
}

/// Full amplitude model through the quintic order.
pub fn stuart_landau_quintic(p: &Params, eq: State, opts: WnaOptions) -> Result<AmplitudeModel> {
    let (ex, sec) = expand(p, eq, 5, opts)?;
    let cubic = &ex.slow;
    let model = AmplitudeModel {
        sigma: coefficient(cubic, 1),
        l: -coefficient(cubic, 3),
        sigma_p: coefficient(&sec, 1),
        l_p: -coefficient(&sec, 3),
        rho_p: coefficient(&sec, 5),
        c_t: ex.c_t,
        k_t: ex.k,
        c2: ex.c2,
        eq: eq.sanitized()?,
        eigen: ex.eigen,
        workspace: ex.ws,
    };
    if !(model.sigma > 0.0) {
        return Err(Error::Invariant(format!("linear growth coefficient σ = {} is not positive", model.sigma)));
    }
    Ok(model)
}

/// Amplitude model at the coexisting state `E1*` of `p`.
pub fn amplitude_model(p: &Params, opts: WnaOptions) -> Result<AmplitudeModel> {
    let set = find_equilibria(p)?;
    let eq = set.e1_star().ok_or_else(|| domain("no coexisting equilibrium"))?.state;
    stuart_landau_quintic(p, eq, opts)
}
