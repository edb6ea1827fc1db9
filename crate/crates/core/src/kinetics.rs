//! Dimensionless reaction terms of the group-defense prey-predator model.
//!
//! ```text
//! F1(u, v) = u (1 - u) - a u v / (1 + b u²)
//! F2(u, v) = e a u v / (1 + b u²) - f v - v²
//! ```
//!
//! Every derivative up to fifth order is available in closed form. The only
//! nonpolynomial piece is `h(u) = u / (1 + b u²)`, whose n-th derivative is
//! `(-1)ⁿ n! / b · Re[(u - i/√b)^-(n+1)]`, so mixed partials reduce to that
//! expression plus the polynomial terms.

use crate::error::{domain, Error, Result};
use crate::linalg::{Mat2, Vec2};
use num_complex::Complex64;

/// Negativity tolerated (and clamped to zero) in state components.
pub const NEGATIVE_CLAMP: f64 = 1e-12;

/// The six dimensionless parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    /// Predation scale.
    pub a: f64,
    /// Group-defense strength.
    pub b: f64,
    /// Prey-taxis coefficient (repellent for c > 0).
    pub c: f64,
    /// Predator/prey diffusion ratio.
    pub d: f64,
    /// Conversion efficiency.
    pub e: f64,
    /// Predator death rate.
    pub f: f64,
}

impl Params {
    pub fn new(a: f64, b: f64, c: f64, d: f64, e: f64, f: f64) -> Result<Self> {
        let p = Self { a, b, c, d, e, f };
        p.validate()?;
        Ok(p)
    }

    /// Temporal-only parameter set; `c` and `d` get neutral values.
    pub fn temporal(a: f64, b: f64, e: f64, f: f64) -> Result<Self> {
        Self::new(a, b, 0.0, 1.0, e, f)
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("d", self.d),
            ("e", self.e),
            ("f", self.f),
        ];
        for (name, value) in named {
            if !value.is_finite() {
                return Err(domain(format!("parameter {name} is not finite")));
            }
            if name == "c" {
                if value < 0.0 {
                    return Err(domain("taxis coefficient c must be non-negative"));
                }
            } else if value <= 0.0 {
                return Err(domain(format!("parameter {name} must be positive")));
            }
        }
        Ok(())
    }

    pub fn with_b(mut self, b: f64) -> Self {
        self.b = b;
        self
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn with_d(mut self, d: f64) -> Self {
        self.d = d;
        self
    }

    pub fn with_f(mut self, f: f64) -> Self {
        self.f = f;
        self
    }

    /// Transcritical threshold `ea/(b+1)`, where E1 changes stability.
    pub fn f_tc(&self) -> f64 {
        self.e * self.a / (self.b + 1.0)
    }
}

/// Parameters of the dimensional model before rescaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionalParams {
    /// Attack rate α.
    pub alpha: f64,
    /// Group-defense β.
    pub beta: f64,
    /// Predator mortality γ.
    pub gamma: f64,
    /// Predator self-competition δ.
    pub delta: f64,
    /// Conversion ζ.
    pub zeta: f64,
    /// Prey growth σ.
    pub sigma: f64,
    /// Prey self-competition η.
    pub eta: f64,
    /// Prey-taxis χ.
    pub chi: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Dimensionless prey/predator densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub u: f64,
    pub v: f64,
}

impl State {
    pub const fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub fn as_vec(&self) -> Vec2 {
        [self.u, self.v]
    }

    /// Clamp round-off negativity; reject anything larger.
    pub fn sanitized(&self) -> Result<Self> {
        if !self.u.is_finite() || !self.v.is_finite() {
            return Err(domain("state is not finite"));
        }
        if self.u < -NEGATIVE_CLAMP || self.v < -NEGATIVE_CLAMP {
            return Err(domain(format!(
                "negative state ({}, {}) beyond clamp tolerance",
                self.u, self.v
            )));
        }
        Ok(Self::new(self.u.max(0.0), self.v.max(0.0)))
    }

    pub fn distance(&self, other: &State) -> f64 {
        (self.u - other.u).hypot(self.v - other.v)
    }
}

/// Mixed partial derivatives of order `order` of `(F1, F2)`.
///
/// `entries[i][q]` holds `∂^order F_{i+1} / ∂u^{order-q} ∂v^q`; any index
/// permutation of the same multiset maps to the same entry.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialTensor {
    pub order: usize,
    pub entries: [Vec<f64>; 2],
}

impl PartialTensor {
    /// Entry for a derivative multi-index; `0` stands for `u`, `1` for `v`.
    pub fn get(&self, component: usize, indices: &[usize]) -> f64 {
        debug_assert_eq!(indices.len(), self.order);
        let q = indices.iter().filter(|&&i| i == 1).count();
        self.entries[component][q]
    }

    /// Multilinear action `D^k F[x_1, ..., x_k]`.
    pub fn apply(&self, args: &[Vec2]) -> Vec2 {
        assert_eq!(args.len(), self.order, "wrong number of multilinear arguments");
        let mut out = [0.0; 2];
        let k = self.order;
        for mask in 0..(1usize << k) {
            let mut prod = 1.0;
            let mut q = 0;
            for (j, arg) in args.iter().enumerate() {
                let bit = (mask >> j) & 1;
                q += bit;
                prod *= arg[bit];
            }
            out[0] += self.entries[0][q] * prod;
            out[1] += self.entries[1][q] * prod;
        }
        out
    }
}

/// n-th derivative of `h(u) = u / (1 + b u²)`.
fn h_derivative(b: f64, u: f64, n: usize) -> f64 {
    if n == 0 {
        return u / (1.0 + b * u * u);
    }
    let beta = 1.0 / b.sqrt();
    let z = Complex64::new(u, -beta);
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * factorial / b * z.powi(-((n + 1) as i32)).re
}

/// Right-hand side without validation; used in the hot loops of the integrators.
#[inline]
pub(crate) fn rates_unchecked(p: &Params, u: f64, v: f64) -> (f64, f64) {
    let response = p.a * u * v / (1.0 + p.b * u * u);
    (
        u * (1.0 - u) - response,
        p.e * response - p.f * v - v * v,
    )
}

/// Local reaction rates `(F1, F2)` at a state.
pub fn reaction_rates(p: &Params, s: State) -> Result<(f64, f64)> {
    p.validate()?;
    let s = s.sanitized()?;
    Ok(rates_unchecked(p, s.u, s.v))
}

#[inline]
pub(crate) fn jacobian_unchecked(p: &Params, u: f64, v: f64) -> Mat2 {
    let q = 1.0 + p.b * u * u;
    let h = u / q;
    let dh = (1.0 - p.b * u * u) / (q * q);
    Mat2::new(
        1.0 - 2.0 * u - p.a * v * dh,
        -p.a * h,
        p.e * p.a * v * dh,
        p.e * p.a * h - p.f - 2.0 * v,
    )
}

/// Jacobian `[[a10, a01], [b10, b01]]` of the reaction terms.
pub fn jacobian(p: &Params, s: State) -> Result<Mat2> {
    p.validate()?;
    let s = s.sanitized()?;
    Ok(jacobian_unchecked(p, s.u, s.v))
}

pub(crate) fn partials_unchecked(p: &Params, u: f64, v: f64, order: usize) -> PartialTensor {
    let mut f1 = vec![0.0; order + 1];
    let mut f2 = vec![0.0; order + 1];
    let hp = h_derivative(p.b, u, order);
    let hp1 = h_derivative(p.b, u, order - 1);
    // q = 0: pure u-derivatives.
    f1[0] = -p.a * v * hp;
    f2[0] = p.e * p.a * v * hp;
    if order == 2 {
        f1[0] -= 2.0;
    }
    // q = 1: one v-derivative, the rest in u.
    f1[1] = -p.a * hp1;
    f2[1] = p.e * p.a * hp1;
    // q = 2 only survives through -v² at second order.
    if order == 2 {
        f2[2] = -2.0;
    }
    PartialTensor { order, entries: [f1, f2] }
}

/// Exact mixed partials of order 2..=5.
pub fn partials(p: &Params, s: State, order: usize) -> Result<PartialTensor> {
    if !(2..=5).contains(&order) {
        return Err(Error::Usage(format!("partial order {order} outside 2..=5")));
    }
    p.validate()?;
    let s = s.sanitized()?;
    Ok(partials_unchecked(p, s.u, s.v, order))
}

/// Rescale dimensional rates to the six dimensionless parameters.
pub fn nondimensionalize(dp: &DimensionalParams) -> Result<Params> {
    let all = [
        dp.alpha, dp.beta, dp.gamma, dp.delta, dp.zeta, dp.sigma, dp.eta, dp.d1, dp.d2,
    ];
    if all.iter().any(|x| !x.is_finite() || *x <= 0.0) || !dp.chi.is_finite() || dp.chi < 0.0 {
        return Err(domain("dimensional parameters must be positive (chi non-negative)"));
    }
    Params::new(
        dp.alpha / dp.delta,
        dp.beta * dp.sigma * dp.sigma / (dp.eta * dp.eta),
        dp.chi * dp.sigma / (dp.d1 * dp.eta),
        dp.d2 / dp.d1,
        dp.zeta * dp.delta / dp.eta,
        dp.gamma / dp.sigma,
    )
}

/// Dimensional right-hand side, used to check the rescaling.
pub fn dimensional_rates(dp: &DimensionalParams, n: f64, pred: f64) -> (f64, f64) {
    let response = dp.alpha * n * pred / (1.0 + dp.beta * n * n);
    (
        n * (dp.sigma - dp.eta * n) - response,
        dp.zeta * response - dp.gamma * pred - dp.delta * pred * pred,
    )
}

/// Dimensionless state from dimensional densities.
pub fn to_dimensionless_state(dp: &DimensionalParams, n: f64, pred: f64) -> State {
    State::new(dp.eta / dp.sigma * n, dp.delta / dp.sigma * pred)
}
