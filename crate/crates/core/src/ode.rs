//! Dormand–Prince 5(4) integrator with continuous (dense) output.
//!
//! The stepper works on flat `f64` slices so the same code drives the planar
//! model, its variational equations and the method-of-lines PDE.

use crate::error::{Error, Result};

/// A first-order system `y' = f(t, y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]);
}

impl<F> OdeSystem for (usize, F)
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    fn dim(&self) -> usize {
        self.0
    }
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        (self.1)(t, y, dy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; estimated when `None`.
    pub first_step: Option<f64>,
    pub max_step: f64,
    pub max_steps: usize,
    /// Reject steps that push any component below `-1e-12`, clamp smaller dips.
    pub nonnegative: bool,
}

impl SolverOptions {
    pub fn with_rtol(rtol: f64) -> Self {
        Self { rtol, atol: rtol * 1e-2, ..Self::default() }
    }
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            first_step: None,
            max_step: f64::INFINITY,
            max_steps: 50_000_000,
            nonnegative: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub steps: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Adaptive stepper. Each call to [`Dopri5::step`] advances one accepted step;
/// [`Dopri5::dense`] interpolates inside the most recent step.
pub struct Dopri5<'a, S: OdeSystem + ?Sized> {
    sys: &'a S,
    opts: SolverOptions,
    t: f64,
    t_old: f64,
    h: f64,
    h_last: f64,
    y: Vec<f64>,
    y_new: Vec<f64>,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    cont: [Vec<f64>; 5],
    pub stats: SolverStats,
}

impl<'a, S: OdeSystem + ?Sized> Dopri5<'a, S> {
    pub fn new(sys: &'a S, t0: f64, y0: &[f64], opts: SolverOptions) -> Result<Self> {
        let n = sys.dim();
        if y0.len() != n {
            return Err(Error::Usage(format!("initial state has {} components, system has {n}", y0.len())));
        }
        if !(opts.rtol > 0.0 && opts.atol >= 0.0) {
            return Err(Error::Usage("tolerances must be positive".into()));
        }
        if y0.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("initial state is not finite".into()));
        }
        let zeros = || vec![0.0; n];
        let mut s = Self {
            sys,
            opts,
            t: t0,
            t_old: t0,
            h: 0.0,
            h_last: 0.0,
            y: y0.to_vec(),
            y_new: zeros(),
            k: [zeros(), zeros(), zeros(), zeros(), zeros(), zeros(), zeros()],
            tmp: zeros(),
            cont: [zeros(), zeros(), zeros(), zeros(), zeros()],
            stats: SolverStats::default(),
        };
        s.sys.rhs(t0, &s.y, &mut s.k[0]);
        s.stats.rhs_evals += 1;
        s.h = match opts.first_step {
            Some(h) => h.min(opts.max_step),
            None => s.initial_step(),
        };
        for (c, y) in s.cont[0].iter_mut().zip(&s.y) {
            *c = *y;
        }
        Ok(s)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Derivative at the current point.
    pub fn dydt(&self) -> &[f64] {
        &self.k[0]
    }

    pub fn t_prev(&self) -> f64 {
        self.t_old
    }

    pub fn set_max_step(&mut self, max_step: f64) {
        self.opts.max_step = max_step;
        self.h = self.h.min(max_step);
    }

    fn scale(&self, a: f64, b: f64) -> f64 {
        self.opts.atol + self.opts.rtol * a.abs().max(b.abs())
    }

    fn initial_step(&mut self) -> f64 {
        let n = self.y.len() as f64;
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..self.y.len() {
            let sc = self.scale(self.y[i], self.y[i]);
            d0 += (self.y[i] / sc).powi(2);
            d1 += (self.k[0][i] / sc).powi(2);
        }
        let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(self.opts.max_step);
        for i in 0..self.y.len() {
            self.tmp[i] = self.y[i] + h0 * self.k[0][i];
        }
        self.sys.rhs(self.t + h0, &self.tmp, &mut self.k[1]);
        self.stats.rhs_evals += 1;
        let mut d2 = 0.0;
        for i in 0..self.y.len() {
            let sc = self.scale(self.y[i], self.y[i]);
            d2 += ((self.k[1][i] - self.k[0][i]) / sc).powi(2);
        }
        let d2 = (d2 / n).sqrt() / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(self.opts.max_step)
    }

    /// Attempt a step of size `h` from the current state; returns the error norm.
    fn trial(&mut self, h: f64) -> f64 {
        let n = self.y.len();
        let t = self.t;
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let y = &self.y;
        let tmp = &mut self.tmp;
        for i in 0..n {
            tmp[i] = y[i] + h * A21 * k1[i];
        }
        self.sys.rhs(t + C2 * h, tmp, k2);
        for i in 0..n {
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        self.sys.rhs(t + C3 * h, tmp, k3);
        for i in 0..n {
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        self.sys.rhs(t + C4 * h, tmp, k4);
        for i in 0..n {
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        self.sys.rhs(t + C5 * h, tmp, k5);
        for i in 0..n {
            tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        self.sys.rhs(t + h, tmp, k6);
        let y_new = &mut self.y_new;
        for i in 0..n {
            y_new[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        self.sys.rhs(t + h, y_new, k7);
        self.stats.rhs_evals += 6;
        let mut err = 0.0;
        for i in 0..n {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = self.opts.atol + self.opts.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sc).powi(2);
        }
        (err / n as f64).sqrt()
    }

    /// Advance one accepted step, never past `t_limit`.
    pub fn step(&mut self, t_limit: f64) -> Result<()> {
        if self.t >= t_limit {
            return Ok(());
        }
        loop {
            if self.stats.steps + self.stats.rejected >= self.opts.max_steps {
                return Err(Error::NoConvergence(format!(
                    "step budget of {} exhausted at t = {}",
                    self.opts.max_steps, self.t
                )));
            }
            let mut h = self.h.min(self.opts.max_step);
            let remaining = t_limit - self.t;
            if h >= remaining {
                h = remaining;
            } else if h > 0.5 * remaining {
                // split the remainder evenly instead of leaving a sliver
                h = 0.5 * remaining;
            }
            if h <= 16.0 * f64::EPSILON * self.t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t: self.t });
            }
            let err = self.trial(h);
            let mut negative = false;
            if self.opts.nonnegative && err <= 1.0 {
                negative = self.y_new.iter().any(|&x| x < -crate::kinetics::NEGATIVE_CLAMP);
            }
            if err.is_finite() && err <= 1.0 && !negative {
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                self.accept(h);
                self.h = (h * fac).min(self.opts.max_step);
                return Ok(());
            }
            self.stats.rejected += 1;
            let fac = if negative || !err.is_finite() { 0.5 } else { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) };
            self.h = h * fac;
        }
    }

    fn accept(&mut self, h: f64) {
        let n = self.y.len();
        let mut clamped = false;
        if self.opts.nonnegative {
            for x in self.y_new.iter_mut() {
                if *x < 0.0 {
                    *x = 0.0;
                    clamped = true;
                }
            }
        }
        let [k1, _k2, k3, k4, k5, k6, k7] = &self.k;
        for i in 0..n {
            let ydiff = self.y_new[i] - self.y[i];
            let bspl = h * k1[i] - ydiff;
            self.cont[0][i] = self.y[i];
            self.cont[1][i] = ydiff;
            self.cont[2][i] = bspl;
            self.cont[3][i] = ydiff - h * k7[i] - bspl;
            self.cont[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        self.t_old = self.t;
        self.t += h;
        self.h_last = h;
        std::mem::swap(&mut self.y, &mut self.y_new);
        if clamped {
            let (first, rest) = self.k.split_at_mut(1);
            self.sys.rhs(self.t, &self.y, &mut first[0]);
            let _ = rest;
            self.stats.rhs_evals += 1;
        } else {
            let (first, rest) = self.k.split_at_mut(6);
            std::mem::swap(&mut first[0], &mut rest[0]);
        }
        self.stats.steps += 1;
    }

    /// Interpolated state at `t` inside the last accepted step.
    pub fn dense_into(&self, t: f64, out: &mut [f64]) {
        if self.h_last == 0.0 {
            out.copy_from_slice(&self.y);
            return;
        }
        let theta = ((t - self.t_old) / self.h_last).clamp(0.0, 1.0);
        let theta1 = 1.0 - theta;
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.cont[0][i]
                + theta
                    * (self.cont[1][i]
                        + theta1 * (self.cont[2][i] + theta * (self.cont[3][i] + theta1 * self.cont[4][i])));
        }
    }

    pub fn dense(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.y.len()];
        self.dense_into(t, &mut out);
        out
    }
}

/// Integrate to `t_end` and return the final state.
pub fn integrate_to<S: OdeSystem + ?Sized>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    opts: SolverOptions,
) -> Result<(Vec<f64>, SolverStats)> {
    let mut solver = Dopri5::new(sys, t0, y0, opts)?;
    while solver.t() < t_end {
        solver.step(t_end)?;
    }
    Ok((solver.y().to_vec(), solver.stats))
}
