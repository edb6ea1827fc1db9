//! Method-of-lines solver for the 1-D reaction–diffusion–taxis system
//!
//! ```text
//! u_t = u_xx + F1(u, v)
//! v_t = d v_xx + c (v u_x)_x + F2(u, v)
//! ```
//!
//! on `[0, L]` with no-flux ends. Cells are uniform and cell-centred; the ends
//! use mirror ghost cells, so every boundary face carries zero flux and the
//! scheme conserves `Σ u h` and `Σ v h` exactly when reactions are off.

use crate::error::{Error, Result};
use crate::kinetics::{rates_unchecked, Params, State};
use crate::ode::{Dopri5, OdeSystem, SolverOptions, SolverStats};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Default amplitude of the Gaussian perturbation added to homogeneous states.
pub const NOISE_AMPLITUDE: f64 = 0.01;
const BOUND_SLACK: f64 = 1e-6;
const SIGN_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub length: f64,
    pub cells: usize,
}

impl GridSpec {
    pub fn new(length: f64, cells: usize) -> Result<Self> {
        if cells < 16 {
            return Err(Error::Usage(format!("grid needs at least 16 cells, got {cells}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Usage("domain length must be positive".into()));
        }
        Ok(Self { length, cells })
    }

    /// Domain holding `wavelengths` whole periods of `cos(k x)`.
    pub fn fitted(k: f64, wavelengths: usize, cells: usize) -> Result<Self> {
        Self::new(wavelengths as f64 * 2.0 * std::f64::consts::PI / k, cells)
    }

    pub fn h(&self) -> f64 {
        self.length / self.cells as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.h()
    }

    /// Step cap for the explicit integrator.
    pub fn max_step(&self, d: f64) -> f64 {
        0.9 * self.h() * self.h() / (2.0 * d.max(1.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field1D {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl Field1D {
    pub fn homogeneous(grid: &GridSpec, s: State) -> Self {
        Self { t: 0.0, u: vec![s.u; grid.cells], v: vec![s.v; grid.cells] }
    }

    /// `s` plus independent Gaussian noise in every cell, clipped at zero.
    pub fn noisy(grid: &GridSpec, s: State, amplitude: f64, seed: u64) -> Result<Self> {
        let normal = Normal::new(0.0, amplitude).map_err(|e| Error::Usage(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut field = Self::homogeneous(grid, s);
        for x in field.u.iter_mut() {
            *x = (*x + normal.sample(&mut rng)).max(0.0);
        }
        for x in field.v.iter_mut() {
            *x = (*x + normal.sample(&mut rng)).max(0.0);
        }
        Ok(field)
    }

    /// Sampled profile `(u(x_i), v(x_i))`.
    pub fn from_fn(grid: &GridSpec, profile: impl Fn(f64) -> State) -> Self {
        let (u, v) = (0..grid.cells).map(|i| profile(grid.x(i))).map(|s| (s.u, s.v)).unzip();
        Self { t: 0.0, u, v }
    }

    pub fn mean_u(&self) -> f64 {
        self.u.iter().sum::<f64>() / self.u.len() as f64
    }

    pub fn mean_v(&self) -> f64 {
        self.v.iter().sum::<f64>() / self.v.len() as f64
    }

    fn validate(&self, grid: &GridSpec) -> Result<()> {
        if self.u.len() != grid.cells || self.v.len() != grid.cells {
            return Err(Error::Usage("field length does not match the grid".into()));
        }
        if self.u.iter().chain(&self.v).any(|x| !x.is_finite() || *x < -SIGN_SLACK) {
            return Err(Error::Domain("initial field must be finite and non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaxisScheme {
    /// Arithmetic mean of `v` at faces.
    Central,
    /// Upwind `v` with respect to the taxis drift `−c u_x`.
    Upwind,
}

/// Stop once `max |∂y/∂t| < tol` has held for `window` time units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyCriterion {
    pub tol: f64,
    pub window: f64,
}

impl Default for SteadyCriterion {
    fn default() -> Self {
        Self { tol: 1e-8, window: 50.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeOptions {
    pub t_end: f64,
    pub frame_dt: f64,
    pub rel_tol: f64,
    pub scheme: TaxisScheme,
    pub reactions: bool,
    pub steady: Option<SteadyCriterion>,
    /// Abort when a frame violates the discrete bounds.
    pub enforce_bounds: bool,
    /// Step budget; the solver default when `None`.
    pub max_steps: Option<usize>,
}

impl Default for PdeOptions {
    fn default() -> Self {
        Self {
            t_end: 100.0,
            frame_dt: 1.0,
            rel_tol: 1e-6,
            scheme: TaxisScheme::Central,
            reactions: true,
            steady: None,
            enforce_bounds: true,
            max_steps: None,
        }
    }
}

/// Discrete L1 integrals and the a-priori bounds they must respect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsReport {
    pub t: f64,
    pub k1: f64,
    pub k2: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
}

impl BoundsReport {
    pub fn holds(&self) -> bool {
        self.k1 <= self.a + BOUND_SLACK
            && self.k2 <= self.b + BOUND_SLACK
            && self.u_min >= -SIGN_SLACK
            && self.u_max <= self.c + BOUND_SLACK
            && self.v_min >= -SIGN_SLACK
    }
}

#[derive(Debug, Clone, Copy)]
struct BoundConstants {
    a: f64,
    b: f64,
    c: f64,
}

impl BoundConstants {
    fn new(p: &Params, grid: &GridSpec, ic: &Field1D) -> Self {
        let h = grid.h();
        let int_u: f64 = ic.u.iter().sum::<f64>() * h;
        let int_v: f64 = ic.v.iter().sum::<f64>() * h;
        let a = int_u.max(grid.length);
        let b = (int_u + p.e * int_v + (p.f * p.f + 1.0) / p.f * a) / p.e;
        let c = ic.u.iter().copied().fold(1.0, f64::max);
        Self { a, b, c }
    }

    fn report(&self, grid: &GridSpec, t: f64, u: &[f64], v: &[f64]) -> BoundsReport {
        let h = grid.h();
        BoundsReport {
            t,
            k1: u.iter().sum::<f64>() * h,
            k2: v.iter().sum::<f64>() * h,
            a: self.a,
            b: self.b,
            c: self.c,
            u_min: u.iter().copied().fold(f64::INFINITY, f64::min),
            u_max: u.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            v_min: v.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

/// Semi-discrete right-hand side; state layout `[u_0..u_{N-1}, v_0..v_{N-1}]`.
pub struct MethodOfLines<'a> {
    p: &'a Params,
    n: usize,
    inv_h2: f64,
    scheme: TaxisScheme,
    reactions: bool,
}

impl<'a> MethodOfLines<'a> {
    pub fn new(p: &'a Params, grid: &GridSpec, scheme: TaxisScheme, reactions: bool) -> Self {
        Self { p, n: grid.cells, inv_h2: 1.0 / (grid.h() * grid.h()), scheme, reactions }
    }
}

impl OdeSystem for MethodOfLines<'_> {
    fn dim(&self) -> usize {
        2 * self.n
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let n = self.n;
        let (u, v) = y.split_at(n);
        let (du, dv) = dy.split_at_mut(n);
        let (d, c) = (self.p.d, self.p.c);
        let k = self.inv_h2;
        // flux through the left face of cell i; zero at the mirrored boundary
        let mut left_u = 0.0;
        let mut left_v = 0.0;
        for i in 0..n {
            let (right_u, right_v) = if i + 1 < n {
                let gu = u[i + 1] - u[i];
                let v_face = match self.scheme {
                    TaxisScheme::Central => 0.5 * (v[i] + v[i + 1]),
                    TaxisScheme::Upwind => {
                        if gu <= 0.0 {
                            v[i]
                        } else {
                            v[i + 1]
                        }
                    }
                };
                (gu, d * (v[i + 1] - v[i]) + c * v_face * gu)
            } else {
                (0.0, 0.0)
            };
            du[i] = k * (right_u - left_u);
            dv[i] = k * (right_v - left_v);
            if self.reactions {
                let (fu, fv) = rates_unchecked(self.p, u[i], v[i]);
                du[i] += fu;
                dv[i] += fv;
            }
            left_u = right_u;
            left_v = right_v;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdeRun {
    pub frames: Vec<Field1D>,
    pub bounds: Vec<BoundsReport>,
    pub stats: SolverStats,
    /// Time at which the steady criterion was met, if it was.
    pub steady_at: Option<f64>,
}

impl PdeRun {
    pub fn last(&self) -> &Field1D {
        self.frames.last().expect("a run always holds the initial frame")
    }
}

/// The run stopped early; `frames` holds everything up to the failure.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{error} after {} frames", frames.len())]
pub struct PdeFailure {
    pub error: Error,
    pub frames: Vec<Field1D>,
}

impl From<PdeFailure> for Error {
    fn from(f: PdeFailure) -> Self {
        f.error
    }
}

pub fn simulate_pde(
    p: &Params,
    grid: &GridSpec,
    ic: &Field1D,
    opts: &PdeOptions,
) -> std::result::Result<PdeRun, PdeFailure> {
    let fail = |error| PdeFailure { error, frames: Vec::new() };
    p.validate().map_err(fail)?;
    ic.validate(grid).map_err(fail)?;
    if !(opts.t_end > ic.t && opts.frame_dt > 0.0) {
        return Err(fail(Error::Usage("need t_end > t0 and a positive frame spacing".into())));
    }
    let n = grid.cells;
    let sys = MethodOfLines::new(p, grid, opts.scheme, opts.reactions);
    let y0: Vec<f64> = ic.u.iter().chain(&ic.v).copied().collect();
    let defaults = SolverOptions::default();
    let solver_opts = SolverOptions {
        rtol: opts.rel_tol,
        atol: opts.rel_tol * 1e-3,
        max_step: grid.max_step(p.d),
        nonnegative: true,
        max_steps: opts.max_steps.unwrap_or(defaults.max_steps),
        ..defaults
    };
    let mut solver = Dopri5::new(&sys, ic.t, &y0, solver_opts).map_err(fail)?;
    let consts = BoundConstants::new(p, grid, ic);

    let mut run = PdeRun {
        frames: vec![ic.clone()],
        bounds: vec![consts.report(grid, ic.t, &ic.u, &ic.v)],
        stats: SolverStats::default(),
        steady_at: None,
    };
    let mut frame_index = 1usize;
    let mut buf = vec![0.0; 2 * n];
    let mut quiet_since: Option<f64> = None;

    let push_frame = |run: &mut PdeRun, t: f64, y: &[f64]| -> Result<()> {
        let (u, v) = y.split_at(n);
        let report = consts.report(grid, t, u, v);
        run.frames.push(Field1D { t, u: u.to_vec(), v: v.to_vec() });
        run.bounds.push(report);
        if opts.enforce_bounds && !report.holds() {
            return Err(Error::Invariant(format!("discrete bounds violated at t = {t}: {report:?}")));
        }
        Ok(())
    };

    while solver.t() < opts.t_end {
        if let Err(error) = solver.step(opts.t_end) {
            run.stats = solver.stats;
            return Err(PdeFailure { error, frames: run.frames });
        }
        loop {
            let tf = ic.t + frame_index as f64 * opts.frame_dt;
            if tf > solver.t() * (1.0 + 1e-14) || tf > opts.t_end * (1.0 + 1e-14) {
                break;
            }
            solver.dense_into(tf.min(solver.t()), &mut buf);
            if let Err(error) = push_frame(&mut run, tf, &buf) {
                return Err(PdeFailure { error, frames: run.frames });
            }
            frame_index += 1;
        }
        if let Some(crit) = opts.steady {
            let rate = solver.dydt().iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if rate < crit.tol {
                let since = *quiet_since.get_or_insert(solver.t());
                if solver.t() - since >= crit.window {
                    run.steady_at = Some(solver.t());
                    break;
                }
            } else {
                quiet_since = None;
            }
        }
    }
    let t = solver.t();
    if run.frames.last().is_none_or(|f| f.t < t - 1e-12) {
        let y = solver.y().to_vec();
        if let Err(error) = push_frame(&mut run, t, &y) {
            return Err(PdeFailure { error, frames: run.frames });
        }
    }
    run.stats = solver.stats;
    Ok(run)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldStatistics {
    /// Spatial averages of the last frame.
    pub mean_u: f64,
    pub mean_v: f64,
    /// `max u − min u` on the last frame.
    pub peak_to_peak_u: f64,
    /// Standard deviation over time of `⟨u⟩`.
    pub temporal_std_mean_u: f64,
    /// Spatial standard deviation of `u`, averaged and maximized over frames.
    pub spatial_std_u: f64,
    pub spatial_std_u_max: f64,
    /// Index `m` of the dominant cosine mode `cos(mπx/L)` of the last frame.
    pub dominant_mode: Option<usize>,
    pub dominant_wavenumber: Option<f64>,
}

fn std_dev(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    (xs.map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Cosine-mode amplitudes of a cell-centred profile about its mean.
pub fn cosine_spectrum(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    (0..n)
        .map(|m| {
            if m == 0 {
                return 0.0;
            }
            let s: f64 = values
                .iter()
                .enumerate()
                .map(|(i, x)| (x - mean) * (std::f64::consts::PI * m as f64 * (i as f64 + 0.5) / n as f64).cos())
                .sum();
            2.0 * s / n as f64
        })
        .collect()
}

pub fn field_statistics(frames: &[Field1D], grid: &GridSpec) -> Result<FieldStatistics> {
    let last = frames.last().ok_or_else(|| Error::Usage("no frames".into()))?;
    let spatial: Vec<f64> = frames.iter().map(|f| std_dev(f.u.iter().copied())).collect();
    let spectrum = cosine_spectrum(&last.u);
    let (mode, amp) = spectrum
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |best, (m, a)| if a.abs() > best.1 { (m, a.abs()) } else { best });
    let dominant_mode = (amp > 1e-12).then_some(mode);
    Ok(FieldStatistics {
        mean_u: last.mean_u(),
        mean_v: last.mean_v(),
        peak_to_peak_u: last.u.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - last.u.iter().copied().fold(f64::INFINITY, f64::min),
        temporal_std_mean_u: std_dev(frames.iter().map(|f| f.mean_u())),
        spatial_std_u: spatial.iter().sum::<f64>() / spatial.len() as f64,
        spatial_std_u_max: spatial.iter().copied().fold(0.0, f64::max),
        dominant_mode,
        dominant_wavenumber: dominant_mode.map(|m| std::f64::consts::PI * m as f64 / grid.length),
    })
}
