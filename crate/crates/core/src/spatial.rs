//! Linear stability of homogeneous states under diffusion and prey-taxis.
//!
//! Perturbations `∝ cos(√k x)` with Laplacian eigenvalue `k` evolve under
//! `J − k·D`, `D = [[1, 0], [c v*, d]]`, whose trace and determinant are
//! `T(k) = a10 + b01 − (1 + d)k` and
//! `H(k) = d k² − (a10 d + b01 − c v* a01) k + det J`.

use crate::error::{domain, Result};
use crate::kinetics::{jacobian_unchecked, Params, State};
use crate::linalg::{quadratic_eigenvalues, Mat2};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Stable,
    Turing,
    Hopf,
    TuringHopf,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Stable => "stable",
            Self::Turing => "Turing",
            Self::Hopf => "Hopf",
            Self::TuringHopf => "Turing-Hopf",
        })
    }
}

/// Linearization data at a homogeneous state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linearization {
    pub j: Mat2,
    pub v: f64,
    pub c: f64,
    pub d: f64,
}

impl Linearization {
    pub fn new(p: &Params, eq: State) -> Result<Self> {
        p.validate()?;
        let eq = eq.sanitized()?;
        Ok(Self { j: jacobian_unchecked(p, eq.u, eq.v), v: eq.v, c: p.c, d: p.d })
    }

    pub fn trace(&self, k: f64) -> f64 {
        self.j.trace() - (1.0 + self.d) * k
    }

    /// Linear coefficient of `H` without its sign: `a10 d + b01 − c v* a01`.
    fn h_slope(&self) -> f64 {
        self.j.m[0][0] * self.d + self.j.m[1][1] - self.c * self.v * self.j.m[0][1]
    }

    pub fn det(&self, k: f64) -> f64 {
        self.d * k * k - self.h_slope() * k + self.j.det()
    }

    /// Unconstrained minimizer of `H`.
    pub fn k_min(&self) -> f64 {
        self.h_slope() / (2.0 * self.d)
    }

    /// Minimum of `H` over `k ≥ 0`.
    pub fn h_min(&self) -> f64 {
        self.det(self.k_min().max(0.0))
    }

    /// Largest real part of the eigenvalues of `J − k D`.
    pub fn growth_rate(&self, k: f64) -> f64 {
        quadratic_eigenvalues(self.trace(k), self.det(k))[0].re
    }

    /// Operator `J − k D`.
    pub fn operator(&self, k: f64) -> Mat2 {
        Mat2::new(
            self.j.m[0][0] - k,
            self.j.m[0][1],
            self.j.m[1][0] - k * self.c * self.v,
            self.j.m[1][1] - k * self.d,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionResult {
    /// Laplacian eigenvalues sampled.
    pub k: Vec<f64>,
    pub trace: Vec<f64>,
    pub det: Vec<f64>,
    pub re_lambda: Vec<f64>,
    pub k_min: f64,
    pub h_min: f64,
}

pub fn dispersion(p: &Params, eq: State, k_grid: &[f64]) -> Result<DispersionResult> {
    let lin = Linearization::new(p, eq)?;
    Ok(DispersionResult {
        k: k_grid.to_vec(),
        trace: k_grid.iter().map(|&k| lin.trace(k)).collect(),
        det: k_grid.iter().map(|&k| lin.det(k)).collect(),
        re_lambda: k_grid.iter().map(|&k| lin.growth_rate(k)).collect(),
        k_min: lin.k_min(),
        h_min: lin.h_min(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuringPoint {
    pub c_t: f64,
    /// Critical wavenumber, the square root of the critical Laplacian eigenvalue.
    pub k_t: f64,
    /// Region of the supplied parameters (at their own `c`).
    pub region: Region,
}

/// Critical taxis strength where `min_k H` touches zero.
pub fn turing_threshold(p: &Params, eq: State) -> Result<TuringPoint> {
    let lin = Linearization::new(p, eq)?;
    let det = lin.j.det();
    if det <= 0.0 {
        return Err(domain(format!("det J = {det} is not positive")));
    }
    let (a10, a01, b01) = (lin.j.m[0][0], lin.j.m[0][1], lin.j.m[1][1]);
    let denom = a01 * lin.v;
    if denom == 0.0 {
        return Err(domain("taxis has no linear effect at this state"));
    }
    let c_t = (a10 * p.d + b01 - 2.0 * (p.d * det).sqrt()) / denom;
    let at_threshold = Linearization { c: c_t, ..lin };
    let k_t = at_threshold.k_min().max(0.0).sqrt();
    Ok(TuringPoint { c_t, k_t, region: classify_linearization(&lin) })
}

fn classify_linearization(lin: &Linearization) -> Region {
    let hopf = lin.trace(0.0) > 0.0;
    let turing = lin.k_min() > 0.0 && lin.h_min() < 0.0;
    match (turing, hopf) {
        (false, false) => Region::Stable,
        (true, false) => Region::Turing,
        (false, true) => Region::Hopf,
        (true, true) => Region::TuringHopf,
    }
}

pub fn classify_region(p: &Params, eq: State) -> Result<Region> {
    Ok(classify_linearization(&Linearization::new(p, eq)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::find_equilibria;
    use approx::assert_relative_eq;

    fn setup(f: f64, d: f64, c: f64) -> (Params, State) {
        let p = Params::new(7.0, 5.65, c, d, 0.95, f).unwrap();
        let eq = find_equilibria(&p).unwrap().e1_star().unwrap().state;
        (p, eq)
    }

    /// Threshold from a grid scan of `min_k H` and bisection in `c`.
    fn brute_force_threshold(p: &Params, eq: State) -> f64 {
        let min_h = |c: f64| {
            let lin = Linearization::new(&p.with_c(c), eq).unwrap();
            let k_max = 4.0 * lin.k_min().abs().max(1.0);
            // coarse scan, then golden-section refinement around the best sample
            let n = 4000;
            let mut best = (0.0, f64::INFINITY);
            for i in 0..=n {
                let k = k_max * i as f64 / n as f64;
                let h = lin.det(k);
                if h < best.1 {
                    best = (k, h);
                }
            }
            let (mut lo, mut hi) = ((best.0 - k_max / n as f64).max(0.0), best.0 + k_max / n as f64);
            for _ in 0..200 {
                let m1 = lo + (hi - lo) * 0.382;
                let m2 = lo + (hi - lo) * 0.618;
                if lin.det(m1) < lin.det(m2) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            lin.det(0.5 * (lo + hi))
        };
        let (mut lo, mut hi) = (0.0, 1000.0);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if min_h(m) > 0.0 {
                lo = m;
            } else {
                hi = m;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn homogeneous_mode_matches_jacobian() {
        let (p, eq) = setup(0.98, 80.0, 20.0);
        let lin = Linearization::new(&p, eq).unwrap();
        assert_relative_eq!(lin.trace(0.0), lin.j.trace());
        assert_relative_eq!(lin.det(0.0), lin.j.det());
        // H agrees with the determinant of J − kD
        for k in [0.01, 0.1, 0.5] {
            assert_relative_eq!(lin.det(k), lin.operator(k).det(), max_relative = 1e-12);
            assert_relative_eq!(lin.trace(k), lin.operator(k).trace(), max_relative = 1e-12);
        }
    }

    #[test]
    fn reference_turing_point() {
        let (p, eq) = setup(0.98, 80.0, 0.0);
        let t = turing_threshold(&p, eq).unwrap();
        assert_relative_eq!(t.c_t, 26.889081, max_relative = 1e-4);
        assert_relative_eq!(t.k_t, 0.283128, max_relative = 1e-4);
        assert!((brute_force_threshold(&p, eq) - t.c_t).abs() < 1e-6);
        let at = Linearization::new(&p.with_c(t.c_t), eq).unwrap();
        assert!(at.h_min().abs() < 1e-8);
        assert!(Linearization::new(&p.with_c(t.c_t + 0.1), eq).unwrap().h_min() < 0.0);
    }

    #[test]
    fn other_turing_points() {
        let (p, eq) = setup(0.95, 100.0, 0.0);
        assert_relative_eq!(turing_threshold(&p, eq).unwrap().c_t, 31.4793, max_relative = 1e-3);
        let (p, eq) = setup(1.07, 80.0, 0.0);
        let c_t = turing_threshold(&p, eq).unwrap().c_t;
        assert!((c_t - 5.552).abs() < 1e-3, "{c_t}");
        assert!((brute_force_threshold(&p, eq) - c_t).abs() < 1e-6);
    }

    #[test]
    fn regions() {
        let (p, eq) = setup(1.12, 40.0, 5.0);
        assert_eq!(classify_region(&p, eq).unwrap(), Region::Hopf);
        let (p, eq) = setup(1.07, 80.0, 6.0);
        assert_eq!(classify_region(&p, eq).unwrap(), Region::Turing);
        let (p, eq) = setup(1.07, 80.0, 5.0);
        assert_eq!(classify_region(&p, eq).unwrap(), Region::Stable);
    }

    #[test]
    fn dispersion_samples() {
        let (p, eq) = setup(0.98, 80.0, 30.0);
        let ks: Vec<f64> = (0..50).map(|i| i as f64 * 0.01).collect();
        let r = dispersion(&p, eq, &ks).unwrap();
        // T is affine in k
        let slope = r.trace[1] - r.trace[0];
        for w in r.trace.windows(2) {
            assert_relative_eq!(w[1] - w[0], slope, epsilon = 1e-12);
        }
        assert_relative_eq!(r.k_min, (p.d * Linearization::new(&p, eq).unwrap().j.m[0][0]
            + Linearization::new(&p, eq).unwrap().j.m[1][1]
            - Linearization::new(&p, eq).unwrap().j.m[0][1] * p.c * eq.v) / (2.0 * p.d), max_relative = 1e-12);
        assert!(r.re_lambda.iter().any(|&x| x > 0.0));
    }

    #[test]
    fn nonpositive_determinant_rejected() {
        let p = Params::new(7.0, 7.0, 0.0, 80.0, 0.95, 0.82).unwrap();
        let set = find_equilibria(&p).unwrap();
        let saddle = set.get(crate::equilibria::EquilibriumKind::Interior(2)).unwrap().state;
        assert!(turing_threshold(&p, saddle).is_err());
    }
}
