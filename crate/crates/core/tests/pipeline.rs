//! Cross-module checks: each stage feeds the next the way the CLI chains them.

use ecopattern::bifurcation::{hopf_thresholds, saddle_node_thresholds, transcritical_threshold, Control, ThresholdKind};
use ecopattern::equilibria::{find_equilibria, EquilibriumKind, Stability};
use ecopattern::integrate::{classify_attractor, solve_ode, AttractorKind};
use ecopattern::kinetics::{dimensional_rates, nondimensionalize, reaction_rates, to_dimensionless_state, DimensionalParams};
use ecopattern::pde::{field_statistics, simulate_pde, Field1D, GridSpec, PdeOptions};
use ecopattern::spatial::{classify_region, dispersion, turing_threshold, Linearization, Region};
use ecopattern::wna::{amplitude_model, WnaOptions};
use ecopattern::{Params, State};

fn base(b: f64, f: f64) -> Params {
    Params::temporal(7.0, b, 0.95, f).unwrap()
}

#[test]
fn threshold_ordering_along_f_at_b7() {
    let p = base(7.0, 0.85);
    let tc = transcritical_threshold(&p).value;
    let sn = saddle_node_thresholds(&p, Control::F);
    let sn1 = sn.iter().find(|r| r.kind == ThresholdKind::Sn1).unwrap().value;
    let sn2 = sn.iter().find(|r| r.kind == ThresholdKind::Sn2).unwrap().value;
    let h = hopf_thresholds(&p, Control::F);
    assert!(h.iter().any(|r| tc < r.value && r.value < sn1), "{h:?}");
    assert!(sn2 < tc && tc < sn1, "{sn2} {tc} {sn1}");
    // interior count changes by two across each fold
    let count = |f: f64| find_equilibria(&base(7.0, f)).unwrap().interior_count();
    assert_eq!(count(sn2 - 1e-3), 1);
    assert_eq!(count(sn2 + 1e-3), 3);
    assert_eq!(count(sn1 - 1e-3), 2);
    assert_eq!(count(sn1 + 1e-3), 0);
}

#[test]
fn equilibria_are_zeros_of_the_rates() {
    for f in [0.7, 0.82, 0.9, 1.05] {
        let p = base(7.0, f);
        for e in &find_equilibria(&p).unwrap().equilibria {
            let (fu, fv) = reaction_rates(&p, e.state).unwrap();
            assert!(fu.abs() < 1e-10 && fv.abs() < 1e-10, "{e:?}");
        }
    }
}

#[test]
fn stable_interior_equilibrium_attracts_nearby_orbits() {
    let p = base(5.65, 0.98);
    let set = find_equilibria(&p).unwrap();
    let e = set.e1_star().unwrap();
    assert_eq!(e.stability, Stability::Stable);
    let label = classify_attractor(&p, State::new(e.state.u + 0.05, e.state.v)).unwrap();
    assert_eq!(label.kind, AttractorKind::Equilibrium(EquilibriumKind::Interior(1)));
}

#[test]
fn dimensional_model_agrees_after_rescaling() {
    let dp = DimensionalParams {
        alpha: 3.0,
        beta: 2.0,
        gamma: 0.4,
        delta: 0.5,
        zeta: 0.8,
        sigma: 1.5,
        eta: 0.7,
        chi: 2.0,
        d1: 0.2,
        d2: 3.0,
    };
    let p = nondimensionalize(&dp).unwrap();
    let (n, pred) = (0.9, 0.4);
    let (dn, dp_) = dimensional_rates(&dp, n, pred);
    let s = to_dimensionless_state(&dp, n, pred);
    let (fu, fv) = reaction_rates(&p, s).unwrap();
    // time scales with sigma, densities with eta/sigma and delta/sigma
    assert!((fu - dn * dp.eta / (dp.sigma * dp.sigma)).abs() < 1e-12);
    assert!((fv - dp_ * dp.delta / (dp.sigma * dp.sigma)).abs() < 1e-12);
}

#[test]
fn turing_threshold_is_where_dispersion_touches_zero() {
    let p = Params::new(7.0, 5.65, 0.0, 80.0, 0.95, 0.98).unwrap();
    let eq = find_equilibria(&p).unwrap().e1_star().unwrap().state;
    let t = turing_threshold(&p, eq).unwrap();
    let at = Linearization::new(&p.with_c(t.c_t), eq).unwrap();
    assert!(at.h_min().abs() < 1e-8);
    assert!((at.k_min().sqrt() - t.k_t).abs() < 1e-8);
    let k2 = [t.k_t * t.k_t];
    let below = dispersion(&p.with_c(0.95 * t.c_t), eq, &k2).unwrap();
    let above = dispersion(&p.with_c(1.05 * t.c_t), eq, &k2).unwrap();
    assert!(below.re_lambda[0] < 0.0 && above.re_lambda[0] > 0.0);
    assert_eq!(classify_region(&p.with_c(1.05 * t.c_t), eq).unwrap(), Region::Turing);
}

#[test]
fn amplitude_model_matches_linear_data() {
    let p = Params::new(7.0, 5.65, 27.0, 80.0, 0.95, 0.98).unwrap();
    let m = amplitude_model(&p, WnaOptions::default()).unwrap();
    let eq = find_equilibria(&p).unwrap().e1_star().unwrap().state;
    let t = turing_threshold(&p, eq).unwrap();
    assert!((m.c_t - t.c_t).abs() < 1e-9 && (m.k_t - t.k_t).abs() < 1e-9);
    // subcritical pattern branch
    assert!(m.sigma > 0.0 && m.l < 0.0);
    let fold = m.fold().unwrap();
    assert!(fold < m.c_t);
    let pred = m.pattern_prediction(27.0).unwrap();
    let profile_mean: f64 = (0..400).map(|i| pred.profile.eval(i as f64 * 0.01 / m.k_t).u).sum::<f64>() / 400.0;
    assert!(pred.profile.peak_to_peak_u() > 0.1 && profile_mean.is_finite());
}

#[test]
fn subthreshold_noise_decays_in_the_pde() {
    let p = Params::new(7.0, 5.65, 10.0, 80.0, 0.95, 0.98).unwrap();
    let eq = find_equilibria(&p).unwrap().e1_star().unwrap().state;
    let g = GridSpec::new(60.0, 64).unwrap();
    let ic = Field1D::noisy(&g, eq, 0.01, 3).unwrap();
    let opts = PdeOptions { t_end: 200.0, frame_dt: 50.0, ..Default::default() };
    let run = simulate_pde(&p, &g, &ic, &opts).unwrap();
    let first = field_statistics(std::slice::from_ref(&run.frames[0]), &g).unwrap();
    let last = field_statistics(std::slice::from_ref(run.last()), &g).unwrap();
    assert!(last.spatial_std_u < 0.1 * first.spatial_std_u, "{first:?} {last:?}");
    assert!(run.bounds.iter().all(|b| b.holds()));
}

#[test]
fn ode_and_zero_taxis_pde_share_kinetics() {
    let p = Params::new(7.0, 7.0, 0.0, 1.0, 0.95, 0.8).unwrap();
    let g = GridSpec::new(10.0, 16).unwrap();
    let s0 = State::new(1.4, 0.05);
    let opts = PdeOptions { t_end: 20.0, frame_dt: 20.0, rel_tol: 1e-10, ..Default::default() };
    let run = simulate_pde(&p, &g, &Field1D::homogeneous(&g, s0), &opts).unwrap();
    let traj = solve_ode(&p, s0, 20.0, 1e-11).unwrap();
    let end = traj.states.last().unwrap();
    assert!((run.last().u[3] - end.u).abs() < 1e-6 && (run.last().v[3] - end.v).abs() < 1e-6);
}
