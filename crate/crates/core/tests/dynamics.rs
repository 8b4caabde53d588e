//! Interacting diffusions: the SDE sampler, the quasi-observable generator,
//! the correlation hierarchy and the functional evolution identities.

use std::f64::consts::TAU;

use bogo_core::dynamics::*;
use bogo_core::equilibrium::{PairPotential, RadialForm, RadialPotential};
use bogo_core::gcmc::{Bins, PeriodicBox};
use bogo_core::Error;

fn desk_potential() -> RadialPotential {
    RadialPotential::poly_power(2.0, 4, 1.0).unwrap()
}

fn pair(v: RadialPotential) -> PairPotential {
    PairPotential::radial(v, 1.0).unwrap()
}

fn sde(init: InitRule, potential: RadialPotential, dt: f64, t_end: f64, n_replicas: usize, record: Vec<f64>, seed: u64) -> SdeConfig {
    SdeConfig {
        sim_box: PeriodicBox::new(1, 10.0).unwrap(),
        init,
        beta: 1.0,
        potential,
        dt,
        t_end,
        n_replicas,
        force_cap: 100.0,
        noise: true,
        record_times: record,
        seed,
    }
}

// ---------------------------------------------------------------- SDE

#[test]
fn free_particles_diffuse_with_unit_variance_rate() {
    let cfg = sde(InitRule::Poisson { z: 1.0 }, RadialPotential::zero(1.0), 0.01, 1.0, 400, vec![0.5, 1.0], 21);
    let out = simulate_sde(&cfg).unwrap();
    for t in [0.5, 1.0] {
        let var = displacement_variance(&out, t).unwrap();
        assert!(var.within(t, 3.0, 0.0), "t = {t}: {var:?}");
    }
    let mut cfg2 = cfg.clone();
    cfg2.sim_box = PeriodicBox::new(2, 4.0).unwrap();
    let out = simulate_sde(&cfg2).unwrap();
    let var = displacement_variance(&out, 1.0).unwrap();
    assert!(var.within(1.0, 3.0, 0.0), "{var:?}");
}

#[test]
fn deterministic_pair_follows_the_gradient_flow() {
    let v = desk_potential();
    let dt = 1e-4;
    let mut cfg = sde(InitRule::Fixed { points: vec![vec![4.8], vec![5.1]] }, v.clone(), dt, 0.5, 1, vec![0.0, 0.1, 0.5], 0);
    cfg.noise = false;
    let out = simulate_sde(&cfg).unwrap();
    // Separation obeys d' = -beta V'(d); reference by RK4 with a fine step.
    let f = |d: f64| -v.derivative(d).unwrap();
    let mut d = 0.3;
    let mut t = 0.0;
    let h = 1e-5;
    for target in [0.1, 0.5] {
        while t < target - 0.5 * h {
            let k1 = f(d);
            let k2 = f(d + 0.5 * h * k1);
            let k3 = f(d + 0.5 * h * k2);
            let k4 = f(d + h * k3);
            d += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += h;
        }
        let s = &out.snapshots_at(target).unwrap()[0];
        let p: Vec<f64> = s.points().map(|p| p[0]).collect();
        assert!(((p[1] - p[0]) - d).abs() < 1e-3, "t = {target}: {} vs {d}", p[1] - p[0]);
        assert!(((p[0] + p[1]) / 2.0 - 4.95).abs() < 1e-12);
    }
    assert!(d > 0.6);
}

#[test]
fn cosine_profile_relaxes_like_the_heat_equation() {
    let (z, a, side) = (2.0, 0.6, 10.0);
    let cfg = sde(InitRule::Cosine { z, amplitude: a, mode: 1 }, RadialPotential::zero(1.0), 0.01, 2.0, 400, vec![0.0, 2.0], 22);
    let out = simulate_sde(&cfg).unwrap();
    for t in [0.0, 2.0] {
        let decay = (-0.5 * (TAU / side).powi(2) * t).exp();
        for bin in density_profile(&out, t, 10).unwrap() {
            // Bin average of z (1 + a e^{-k^2 t / 2} cos(k x)).
            let k = TAU / side;
            let avg = z * (1.0 + a * decay * ((k * bin.hi).sin() - (k * bin.lo).sin()) / (k * (bin.hi - bin.lo)));
            assert!(bin.k1.within(avg, 3.0, 0.0), "t = {t} {bin:?} vs {avg}");
        }
    }
}

#[test]
fn sde_validation_and_replica_floor() {
    let few = sde(InitRule::Poisson { z: 0.5 }, desk_potential(), 0.01, 0.1, 50, vec![0.1], 1);
    let out = simulate_sde(&few).unwrap();
    let err = empirical_correlations(&out, 0.1, Bins { r_max: 1.0, n_bins: 4 }).unwrap_err();
    assert!(matches!(err, Error::InsufficientSamples { needed: MIN_REPLICAS, got: 50 }));
    let gauss = RadialPotential::new(RadialForm::Gauss { amplitude: 1.0, width: 0.5 }, 1.0).unwrap();
    assert!(simulate_sde(&sde(InitRule::Poisson { z: 0.5 }, gauss, 0.01, 0.1, 100, vec![], 1)).is_err());
    assert!(simulate_sde(&sde(InitRule::Poisson { z: 0.5 }, RadialPotential::hardcore(0.5).unwrap(), 0.01, 0.1, 100, vec![], 1)).is_err());
    assert!(simulate_sde(&sde(InitRule::Poisson { z: 0.5 }, desk_potential(), 0.01, 0.1, 100, vec![0.015], 1)).is_err());
    // Same seed, same trajectories.
    let again = simulate_sde(&few).unwrap();
    assert_eq!(out.replicas[7].snapshots, again.replicas[7].snapshots);
}

// ---------------------------------------------------------------- generator

#[test]
fn generator_on_level_one_is_minus_half_laplacian() {
    let grid = Grid1d::interval(-2.0, 2.0, 81).unwrap();
    let g1 = grid.sample(|x| x * x);
    let q = QuasiObservableGrid::new(grid, 3.0, g1, PairTable::zeros(81), 0.0).unwrap();
    let free = apply_h_hat(&q, &pair(RadialPotential::zero(1.0))).unwrap();
    assert_eq!(free.g0, 0.0);
    for i in 1..80 {
        assert!((free.g1[i] + 1.0).abs() < 1e-10, "{i}");
    }
    assert_eq!(free.g2.max_abs(), 0.0);
}

#[test]
fn level_one_input_produces_the_interaction_cross_term() {
    let grid = Grid1d::periodic(10.0, 100).unwrap();
    let v = desk_potential();
    let beta = 0.7;
    let phi = PairPotential::radial(v.clone(), beta).unwrap();
    let g1 = grid.sample(|x| (TAU * x / 10.0).sin());
    let q = QuasiObservableGrid::new(grid, 0.0, g1.clone(), PairTable::zeros(100), 0.0).unwrap();
    let out = apply_h_hat(&q, &phi).unwrap();
    let dg = |i: usize| (g1[(i + 1) % 100] - g1[(i + 99) % 100]) / (2.0 * grid.spacing);
    let grad_v = |d: f64| if d.abs() < v.cutoff && d != 0.0 { v.derivative(d.abs()).unwrap() * d.signum() } else { 0.0 };
    for i in 0..100 {
        for j in 0..100 {
            if i == j {
                continue;
            }
            let d = grid.separation(i, j);
            let expect = 0.5 * beta * (grad_v(d) * dg(i) + grad_v(-d) * dg(j));
            assert!((out.g2.get(i, j) - expect).abs() < 1e-12, "{i} {j}");
        }
    }
}

fn random_quasi(grid: Grid1d, seed: u64) -> QuasiObservableGrid {
    use rand::Rng;
    let mut r = bogo_core::rng::stream(seed, 0);
    let n = grid.len;
    let g1: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
    let mut g2 = PairTable::zeros(n);
    for i in 0..n {
        for j in 0..i {
            let v = r.random_range(-1.0..1.0);
            g2.set(i, j, v);
            g2.set(j, i, v);
        }
    }
    QuasiObservableGrid::new(grid, r.random_range(-1.0..1.0), g1, g2, 0.0).unwrap()
}

#[test]
fn generator_is_triangular() {
    let grid = Grid1d::periodic(10.0, 40).unwrap();
    let phi = pair(desk_potential());
    let a = random_quasi(grid, 1);
    let mut b = random_quasi(grid, 2);
    b.g1 = a.g1.clone();
    b.g0 = a.g0;
    // Output level 1 ignores input level 2.
    let (ha, hb) = (apply_h_hat(&a, &phi).unwrap(), apply_h_hat(&b, &phi).unwrap());
    assert_eq!(ha.g1, hb.g1);
    assert_eq!(ha.g0, 0.0);
    // Input supported on level 2 stays on level 2.
    let top = QuasiObservableGrid { g0: 0.0, g1: vec![0.0; 40], ..a.clone() };
    let ht = apply_h_hat(&top, &phi).unwrap();
    assert_eq!(ht.level_norms()[..2], [0.0, 0.0]);
    assert!(ht.level_norms()[2] > 0.0);
}

#[test]
fn generator_rejects_invalid_level_two() {
    let grid = Grid1d::periodic(10.0, 20).unwrap();
    let mut g2 = PairTable::zeros(20);
    g2.set(3, 5, 1.0);
    assert!(QuasiObservableGrid::new(grid, 0.0, vec![0.0; 20], g2.clone(), 0.0).is_err());
    g2.set(5, 3, 1.0);
    assert!(QuasiObservableGrid::new(grid, 0.0, vec![0.0; 20], g2.clone(), 0.0).is_ok());
    assert!(QuasiObservableGrid::new(grid, 0.0, vec![0.0; 20], g2, 1.5).is_err());
}

// ---------------------------------------------------------------- hierarchy

fn profile_k1(p: &Profile) -> Vec<f64> {
    match p {
        Profile::Full { k1, .. } => k1.clone(),
        Profile::TranslationInvariant { k1, .. } => vec![*k1],
    }
}

#[test]
fn free_hierarchy_level_one_is_half_laplacian() {
    let side = 10.0;
    let grid = Grid1d::periodic(side, 200).unwrap();
    let (z, a) = (0.5, 0.3);
    let k1 = grid.sample(|x| z * (1.0 + a * (TAU * x / side).cos()));
    let state = HierarchyState::independent(grid, k1, Some(Closure::Product)).unwrap();
    let rhs = hierarchy_rhs(&state, &pair(RadialPotential::zero(1.0))).unwrap();
    let k = TAU / side;
    for (i, v) in profile_k1(&rhs).iter().enumerate() {
        let exact = -0.5 * k * k * z * a * (k * grid.x(i)).cos();
        assert!((v - exact).abs() < 1e-4, "{i}");
    }
}

#[test]
fn uniform_density_is_stationary_at_level_one() {
    let grid = Grid1d::periodic(10.0, 50).unwrap();
    let phi = pair(desk_potential());
    let full = HierarchyState::poisson(grid, 0.3, false, Some(Closure::Product)).unwrap();
    let rhs = hierarchy_rhs(&full, &phi).unwrap();
    assert!(profile_k1(&rhs).iter().all(|v| v.abs() < 1e-12));
    let ti = HierarchyState::poisson(grid, 0.3, true, Some(Closure::Product)).unwrap();
    let rhs_ti = hierarchy_rhs(&ti, &phi).unwrap();
    assert_eq!(profile_k1(&rhs_ti), vec![0.0]);
    // Level 2 responds to the interaction: pairs are pushed apart.
    let Profile::TranslationInvariant { k2, .. } = rhs_ti else { unreachable!() };
    assert!(k2[0] < 0.0);
    // Both modes agree.
    let Profile::Full { k2: k2_full, .. } = rhs else { unreachable!() };
    for o in 0..50 {
        assert!((k2_full.get(o, 0) - k2[o]).abs() < 1e-12);
    }
}

fn heat_exact(x: f64, t: f64) -> f64 {
    let (z0, a, w, c) = (0.2, 0.3, 1.0, 10.0);
    let s = w * w + t;
    z0 + a * w / s.sqrt() * (-(x - c).powi(2) / (2.0 * s)).exp()
}

fn heat_error(m: usize, safety: f64) -> (f64, Timeline) {
    let grid = Grid1d::periodic(20.0, m).unwrap();
    let k1 = grid.sample(|x| heat_exact(x, 0.0));
    let state = HierarchyState::independent(grid, k1, Some(Closure::Product)).unwrap();
    let h = grid.spacing;
    let tl = hierarchy_solve(
        &state,
        &pair(RadialPotential::zero(1.0)),
        0.5,
        h * h / (4.0 * safety),
        SolveSettings { safety, record_stride: 1000 },
    )
    .unwrap();
    let last = tl.states.last().unwrap();
    let err = (0..m).map(|i| (last.k1(i) - heat_exact(grid.x(i), 0.5)).abs()).fold(0.0, f64::max);
    (err, tl)
}

#[test]
fn free_hierarchy_converges_at_second_order() {
    let errs: Vec<f64> = [40, 80, 160].iter().map(|&m| heat_error(m, 1.0).0).collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((1.9..=2.1).contains(&order), "{errs:?}");
    }
    assert!(errs[2] < 2e-4);
    // Without interaction, independent data stay independent up to the
    // O(dt^4) splitting error of RK4 on a Kronecker sum.
    let product_gap = |safety: f64| {
        let (_, tl) = heat_error(40, safety);
        let last = tl.states.last().unwrap();
        let mut worst = 0.0f64;
        for i in 0..40 {
            for j in 0..40 {
                worst = worst.max((last.k2(i, j) - last.k1(i) * last.k1(j)).abs());
            }
        }
        worst
    };
    let (g1, g2) = (product_gap(1.0), product_gap(2.0));
    assert!(g1 < 1e-6 && g1 / g2 > 12.0, "{g1} {g2}");
}

#[test]
fn hierarchy_keeps_normalization_and_symmetry() {
    let grid = Grid1d::periodic(10.0, 40).unwrap();
    let k1 = grid.sample(|x| 0.3 * (1.0 + 0.5 * (TAU * x / 10.0).sin()));
    let state = HierarchyState::independent(grid, k1, Some(Closure::Product)).unwrap();
    let h = grid.spacing;
    let tl = hierarchy_solve(&state, &pair(desk_potential()), 0.2, h * h / 4.0, SolveSettings::default()).unwrap();
    assert_eq!(tl.normalization_violations(), 0);
    assert_eq!(tl.max_asymmetry(), 0.0);
    assert_eq!(tl.states.len(), tl.ruelle.len());
    // Mass is conserved by the divergence form.
    let mass = |s: &HierarchyState| (0..40).map(|i| s.k1(i)).sum::<f64>();
    let m0 = mass(&tl.states[0]);
    assert!(tl.states.iter().all(|s| (mass(s) - m0).abs() < 1e-11 * m0));
}

#[test]
fn hierarchy_needs_a_closure_and_a_stable_step() {
    let grid = Grid1d::periodic(10.0, 40).unwrap();
    let phi = pair(desk_potential());
    let open = HierarchyState::poisson(grid, 0.3, true, None).unwrap();
    assert!(hierarchy_rhs(&open, &phi).is_err());
    assert!(hierarchy_solve(&open, &phi, 0.1, 1e-4, SolveSettings::default()).is_err());
    let closed = HierarchyState::poisson(grid, 0.3, true, Some(Closure::Zero)).unwrap();
    assert!(hierarchy_solve(&closed, &phi, 0.1, 0.1, SolveSettings::default()).is_err());
}

// ---------------------------------------------------------------- functional identities

const SIDE: f64 = 10.0;

fn ti_timeline(z: f64, m: usize, closure: Closure, t_end: f64) -> Timeline {
    let grid = Grid1d::periodic(SIDE, m).unwrap();
    let state = HierarchyState::poisson(grid, z, true, Some(closure)).unwrap();
    let h = grid.spacing;
    hierarchy_solve(&state, &pair(desk_potential()), t_end, h * h / 4.0, SolveSettings::default()).unwrap()
}

fn bump(amplitude: f64) -> Bump {
    Bump { center: 5.0, width: 4.0, amplitude, period: Some(SIDE) }
}

#[test]
fn zero_field_and_chain_rule() {
    let tl = ti_timeline(0.2, 100, Closure::Product, 0.1);
    let r = functional_evolution_residual(&tl, &pair(desk_potential()), &ZeroField, 0.05).unwrap();
    assert_eq!((r.lhs, r.rhs, r.relative), (0.0, 0.0, 0.0));
    let state = tl.at(0.05).unwrap();
    assert!(chain_rule_check(state, &bump(0.3)) < 1e-10);
    assert!(functional_evolution_residual(&tl, &pair(desk_potential()), &bump(0.5), 0.1).is_err());
}

#[test]
fn functional_evolution_residuals_shrink_with_activity() {
    let phi = pair(desk_potential());
    let theta = bump(0.5);
    let mut last = [f64::INFINITY; 2];
    for z in [0.2, 0.1, 0.05] {
        let tl = ti_timeline(z, 200, Closure::Product, 0.6);
        for (k, t) in [0.1, 0.5].into_iter().enumerate() {
            let r = functional_evolution_residual(&tl, &phi, &theta, t).unwrap();
            assert!(r.relative <= 0.05, "z = {z} t = {t}: {r:?}");
            assert!(r.relative < last[k], "z = {z} t = {t}: {} vs {}", r.relative, last[k]);
            last[k] = r.relative;
        }
    }
    // With the zero closure the truncated functional satisfies the identity
    // up to discretization.
    let tl = ti_timeline(0.2, 200, Closure::Zero, 0.6);
    for t in [0.1, 0.5] {
        let r = functional_evolution_residual(&tl, &phi, &theta, t).unwrap();
        assert!(r.relative < 1e-3, "{r:?}");
    }
}

#[test]
fn hopf_form_equals_functional_form_under_substitution() {
    let phi = pair(desk_potential());
    let tl = ti_timeline(0.2, 200, Closure::Product, 0.2);
    let field = bump(0.3);
    for t in [0.05, 0.1] {
        let hopf = hopf_residual(&tl, &phi, &field, t).unwrap();
        let func = functional_evolution_residual(&tl, &phi, &ExpMinusOne(field), t).unwrap();
        assert!((hopf.lhs - func.lhs).abs() <= 1e-8 * func.lhs.abs());
        assert!((hopf.rhs - func.rhs).abs() <= 1e-8 * func.rhs.abs());
        assert!((hopf.relative - func.relative).abs() <= 1e-8);
    }
}

// ---------------------------------------------------------------- SDE against the hierarchy

#[test]
fn hierarchy_matches_interacting_particles_at_low_activity() {
    let z = 0.3;
    let v = desk_potential();
    let cfg = sde(InitRule::Poisson { z }, v, 1e-3, 0.5, 500, vec![0.0, 0.1, 0.5], 23);
    let out = simulate_sde(&cfg).unwrap();
    let fine = ti_timeline(z, 200, Closure::Product, 0.5);
    let coarse = ti_timeline(z, 100, Closure::Product, 0.5);
    let zero = ti_timeline(z, 200, Closure::Zero, 0.5);
    let bins = Bins { r_max: 2.0, n_bins: 5 };
    for t in [0.1, 0.5] {
        let est = empirical_correlations(&out, t, bins).unwrap();
        let (sf, sc, sz) = (fine.at(t).unwrap(), coarse.at(t).unwrap(), zero.at(t).unwrap());
        assert!(est.k1.within(sf.k1(0), 3.0, 0.0), "t = {t}: {:?}", est.k1);
        for bin in &est.g {
            let g = |s: &HierarchyState| s.k2_shell_average(bin.lo, bin.hi) / (z * z);
            let allowance = (g(sf) - g(sc)).abs() / 3.0 + (g(sf) - g(sz)).abs();
            assert!((bin.g - g(sf)).abs() <= 3.0 * bin.se + allowance, "t = {t} {bin:?} vs {} (+{allowance})", g(sf));
        }
    }
    // The pair correlation has developed a visible hole at short range.
    assert!(fine.at(0.5).unwrap().k2_shell_average(0.0, 0.4) < 0.95 * z * z);
}
