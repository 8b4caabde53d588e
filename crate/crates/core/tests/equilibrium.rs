//! Energies, exact Gibbs measures, GNZ and the Bogoliubov equation.

mod common;

use std::sync::Arc;

use bogo_core::calculus::*;
use bogo_core::equilibrium::*;
use bogo_core::Complex64;
use common::*;
use rand::Rng;

fn chain_potential(n: usize, v: f64, beta: f64, sigma: f64) -> DiscretePotential {
    let m = (0..n).map(|i| (0..n).map(|j: usize| Energy::Finite(if i.abs_diff(j) == 1 { v } else { 0.0 })).collect()).collect();
    let sp = Arc::new(SiteSpace::lattice_1d(n, 1.0, sigma).unwrap());
    DiscretePotential::new(&PairPotential::matrix(m, beta).unwrap(), sp, None).unwrap()
}

#[test]
fn energy_and_interaction_conventions() {
    let mut r = rng_for(20, 0);
    let sp = random_space(&mut r, 8);
    let phi = random_potential(&mut r, &sp, -0.5, 1.5, 0.0);
    assert_eq!(phi.energy(Configuration::EMPTY), Energy::ZERO);
    assert_eq!(phi.energy(Configuration::single(3)), Energy::ZERO);
    assert_eq!(phi.energy(Configuration::from_sites([2, 5])), phi.phi(2, 5));
    assert_eq!(phi.interaction(Configuration::EMPTY, Configuration(0xF0)), Energy::ZERO);
    assert_eq!(phi.interaction(Configuration(0x0F), Configuration::EMPTY), Energy::ZERO);
    // Overlap meets the diagonal convention.
    assert!(phi.interaction(Configuration::single(1), Configuration::from_sites([1, 4])).is_infinite());
    assert_eq!(phi.boltzmann_interaction(Configuration::single(1), Configuration::from_sites([1, 4])), 0.0);

    for _ in 0..50 {
        let eta = Configuration(r.random_range(0..256u64));
        let gamma = Configuration(r.random_range(0..256u64) & !eta.bits());
        let sites: Vec<usize> = eta.sites().collect();
        let mut e = 0.0;
        for i in 0..sites.len() {
            for j in 0..i {
                e += phi.phi(sites[i], sites[j]).finite().unwrap();
            }
        }
        assert!((phi.energy(eta).finite().unwrap() - e).abs() < 1e-12);
        let w: f64 = eta.sites().flat_map(|x| gamma.sites().map(move |y| (x, y))).map(|(x, y)| phi.phi(x, y).finite().unwrap()).sum();
        assert!((phi.interaction(eta, gamma).finite().unwrap() - w).abs() < 1e-12);
        // Mayer-factor product and exp(-beta E) factorization.
        let b = phi.beta();
        let prod: f64 = gamma.sites().map(|y| 1.0 + (phi.boltzmann(eta.sites().next().unwrap_or(0), y) - 1.0)).product();
        if eta.len() == 1 {
            assert!((phi.boltzmann_interaction(eta, gamma) - prod).abs() < 1e-12 * prod.max(1.0));
        }
        let lhs = phi.energy(eta.union(gamma)).boltzmann(b);
        let rhs = phi.energy(eta).boltzmann(b) * phi.energy(gamma).boltzmann(b) * phi.interaction(eta, gamma).boltzmann(b);
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(rhs));
    }
}

#[test]
fn hard_core_interactions_are_infinite_with_zero_mayer_factor() {
    let sp = Arc::new(SiteSpace::with_sigma(vec![1.0; 3]).unwrap());
    let m = vec![
        vec![Energy::ZERO, Energy::Infinite, Energy::Finite(1.0)],
        vec![Energy::Infinite, Energy::ZERO, Energy::ZERO],
        vec![Energy::Finite(1.0), Energy::ZERO, Energy::ZERO],
    ];
    let phi = DiscretePotential::new(&PairPotential::matrix(m, 1.0).unwrap(), sp, None).unwrap();
    let w = phi.interaction(Configuration::single(0), Configuration::from_sites([1, 2]));
    assert!(w.is_infinite());
    assert_eq!(w.boltzmann(0.3), 0.0);
    let mu = phi.gibbs_measure().unwrap();
    assert_eq!(mu.get(Configuration::from_sites([0, 1])).unwrap(), c(0.0));
    assert!(phi.energy_report(Configuration::from_sites([0, 1]), Configuration::EMPTY).energy.is_none());
}

#[test]
fn gibbs_measure_of_a_repulsive_chain_matches_a_transfer_matrix() {
    let (n, v, beta, sigma) = (8, 1.3, 0.9, 0.7);
    let phi = chain_potential(n, v, beta, sigma);
    let mu = phi.gibbs_measure().unwrap();
    // Open chain: T[s][s'] = sigma^{s'} exp(-beta v s s').
    let b = (-beta * v).exp();
    let mut left = [1.0, sigma];
    for _ in 1..n {
        left = [left[0] + left[1], sigma * (left[0] + b * left[1])];
    }
    let z = left[0] + left[1];
    for gamma in all_configurations(n) {
        let pairs = gamma.sites().filter(|&x| x + 1 < n && gamma.contains(x + 1)).count();
        let w = sigma.powi(gamma.len() as i32) * b.powi(pairs as i32);
        assert!((mu.get(gamma).unwrap().re - w / z).abs() < 1e-15, "{gamma:?}");
    }
}

#[test]
fn zero_potential_gives_the_free_measure() {
    let sp = Arc::new(SiteSpace::with_sigma(vec![0.3, 1.0, 2.5, 0.8]).unwrap());
    let zero = PairPotential::radial(RadialPotential::zero(1.0), 1.7).unwrap();
    let phi = DiscretePotential::new(&zero, sp.clone(), None).unwrap();
    let mu = phi.gibbs_measure().unwrap();
    let norm: f64 = sp.sigma().iter().map(|s| 1.0 + s).product();
    for gamma in all_configurations(4) {
        assert!((mu.get(gamma).unwrap().re - lambda(&sp, gamma) / norm).abs() < 1e-15);
    }
    // beta = 0 erases any bounded potential.
    let mut r = rng_for(21, 0);
    let m = random_matrix(&mut r, 4, 0.0, 3.0, 0.0);
    let phi0 = DiscretePotential::new(&PairPotential::matrix(m, 0.0).unwrap(), sp.clone(), None).unwrap();
    assert!(phi0.gibbs_measure().unwrap().max_abs_diff(&mu).unwrap() < 1e-15);
}

#[test]
fn mayer_norm_limits() {
    let sp = Arc::new(SiteSpace::with_sigma(vec![0.3, 1.0, 0.5]).unwrap());
    let zero = DiscretePotential::new(&PairPotential::radial(RadialPotential::zero(1.0), 1.0).unwrap(), sp.clone(), None).unwrap();
    assert_eq!(zero.mayer_norm(), 1.0);
    let mut r = rng_for(22, 0);
    let m = random_matrix(&mut r, 3, 0.0, 2.0, 0.0);
    let mut last = f64::INFINITY;
    for beta in [1.0, 1e-2, 1e-4, 1e-6] {
        let phi = DiscretePotential::new(&PairPotential::matrix(m.clone(), beta).unwrap(), sp.clone(), None).unwrap();
        let gap = phi.mayer_norm() - 1.0;
        assert!(gap >= 0.0 && gap < last);
        last = gap;
    }
    assert!(last < 1e-5);
}

#[test]
fn continuum_mayer_norm_of_a_hard_core_is_the_ball_volume() {
    use std::f64::consts::PI;
    let (radius, z) = (0.8, 0.4);
    let hc = RadialPotential::hardcore(radius).unwrap();
    let vols = [2.0 * radius, PI * radius * radius, 4.0 / 3.0 * PI * radius.powi(3)];
    for (d, vol) in vols.iter().enumerate() {
        let c_beta = continuum_mayer_norm(&hc, 1.0, z, d + 1).unwrap();
        assert!((c_beta - z * vol).abs() < 1e-12, "dim {}: {c_beta}", d + 1);
    }
}

#[test]
fn beta_search_hits_the_requested_mayer_norm() {
    let sp = Arc::new(SiteSpace::lattice_1d(6, 1.0, 0.05).unwrap());
    let pot = PairPotential::radial(RadialPotential::poly(1.0, 2.5).unwrap(), 1.0).unwrap();
    let beta = beta_for_mayer_norm(&pot, sp.clone(), None, 0.2).unwrap();
    let phi = DiscretePotential::new(&PairPotential { beta, ..pot.clone() }, sp.clone(), None).unwrap();
    assert!((phi.mayer_norm() - 0.2).abs() < 1e-12);
    assert!(beta_for_mayer_norm(&pot, sp, None, 0.01).is_err());
}

#[test]
fn gnz_holds_exactly_for_gibbs_measures_and_detects_perturbations() {
    for inst in 0..20 {
        let mut r = rng_for(23, inst);
        let n = r.random_range(2..=9);
        let sp = random_space(&mut r, n);
        let phi = random_potential(&mut r, &sp, -0.4, 2.0, 0.1);
        let mu = phi.gibbs_measure().unwrap();
        let table: Vec<f64> = (0..n << n).map(|_| r.random_range(-1.0..1.0)).collect();
        let h = |x: usize, g: Configuration| table[(x << n) | g.bits() as usize];
        let res = phi.gnz_residual(&mu, h).unwrap();
        assert!(res.relative() < 1e-12, "{res:?}");

        let mut vals = mu.values().to_vec();
        let target = 1 + (inst as usize % ((1 << n) - 1));
        vals[target] *= 1.01;
        let total: Complex64 = vals.iter().sum();
        let bent = mu.with_values(vals.iter().map(|v| v / total).collect()).unwrap();
        let res = phi.gnz_residual(&bent, |x, g| if g.is_empty() && x == 0 { 1.0 } else { h(x, g) }).unwrap();
        if mu.values()[target].re > 0.0 {
            assert!(res.abs > 1e-8, "perturbation at {target} missed: {res:?}");
        }
    }
}

#[test]
fn mecke_identity_for_the_free_measure() {
    let sp = Arc::new(SiteSpace::with_sigma(vec![0.4, 1.2, 0.9, 2.0, 0.1]).unwrap());
    let phi = DiscretePotential::new(&PairPotential::radial(RadialPotential::zero(1.0), 1.0).unwrap(), sp, None).unwrap();
    let mu = phi.gibbs_measure().unwrap();
    let res = phi.gnz_residual(&mu, |x, g| (x as f64 + 1.0) * (g.len() as f64).cos()).unwrap();
    assert!(res.relative() < 1e-13);
}

#[test]
fn bogoliubov_forms_vanish_on_exact_gibbs_functionals() {
    for inst in 0..8 {
        let mut r = rng_for(24, inst);
        let n = r.random_range(2..=8);
        let sp = random_space(&mut r, n);
        let phi = random_potential(&mut r, &sp, -0.3, 2.0, 0.1);
        let mu = phi.gibbs_measure().unwrap();
        let k = correlation_from_measure(&mu).unwrap();
        let theta = random_field(&mut r, n);
        let f = random_field(&mut r, n);
        for source in [&mu, &k] {
            assert!(bogoliubov_equation_residual(source, &phi, &theta, &BogoliubovForm::I).unwrap() < 1e-10);
            assert!(bogoliubov_equation_residual(source, &phi, &theta, &BogoliubovForm::Ii { f: f.clone() }).unwrap() < 1e-10);
            assert!(bogoliubov_equation_residual(source, &phi, &theta, &BogoliubovForm::Iii { f: f.clone() }).unwrap() < 1e-10);
        }
    }
}

#[test]
fn free_functional_shift_takes_minus_one_at_the_site() {
    let sp = Arc::new(SiteSpace::with_sigma(vec![0.5, 1.5, 0.7]).unwrap());
    let phi = DiscretePotential::new(&PairPotential::radial(RadialPotential::zero(1.0), 1.0).unwrap(), sp.clone(), None).unwrap();
    let theta = Field::from_real(&[0.2, -0.4, 1.1]);
    let s = shifted_field(&phi, Configuration::single(1), &theta);
    assert_eq!(s.0, vec![c(0.2), c(-1.0), c(1.1)]);
    let mu = phi.gibbs_measure().unwrap();
    assert!(bogoliubov_equation_residual(&mu, &phi, &theta, &BogoliubovForm::I).unwrap() < 1e-14);
}

#[test]
fn forms_agree_in_failing_on_a_non_gibbs_functional() {
    let mut r = rng_for(25, 0);
    let sp = random_space(&mut r, 6);
    let phi = random_potential(&mut r, &sp, 0.0, 2.0, 0.0);
    let mu = random_measure(&mut r, &sp);
    let theta = random_field(&mut r, 6);
    let f = random_field(&mut r, 6);
    assert!(bogoliubov_equation_residual(&mu, &phi, &theta, &BogoliubovForm::I).unwrap() > 1e-6);
    assert!(bogoliubov_equation_residual(&mu, &phi, &theta, &BogoliubovForm::Ii { f }).unwrap() > 1e-6);
}

#[test]
fn discrete_equation_converges_to_the_poisson_continuum_form() {
    // V = 0 with sigma = z h: delta L / delta theta(x) -> L(theta) at first order in h.
    let z = 0.8;
    let theta_fn = |x: f64| 0.5 * (std::f64::consts::PI * x).sin();
    let gap = |h: f64| {
        let n = (1.0 / h).round() as usize;
        let sp = Arc::new(SiteSpace::lattice_1d(n, h, z * h).unwrap());
        let phi = DiscretePotential::new(&PairPotential::radial(RadialPotential::zero(0.5), 1.0).unwrap(), sp.clone(), None).unwrap();
        let mu = phi.gibbs_measure().unwrap();
        let theta = Field::from_real(&(0..n).map(|i| theta_fn((i as f64 + 0.5) * h)).collect::<Vec<_>>());
        let l = bogoliubov_eval(&mu, &theta).unwrap();
        let d = variational_derivatives(&mu, &theta).unwrap();
        (0..n).map(|x| (d.get(Configuration::single(x)).unwrap() - l).norm() / l.norm()).fold(0.0, f64::max)
    };
    let (coarse, fine) = (gap(0.1), gap(0.05));
    let ratio = coarse / fine;
    assert!((1.8..2.2).contains(&ratio), "{coarse} {fine} {ratio}");
}

#[test]
fn radial_derivatives_match_finite_differences() {
    let forms = [
        RadialPotential::poly(1.3, 1.2).unwrap(),
        RadialPotential::poly_power(2.0, 4, 1.0).unwrap(),
        RadialPotential::poly_power(-0.7, 6, 2.0).unwrap(),
        RadialPotential::new(RadialForm::Gauss { amplitude: 1.5, width: 0.4 }, 1.5).unwrap(),
        RadialPotential::new(RadialForm::LjCut { epsilon: 1.0, sigma: 0.5 }, 1.25).unwrap(),
    ];
    for v in &forms {
        let e = 1e-5;
        for q in 1..40 {
            let r = v.cutoff * q as f64 / 40.0;
            if r < 0.45 && matches!(v.form, RadialForm::LjCut { .. }) {
                continue;
            }
            let f = |x: f64| v.value(x).finite().unwrap();
            let d1 = (f(r + e) - f(r - e)) / (2.0 * e);
            let d2 = (f(r + e) - 2.0 * f(r) + f(r - e)) / (e * e);
            let a1 = v.derivative(r).unwrap();
            let a2 = v.second_derivative(r).unwrap();
            assert!((a1 - d1).abs() < 1e-6 * a1.abs().max(1.0), "{v:?} r={r}: {a1} vs {d1}");
            assert!((a2 - d2).abs() < 1e-3 * a2.abs().max(1.0), "{v:?} r={r}: {a2} vs {d2}");
        }
    }
}

#[test]
fn poly_potentials_are_smooth_at_the_cutoff_and_others_are_not() {
    for p in [3, 4, 5] {
        let v = RadialPotential::poly_power(2.0, p, 1.0).unwrap();
        assert!(v.is_continuous_at_cutoff());
        assert_eq!(v.derivative(1.0), Some(0.0));
        assert_eq!(v.value(1.0), Energy::ZERO);
        let dr = v.derivative_over_r(0.0).unwrap();
        assert!((dr + 2.0 * p as f64 * 2.0).abs() < 1e-15);
    }
    assert!(RadialPotential::poly_power(1.0, 2, 1.0).is_err());
    let g = RadialPotential::new(RadialForm::Gauss { amplitude: 1.0, width: 0.5 }, 1.0).unwrap();
    assert!(!g.is_continuous_at_cutoff());
    assert!(!RadialPotential::hardcore(0.5).unwrap().is_smooth());
}

#[test]
fn potential_json_forms() {
    let p = PairPotential::from_json(r#"{"kind":"radial","V":{"form":"hardcore","radius":0.5},"beta":2.0,"cutoff":0.5}"#).unwrap();
    assert!(p.radial_part().unwrap().value(0.2).is_infinite());
    let p = PairPotential::from_json(r#"{"kind":"radial","V":{"form":"poly","amplitude":2.0},"beta":1.0,"cutoff":1.0}"#).unwrap();
    assert_eq!(p.radial_part().unwrap().form, RadialForm::Poly { amplitude: 2.0, power: 3 });
    let back = PairPotential::from_json(&p.to_json()).unwrap();
    assert_eq!(back, p);
    let m = PairPotential::from_json(r#"{"kind":"matrix","matrix":[[0,"inf"],["inf",0]],"beta":1.0}"#).unwrap();
    assert!(m.is_positive());
    assert!(PairPotential::from_json(r#"{"kind":"matrix","matrix":[[0,1],[2,0]],"beta":1.0}"#).is_err());
    assert!(PairPotential::from_json(r#"{"kind":"radial","V":{"form":"poly","amplitude":1.0},"beta":-1.0,"cutoff":1.0}"#).is_err());
    let lj =
        PairPotential::from_json(r#"{"kind":"radial","V":{"form":"lj-cut","epsilon":1.0,"sigma":1.0},"beta":1.0,"cutoff":2.5}"#).unwrap();
    assert!((lj.semibound() - 0.5 * (1.0 + 4.0 * (2.5f64.powi(-12) - 2.5f64.powi(-6)))).abs() < 1e-12);
}
