//! Property tests over randomly generated spaces, tables, measures,
//! potentials and grids. Each case draws a seed and rebuilds its inputs from
//! the crate's own stream generator, so failures shrink to a seed.

mod common;

use bogo_core::calculus::*;
use bogo_core::dynamics::{apply_h_hat, Grid1d, PairTable, QuasiObservableGrid};
use bogo_core::equilibrium::{Energy, PairPotential, RadialPotential};
use bogo_core::solver::{apply_j, ent_norm_upper_bound, FunctionalRep};
use common::*;
use proptest::prelude::*;
use rand::Rng;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 48, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn mobius_inverts_the_k_transform(seed in any::<u64>(), n in 1usize..=10) {
        let mut r = rng_for(seed, 0);
        let sp = random_space(&mut r, n);
        let g = random_table(&mut r, &sp, Role::QuasiObservable);
        let back = k_inverse(&k_transform_table(&g));
        prop_assert!(back.max_abs_diff(&g).unwrap() <= 1e-12 * (1usize << n) as f64);
        let f = random_table(&mut r, &sp, Role::Observable);
        prop_assert!(k_transform_table(&k_inverse(&f)).max_abs_diff(&f).unwrap() <= 1e-12 * (1usize << n) as f64);
    }

    #[test]
    fn k_star_duality(seed in any::<u64>(), n in 1usize..=9) {
        let mut r = rng_for(seed, 1);
        let sp = random_space(&mut r, n);
        let mu = random_measure(&mut r, &sp);
        let g = random_table(&mut r, &sp, Role::QuasiObservable);
        let kg = k_transform_table(&g);
        let k = correlation_from_measure(&mu).unwrap();
        let lhs: Complex = kg.values().iter().zip(mu.values()).map(|(a, b)| a * b).sum();
        let lam = k.lambda_table();
        let rhs: Complex = g.values().iter().zip(k.values()).zip(&lam).map(|((a, b), l)| a * b * l).sum();
        let scale: f64 = g.values().iter().zip(k.values()).zip(&lam).map(|((a, b), l)| (a * b).norm() * l).sum();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn correlations_are_normalized_and_invertible(seed in any::<u64>(), n in 1usize..=9) {
        let mut r = rng_for(seed, 2);
        let sp = random_space(&mut r, n);
        let mu = random_measure(&mut r, &sp);
        let k = correlation_from_measure(&mu).unwrap();
        prop_assert!((k.values()[0] - c(1.0)).norm() < 1e-13);
        prop_assert!(k.values().iter().all(|v| v.re >= 0.0 && v.im == 0.0));
        let back = measure_from_correlation(&k).unwrap();
        prop_assert!(back.max_abs_diff(&mu).unwrap() < 1e-12);
        // The Bogoliubov functional at theta = 0 is the total mass.
        prop_assert!((bogoliubov_eval(&mu, &Field::zeros(n)).unwrap() - c(1.0)).norm() < 1e-13);
        prop_assert!((bogoliubov_eval(&k, &Field::zeros(n)).unwrap() - c(1.0)).norm() < 1e-13);
    }

    #[test]
    fn functional_is_the_same_from_measure_or_correlation(seed in any::<u64>(), n in 1usize..=8) {
        let mut r = rng_for(seed, 3);
        let sp = random_space(&mut r, n);
        let mu = random_measure(&mut r, &sp);
        let k = correlation_from_measure(&mu).unwrap();
        let theta = random_field(&mut r, n);
        let a = bogoliubov_eval(&mu, &theta).unwrap();
        let b = bogoliubov_eval(&k, &theta).unwrap();
        prop_assert!(rel_err(a, b) < 1e-11, "{a} {b}");
    }

    #[test]
    fn star_identity_holds(seed in any::<u64>(), n in 1usize..=8) {
        let mut r = rng_for(seed, 4);
        let sp = random_space(&mut r, n);
        let g = random_table(&mut r, &sp, Role::QuasiObservable);
        let hs: Vec<Complex> = (0..97).map(|_| random_complex(&mut r)).collect();
        let res = star_identity_check(&g, |xi, eta| hs[(xi.bits() as usize * 13 + eta.bits() as usize * 7) % hs.len()]);
        prop_assert!(res.relative() < 1e-12, "{res:?}");
    }

    #[test]
    fn derivative_routes_and_duality_agree(seed in any::<u64>(), n in 1usize..=7) {
        let mut r = rng_for(seed, 5);
        let sp = random_space(&mut r, n);
        let mu = random_measure(&mut r, &sp);
        let theta = random_field(&mut r, n);
        let a = variational_derivatives(&mu, &theta).unwrap();
        let b = variational_derivatives_by_extraction(&mu, &theta).unwrap();
        let scale = a.max_abs().max(1.0);
        prop_assert!(a.max_abs_diff(&b).unwrap() < 1e-9 * scale);
        let g = random_table(&mut r, &sp, Role::QuasiObservable);
        let res = derivative_duality(&g, &mu, &theta).unwrap();
        prop_assert!(res.relative() < 1e-12, "{res:?}");
    }

    #[test]
    fn occupation_routes_agree_and_sum_to_one(seed in any::<u64>(), n in 2usize..=8) {
        let mut r = rng_for(seed, 6);
        let sp = random_space(&mut r, n);
        let mu = random_measure(&mut r, &sp);
        let split = r.random_range(1..n);
        let blocks = [Configuration::from_sites(0..split), Configuration::from_sites(split..n)];
        let mut total = 0.0;
        for a in 0..=split {
            for b in 0..=(n - split) {
                let res = occupation_probabilities(&mu, &blocks, &[a, b]).unwrap();
                prop_assert!((res.direct - res.via_functional).abs() < 1e-12);
                prop_assert!(res.direct >= 0.0);
                total += res.direct;
            }
        }
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projection_commutes_with_correlations(seed in any::<u64>(), n in 2usize..=8) {
        let mut r = rng_for(seed, 7);
        let sp = random_space(&mut r, n);
        let mu = random_measure(&mut r, &sp);
        let sub = Configuration(r.random_range(1..(1u64 << n)));
        let projected = project_measure(&mu, sub).unwrap();
        let k_sub = correlation_from_measure(&projected).unwrap();
        let k = correlation_from_measure(&mu).unwrap();
        for eta in sub.subsets() {
            prop_assert!((k_sub.get(eta).unwrap() - k.get(eta).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn energies_are_additive_over_disjoint_unions(seed in any::<u64>(), n in 2usize..=10) {
        let mut r = rng_for(seed, 8);
        let sp = random_space(&mut r, n);
        let phi = random_potential(&mut r, &sp, -1.0, 2.0, 0.2);
        let full = sp.full().bits();
        let a = Configuration(r.random_range(0..=full));
        let b = Configuration(r.random_range(0..=full) & !a.bits());
        let split = phi.energy(a) + phi.energy(b) + phi.interaction(a, b);
        match (phi.energy(a.union(b)), split) {
            (Energy::Finite(x), Energy::Finite(y)) => prop_assert!((x - y).abs() < 1e-12 * (1.0 + x.abs())),
            (x, y) => prop_assert_eq!(x, y),
        }
        prop_assert_eq!(phi.interaction(a, a.union(b)), if a.is_empty() { Energy::ZERO } else { Energy::Infinite });
    }

    #[test]
    fn gnz_holds_for_every_gibbs_measure(seed in any::<u64>(), n in 1usize..=8) {
        let mut r = rng_for(seed, 9);
        let sp = random_space(&mut r, n);
        let phi = random_potential(&mut r, &sp, -0.5, 2.0, 0.2);
        let mu = phi.gibbs_measure().unwrap();
        let w: Vec<f64> = (0..64).map(|_| r.random_range(-1.0..1.0)).collect();
        let res = phi.gnz_residual(&mu, |x, g| w[(x * 5 + g.bits() as usize) % 64]).unwrap();
        prop_assert!(res.relative() < 1e-12, "{res:?}");
    }

    #[test]
    fn j_is_linear_and_kills_constants_at_the_origin(seed in any::<u64>(), n in 1usize..=7) {
        let mut r = rng_for(seed, 10);
        let sp = random_space(&mut r, n);
        let phi = random_potential(&mut r, &sp, 0.0, 2.0, 0.2);
        let a = FunctionalRep::new(random_table(&mut r, &sp, Role::Coefficients)).unwrap();
        let b = FunctionalRep::new(random_table(&mut r, &sp, Role::Coefficients)).unwrap();
        let (s, t) = (random_complex(&mut r), random_complex(&mut r));
        let lhs = apply_j(&a.combine(s, &b, t).unwrap(), &phi).unwrap();
        let ja = apply_j(&a, &phi).unwrap();
        let rhs = ja.combine(s, &apply_j(&b, &phi).unwrap(), t).unwrap();
        let scale = lhs.values().iter().map(|v| v.norm()).fold(1.0, f64::max);
        prop_assert!(lhs.coefficients().max_abs_diff(rhs.coefficients()).unwrap() < 1e-12 * scale);
        prop_assert!(ja.values()[0].norm() < 1e-14);
    }

    #[test]
    fn ent_norm_bound_is_monotone_in_alpha(seed in any::<u64>(), n in 1usize..=8, a1 in 0.05f64..5.0, da in 0.0f64..5.0) {
        let mut r = rng_for(seed, 11);
        let sp = random_space(&mut r, n);
        let l = FunctionalRep::new(random_table(&mut r, &sp, Role::Coefficients)).unwrap();
        prop_assert!(ent_norm_upper_bound(&l, a1 + da).unwrap() <= ent_norm_upper_bound(&l, a1).unwrap());
        prop_assert!(ent_norm_upper_bound(&l, a1).unwrap() >= l.values()[0].norm());
    }

    #[test]
    fn generator_is_triangular_on_random_grids(seed in any::<u64>(), m in 24usize..=48, beta in 0.0f64..2.0) {
        let mut r = rng_for(seed, 12);
        let side = r.random_range(4.0..8.0);
        let grid = Grid1d::periodic(side, m).unwrap();
        let v = RadialPotential::poly_power(r.random_range(0.1..3.0), 4, r.random_range(0.5..1.9)).unwrap();
        let phi = PairPotential::radial(v, beta).unwrap();
        let level = |r: &mut bogo_core::rng::StreamRng, on: bool| {
            let mut t = PairTable::zeros(m);
            if on {
                for i in 0..m {
                    for j in 0..i {
                        let x = r.random_range(-1.0..1.0);
                        t.set(i, j, x);
                        t.set(j, i, x);
                    }
                }
            }
            t
        };
        let g1: Vec<f64> = (0..m).map(|_| r.random_range(-1.0..1.0)).collect();
        let a = QuasiObservableGrid::new(grid, 1.0, g1.clone(), level(&mut r, true), 0.0).unwrap();
        let b = QuasiObservableGrid::new(grid, 1.0, g1, level(&mut r, true), 0.0).unwrap();
        let (ha, hb) = (apply_h_hat(&a, &phi).unwrap(), apply_h_hat(&b, &phi).unwrap());
        prop_assert_eq!(&ha.g1, &hb.g1);
        prop_assert_eq!(ha.g0, 0.0);
        prop_assert_eq!(ha.g2.asymmetry(), 0.0);
        let top = QuasiObservableGrid::new(grid, 0.0, vec![0.0; m], level(&mut r, true), 0.0).unwrap();
        let ht = apply_h_hat(&top, &phi).unwrap();
        prop_assert_eq!(ht.level_norms()[0], 0.0);
        prop_assert_eq!(ht.level_norms()[1], 0.0);
    }
}

type Complex = bogo_core::Complex64;
