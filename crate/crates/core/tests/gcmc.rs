//! Grand-canonical birth/death sampler and its estimators.

mod common;

use bogo_core::equilibrium::{Energy, RadialPotential};
use bogo_core::gcmc::*;
use bogo_core::stats::batch_means;
use bogo_core::Error;

fn pooled(cfg: &ChainConfig, chains: usize) -> Vec<ParticleState> {
    run_chains(cfg, chains).unwrap().into_iter().flat_map(|o| o.samples).collect()
}

fn config(dim: usize, side: f64, z: f64, potential: RadialPotential, n_sweeps: usize, thinning: usize, seed: u64) -> ChainConfig {
    ChainConfig { sim_box: PeriodicBox::new(dim, side).unwrap(), z, beta: 1.0, potential, n_sweeps, burn_in: 1000, thinning, seed }
}

#[test]
fn ideal_gas_count_matches_z_volume() {
    let cfg = config(2, 4.0, 0.5, RadialPotential::zero(1.0), 100_000, 1, 11);
    let out = run_chain(&cfg, 0).unwrap();
    let counts: Vec<f64> = out.samples.iter().map(|s| s.len() as f64).collect();
    let est = batch_means(&counts, 20);
    assert!(est.within(cfg.z_volume(), 3.0, 0.0), "{est:?} vs {}", cfg.z_volume());
    // Poisson: variance equals the mean.
    let mean = counts.iter().sum::<f64>() / counts.len() as f64;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / counts.len() as f64;
    assert!((var / mean - 1.0).abs() < 0.1, "{var} {mean}");
}

#[test]
fn hard_core_pairs_never_overlap() {
    let r_core = 0.5;
    let cfg = config(1, 10.0, 1.0, RadialPotential::hardcore(r_core).unwrap(), 20_000, 5, 12);
    let samples = pooled(&cfg, 2);
    let bx = cfg.sim_box;
    for s in &samples {
        let pts: Vec<&[f64]> = s.points().collect();
        for i in 0..pts.len() {
            for j in 0..i {
                assert!(bx.distance(pts[i], pts[j]) >= r_core);
            }
        }
    }
    let est = estimate_correlations(&samples, &bx, Bins { r_max: 1.0, n_bins: 10 }).unwrap();
    for bin in est.g.iter().filter(|b| b.hi <= r_core) {
        assert_eq!(bin.g, 0.0, "{bin:?}");
    }
    assert!(est.g.iter().any(|b| b.lo >= r_core && b.g > 0.5));
}

/// Low-activity expansion of g in one dimension:
/// `(1 + f(r)) (1 + z int f(s) f(r - s) ds)` with `f = exp(-beta V) - 1`.
fn g_first_order(v: &RadialPotential, beta: f64, z: f64, r: f64) -> f64 {
    let f = |x: f64| match v.value(x.abs()) {
        Energy::Finite(e) => (-beta * e).exp() - 1.0,
        Energy::Infinite => -1.0,
    };
    let rc = v.cutoff;
    let n = 4000;
    let h = 2.0 * rc / n as f64;
    let conv: f64 = (0..n).map(|i| -rc + (i as f64 + 0.5) * h).map(|s| f(s) * f(r - s)).sum::<f64>() * h;
    (1.0 + f(r)) * (1.0 + z * conv)
}

#[test]
fn low_activity_pair_correlation_is_the_boltzmann_factor() {
    let v = RadialPotential::poly(1.0, 1.0).unwrap();
    let z = 0.2;
    let cfg = ChainConfig { burn_in: 1000, ..config(1, 10.0, z, v.clone(), 100_000, 10, 13) };
    let samples = pooled(&cfg, 4);
    let est = estimate_correlations(&samples, &cfg.sim_box, Bins { r_max: 2.0, n_bins: 10 }).unwrap();
    // Second-order term of the activity expansion, bounded by (z int |f|)^2.
    let int_f: f64 = {
        let n = 4000;
        let h = 2.0 / n as f64;
        (0..n).map(|i| -1.0 + (i as f64 + 0.5) * h).map(|x| 1.0 - (-v.value(x.abs()).finite().unwrap()).exp()).sum::<f64>() * h
    };
    let allowance = (z * int_f).powi(2);
    for bin in &est.g {
        let m = 50;
        let oracle =
            (0..m).map(|i| bin.lo + (i as f64 + 0.5) * (bin.hi - bin.lo) / m as f64).map(|r| g_first_order(&v, 1.0, z, r)).sum::<f64>()
                / m as f64;
        assert!((bin.g - oracle).abs() <= 3.0 * bin.se + allowance, "{bin:?} oracle {oracle}");
    }
    // Deep in the core the pair correlation is visibly suppressed.
    assert!(est.g[0].g < 0.5);
}

fn gnz_family(l: f64) -> Vec<GnzTestFunction> {
    (0..20)
        .map(|k| {
            let a = (k % 5) as f64 * 2.0;
            let w = if k < 10 { 2.0 } else { 4.0 };
            let psi = match k % 4 {
                0 => Psi::One,
                1 => Psi::CountIn { lo: vec![(a + 1.0) % l], hi: vec![((a + 1.0) % l) + 1.5] },
                2 => Psi::ExpCount { lo: vec![0.0], hi: vec![l], rate: 0.3 },
                _ => Psi::EmptyIn { lo: vec![(a + 0.5) % l], hi: vec![((a + 0.5) % l) + 1.0] },
            };
            GnzTestFunction { lo: vec![a], hi: vec![(a + w).min(l)], psi }
        })
        .collect()
}

#[test]
fn gnz_statistical_test_passes_and_rejects_the_wrong_activity() {
    let cfg = config(1, 10.0, 0.3, RadialPotential::poly(1.0, 1.0).unwrap(), 100_000, 10, 1);
    let samples = pooled(&cfg, 4);
    let family = gnz_family(10.0);
    let good = gnz_statistical_test(&samples, &cfg, cfg.z, &family, 1000).unwrap();
    assert!(good.passed && good.pass_fraction >= GNZ_PASS_FRACTION, "{}", good.pass_fraction);
    let bad = gnz_statistical_test(&samples, &cfg, 1.2 * cfg.z, &family, 1000).unwrap();
    assert!(!bad.passed, "{}", bad.pass_fraction);
}

#[test]
fn poisson_bogoliubov_functional() {
    let z = 0.5;
    let cfg = config(1, 6.0, z, RadialPotential::zero(1.0), 60_000, 5, 14);
    let samples = pooled(&cfg, 2);
    let theta = |x: &[f64]| if x[0] < 2.0 { -0.5 } else { 0.25 };
    let est = functional_estimate(&samples, theta).unwrap();
    let exact = (z * (2.0 * -0.5 + 4.0 * 0.25)).exp();
    assert!(est.within(exact, 3.0, 0.0), "{est:?} vs {exact}");
    let theta2 = |x: &[f64]| if x[0] < 3.0 { -0.4 } else { 0.0 };
    let est = functional_estimate(&samples, theta2).unwrap();
    assert!(est.within((-z * 1.2f64).exp(), 3.0, 0.0), "{est:?}");
}

/// The birth/death kernel restricted to `m` fixed positions on a ring is a
/// finite Markov chain; its target `pi(eta) ~ (zV/m)^|eta| exp(-beta E(eta))`
/// must be stationary.
#[test]
fn birth_death_kernel_satisfies_detailed_balance_on_a_finite_ring() {
    let m = 6;
    let bx = PeriodicBox::new(1, 3.0).unwrap();
    let v = RadialPotential::poly(1.3, 1.2).unwrap();
    let (beta, z) = (0.8, 0.7);
    let zv = z * bx.volume();
    let pos: Vec<Vec<f64>> = (0..m).map(|i| vec![i as f64 * 3.0 / m as f64]).collect();
    let state_of = |mask: usize| {
        let pts: Vec<Vec<f64>> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| pos[i].clone()).collect();
        ParticleState::from_points(1, &pts).unwrap()
    };
    let n_states = 1usize << m;
    let mut p = vec![vec![0.0; n_states]; n_states];
    for mask in 0..n_states {
        let s = state_of(mask);
        let n = s.len();
        let mut stay = 1.0;
        for i in 0..m {
            if mask >> i & 1 == 1 {
                continue;
            }
            let b = s.interaction_with(&pos[i], None, &bx, &v).boltzmann(beta);
            let pr = 0.5 / m as f64 * birth_acceptance(zv, n, b);
            p[mask][mask | 1 << i] += pr;
            stay -= pr;
        }
        let occupied: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        for (k, &i) in occupied.iter().enumerate() {
            let w = s.interaction_with(&pos[i], Some(k), &bx, &v).finite().unwrap();
            let pr = 0.5 / n as f64 * death_acceptance(zv, n, (beta * w).exp());
            p[mask][mask & !(1 << i)] += pr;
            stay -= pr;
        }
        p[mask][mask] += stay;
    }
    let energy = |mask: usize| -> f64 {
        let idx: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        let mut e = 0.0;
        for a in 0..idx.len() {
            for b in 0..a {
                e += v.value(bx.distance(&pos[idx[a]], &pos[idx[b]])).finite().unwrap();
            }
        }
        e
    };
    let w: Vec<f64> = (0..n_states).map(|s| (zv / m as f64).powi(s.count_ones() as i32) * (-beta * energy(s)).exp()).collect();
    let total: f64 = w.iter().sum();
    let pi: Vec<f64> = w.iter().map(|x| x / total).collect();
    for a in 0..n_states {
        for b in 0..n_states {
            assert!((pi[a] * p[a][b] - pi[b] * p[b][a]).abs() < 1e-15, "{a} {b}");
        }
    }
}

#[test]
fn sampler_is_reproducible_and_chain_order_is_stable() {
    let cfg = config(2, 3.0, 0.4, RadialPotential::poly(1.0, 1.0).unwrap(), 3000, 5, 15);
    let a = run_chains(&cfg, 3).unwrap();
    let b = run_chains(&cfg, 3).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.samples, y.samples);
        assert_eq!(x.acceptance_rate.to_bits(), y.acceptance_rate.to_bits());
    }
    assert_eq!(a[1].samples, run_chain(&cfg, 1).unwrap().samples);
    assert_ne!(a[0].samples, a[1].samples);
}

#[test]
fn invalid_settings_are_rejected() {
    let good = config(1, 10.0, 0.3, RadialPotential::poly(1.0, 1.0).unwrap(), 2000, 1, 1);
    assert!(run_chain(&ChainConfig { z: 0.0, ..good.clone() }, 0).is_err());
    assert!(run_chain(&ChainConfig { burn_in: 5000, ..good.clone() }, 0).is_err());
    assert!(run_chain(&ChainConfig { thinning: 0, ..good.clone() }, 0).is_err());
    assert!(run_chain(&ChainConfig { sim_box: PeriodicBox::new(1, 1.5).unwrap(), ..good.clone() }, 0).is_err());
    let few = run_chain(&ChainConfig { n_sweeps: 1010, ..good }, 0).unwrap().samples;
    assert!(matches!(functional_estimate(&few, |_| 0.0), Err(Error::InsufficientSamples { .. })));
}
