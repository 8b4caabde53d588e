#![allow(dead_code)]

use std::sync::Arc;

use bogo_core::calculus::{Configuration, Field, Role, SetFunction, SiteSpace};
use bogo_core::equilibrium::{DiscretePotential, Energy, PairPotential};
use bogo_core::rng::{self, StreamRng};
use bogo_core::Complex64;
use rand::Rng;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn rng_for(test: u64, instance: u64) -> StreamRng {
    rng::stream(0xC0FFEE ^ test, instance)
}

pub fn random_space(r: &mut StreamRng, n: usize) -> Arc<SiteSpace> {
    Arc::new(SiteSpace::with_sigma((0..n).map(|_| r.random_range(0.2..2.0)).collect()).unwrap())
}

pub fn random_complex(r: &mut StreamRng) -> Complex64 {
    Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
}

pub fn random_table(r: &mut StreamRng, space: &Arc<SiteSpace>, role: Role) -> SetFunction {
    let full = space.full();
    let values = (0..1usize << space.len()).map(|_| random_complex(r)).collect();
    SetFunction::from_values(space.clone(), full, role, values).unwrap()
}

pub fn random_field(r: &mut StreamRng, n: usize) -> Field {
    Field((0..n).map(|_| random_complex(r)).collect())
}

/// Random probability table with every weight positive.
pub fn random_measure(r: &mut StreamRng, space: &Arc<SiteSpace>) -> SetFunction {
    let w: Vec<f64> = (0..1usize << space.len()).map(|_| r.random_range(0.01..1.0)).collect();
    let total: f64 = w.iter().sum();
    let full = space.full();
    SetFunction::from_values(space.clone(), full, Role::Measure, w.into_iter().map(|v| c(v / total)).collect()).unwrap()
}

/// Symmetric random pair matrix with entries in `[lo, hi)` and a fraction of
/// hard-core (`+inf`) pairs.
pub fn random_matrix(r: &mut StreamRng, n: usize, lo: f64, hi: f64, p_inf: f64) -> Vec<Vec<Energy>> {
    let mut m = vec![vec![Energy::ZERO; n]; n];
    for i in 0..n {
        for j in 0..i {
            let e = if r.random::<f64>() < p_inf { Energy::Infinite } else { Energy::Finite(r.random_range(lo..hi)) };
            m[i][j] = e;
            m[j][i] = e;
        }
    }
    m
}

pub fn random_potential(r: &mut StreamRng, space: &Arc<SiteSpace>, lo: f64, hi: f64, p_inf: f64) -> DiscretePotential {
    let beta = r.random_range(0.0..2.0);
    let p = PairPotential::matrix(random_matrix(r, space.len(), lo, hi, p_inf), beta).unwrap();
    DiscretePotential::new(&p, space.clone(), None).unwrap()
}

/// All subsets of the full window of an `n`-site space, as configurations.
pub fn all_configurations(n: usize) -> impl Iterator<Item = Configuration> {
    (0..1u64 << n).map(Configuration)
}

/// `prod_{x in eta} sigma_x`, computed directly.
pub fn lambda(space: &SiteSpace, eta: Configuration) -> f64 {
    eta.sites().map(|x| space.sigma()[x]).product()
}

pub fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}
