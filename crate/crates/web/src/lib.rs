//! Browser bindings for three small bogo-core experiments. Every export takes
//! plain numbers and returns a JSON string, so the page needs no glue beyond
//! `JSON.parse`.

use std::sync::Arc;

use bogo_core::calculus::{correlation_from_measure, Configuration, SiteSpace};
use bogo_core::equilibrium::{beta_for_mayer_norm, DiscretePotential, Energy, PairPotential, RadialPotential};
use bogo_core::gcmc::{estimate_correlations, run_chain, Bins, ChainConfig, PeriodicBox};
use bogo_core::solver::{fixed_point_solve, FunctionalRep, SolveOptions};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, JsError> {
    serde_json::to_string(value).map_err(js_err)
}

fn chain_potential(sites: usize, sigma: f64, amplitude: f64, cutoff: f64, beta: f64) -> bogo_core::Result<DiscretePotential> {
    let space = Arc::new(SiteSpace::lattice_1d(sites, 1.0, sigma)?);
    let pot = PairPotential::radial(RadialPotential::poly(amplitude, cutoff)?, beta)?;
    DiscretePotential::new(&pot, space, None)
}

#[derive(Serialize)]
struct ExactReport {
    configurations: usize,
    mayer_norm: f64,
    occupation: Vec<f64>,
    mean_count: f64,
    gnz_residual: f64,
    roundtrip_error: f64,
}

/// Enumerates the Gibbs measure of a repulsive chain and reports site
/// occupation probabilities together with two identity residuals.
#[wasm_bindgen]
pub fn exact_chain(sites: usize, sigma: f64, amplitude: f64, cutoff: f64, beta: f64) -> Result<String, JsError> {
    if sites > 14 {
        return Err(JsError::new("keep the chain at 14 sites or fewer in the browser"));
    }
    let phi = chain_potential(sites, sigma, amplitude, cutoff, beta).map_err(js_err)?;
    let mu = phi.gibbs_measure().map_err(js_err)?;
    let weights: Vec<f64> = mu.values().iter().map(|v| v.re).collect();
    let mut occupation = vec![0.0; sites];
    let mut mean_count = 0.0;
    for (i, w) in weights.iter().enumerate() {
        let c = mu.configuration(i);
        mean_count += w * c.len() as f64;
        for x in c.sites() {
            occupation[x] += w;
        }
    }
    let k = correlation_from_measure(&mu).map_err(js_err)?;
    let back = bogo_core::calculus::measure_from_correlation(&k).map_err(js_err)?;
    let gnz = phi.gnz_residual(&mu, |x, g: Configuration| 1.0 + x as f64 * 0.1 + g.len() as f64).map_err(js_err)?;
    to_json(&ExactReport {
        configurations: mu.len(),
        mayer_norm: phi.mayer_norm(),
        occupation,
        mean_count,
        gnz_residual: gnz.relative(),
        roundtrip_error: back.max_abs_diff(&mu).map_err(js_err)?,
    })
}

#[derive(Serialize)]
struct FixedPointReport {
    beta: f64,
    c_beta: f64,
    rate_bound: f64,
    iterations: usize,
    deltas: Vec<f64>,
    bounds: Vec<f64>,
    gibbs_distance: f64,
}

/// Tunes beta so the chain has Mayer norm `mayer_norm`, then iterates
/// `L = 1 + J L` and compares with enumeration. Fails with the solver's own
/// message outside the contraction regime.
#[wasm_bindgen]
pub fn fixed_point(sites: usize, sigma: f64, mayer_norm: f64) -> Result<String, JsError> {
    if sites > 10 {
        return Err(JsError::new("keep the chain at 10 sites or fewer in the browser"));
    }
    let space = Arc::new(SiteSpace::lattice_1d(sites, 1.0, sigma).map_err(js_err)?);
    let pot = PairPotential::radial(RadialPotential::poly(1.5, 2.5).map_err(js_err)?, 1.0).map_err(js_err)?;
    let beta = beta_for_mayer_norm(&pot, space.clone(), None, mayer_norm).map_err(js_err)?;
    let phi = DiscretePotential::new(&PairPotential { beta, ..pot }, space.clone(), None).map_err(js_err)?;
    let init = FunctionalRep::constant(space, 1.0).map_err(js_err)?;
    let (l, rep) = fixed_point_solve(&phi, &init, SolveOptions::default()).map_err(js_err)?;
    let exact = FunctionalRep::new(correlation_from_measure(&phi.gibbs_measure().map_err(js_err)?).map_err(js_err)?).map_err(js_err)?;
    let first = rep.deltas.first().copied().unwrap_or(0.0);
    let bounds = (0..rep.deltas.len()).map(|i| first * rep.rate_bound.powi(i as i32)).collect();
    to_json(&FixedPointReport {
        beta,
        c_beta: rep.c_beta,
        rate_bound: rep.rate_bound,
        iterations: rep.iterations,
        bounds,
        gibbs_distance: l.weighted_sup_distance(&exact, rep.alpha).map_err(js_err)?,
        deltas: rep.deltas,
    })
}

#[derive(Serialize)]
struct PairBin {
    r: f64,
    g: f64,
    se: f64,
    boltzmann: f64,
}

#[derive(Serialize)]
struct SamplerReport {
    density: f64,
    density_se: f64,
    acceptance_rate: f64,
    samples: usize,
    bins: Vec<PairBin>,
}

/// Grand-canonical Monte Carlo on a ring of length 10 with a soft repulsion
/// of range 1. Returns the pair correlation next to the bare Boltzmann
/// factor, which it approaches as the activity goes to zero.
#[wasm_bindgen]
pub fn sample_pair_correlation(z: f64, amplitude: f64, sweeps: usize, seed: u64) -> Result<String, JsError> {
    if sweeps > 200_000 {
        return Err(JsError::new("keep sweeps at 200000 or fewer in the browser"));
    }
    let v = RadialPotential::poly(amplitude, 1.0).map_err(js_err)?;
    let cfg = ChainConfig {
        sim_box: PeriodicBox::new(1, 10.0).map_err(js_err)?,
        z,
        beta: 1.0,
        potential: v.clone(),
        n_sweeps: sweeps,
        burn_in: sweeps / 20,
        thinning: 10,
        seed,
    };
    let out = run_chain(&cfg, 0).map_err(js_err)?;
    let est = estimate_correlations(&out.samples, &cfg.sim_box, Bins { r_max: 2.0, n_bins: 20 }).map_err(js_err)?;
    let bins = est
        .g
        .iter()
        .map(|b| {
            let r = 0.5 * (b.lo + b.hi);
            let boltzmann = match v.value(r) {
                Energy::Finite(e) => (-e).exp(),
                Energy::Infinite => 0.0,
            };
            PairBin { r, g: b.g, se: b.se, boltzmann }
        })
        .collect();
    to_json(&SamplerReport {
        density: est.k1.value,
        density_se: est.k1.se,
        acceptance_rate: out.acceptance_rate,
        samples: est.n_samples,
        bins,
    })
}
