//! Criterion 4: the fixed-point solver inside the contraction regime.

use std::sync::Arc;

use bogo_core::calculus::{correlation_from_measure, SiteSpace};
use bogo_core::equilibrium::{beta_for_mayer_norm, DiscretePotential, PairPotential, RadialPotential};
use bogo_core::solver::{fixed_point_solve, FunctionalRep, SolveOptions};
use bogo_core::Error;
use rand::Rng;
use serde::Serialize;

use super::*;
use crate::plot::ConvergenceRow;

const CHAINS: u64 = 10;
const SITES: usize = 10;
const TOL: f64 = 1e-10;
const GIBBS_TOL: f64 = 1e-8;
const REFUSAL_NORM: f64 = 0.4;

#[derive(Serialize)]
struct ChainRow {
    instance: u64,
    sigma: f64,
    amplitude: f64,
    cutoff: f64,
    beta: f64,
    c_beta: f64,
    alpha: f64,
    rate_bound: f64,
    iterations_constant: usize,
    iterations_free: usize,
    two_init_distance: f64,
    gibbs_distance: f64,
    max_step_ratio: f64,
    mean_step_ratio: f64,
}

/// Repulsive chain of `SITES` sites tuned to Mayer norm `target`.
fn chain(sigma: f64, amplitude: f64, cutoff: f64, target: f64) -> Result<(DiscretePotential, f64), HarnessError> {
    let sp = Arc::new(SiteSpace::lattice_1d(SITES, 1.0, sigma)?);
    let pot = PairPotential::radial(RadialPotential::poly(amplitude, cutoff)?, 1.0)?;
    let beta = beta_for_mayer_norm(&pot, sp.clone(), None, target)?;
    Ok((DiscretePotential::new(&PairPotential { beta, ..pot }, sp, None)?, beta))
}

pub(super) fn uniqueness_suite(ctx: &SuiteContext) -> Result<Body, HarnessError> {
    let mut body = Body::default();
    let mut rows = Vec::new();
    let opts = SolveOptions { tol: TOL, ..SolveOptions::default() };
    for inst in 0..CHAINS {
        let mut r = ctx.stream(4, 0, inst);
        // C(beta) runs from sigma (the hard-core self term) up to 5 sigma, so
        // sigma must sit below 0.1 while 5 sigma clears 0.35.
        let sigma = r.random_range(0.08..0.095);
        let amplitude = r.random_range(0.5..2.0);
        let cutoff = r.random_range(2.1..2.9);
        // Targets spread evenly over [0.1, 0.35], jittered.
        let target = 0.1 + 0.25 * (inst as f64 + r.random_range(0.0..1.0)) / CHAINS as f64;
        let (phi, beta) = chain(sigma, amplitude, cutoff, target)?;
        let sp = phi.space().clone();
        let (a, rep_a) = fixed_point_solve(&phi, &FunctionalRep::constant(sp.clone(), 1.0)?, opts)?;
        let (b, rep_b) = fixed_point_solve(&phi, &FunctionalRep::free(sp)?, opts)?;
        let alpha = rep_a.alpha;
        let exact = FunctionalRep::new(correlation_from_measure(&phi.gibbs_measure()?)?)?;
        let first = rep_a.deltas.first().copied().unwrap_or(0.0);
        for (i, d) in rep_a.deltas.iter().enumerate() {
            body.results.convergence.push(ConvergenceRow {
                series: inst as u32,
                iteration: i + 1,
                delta: *d,
                bound: first * rep_a.rate_bound.powi(i as i32),
            });
        }
        rows.push(ChainRow {
            instance: inst,
            sigma,
            amplitude,
            cutoff,
            beta,
            c_beta: rep_a.c_beta,
            alpha,
            rate_bound: rep_a.rate_bound,
            iterations_constant: rep_a.iterations,
            iterations_free: rep_b.iterations,
            two_init_distance: a.weighted_sup_distance(&b, alpha)?,
            gibbs_distance: a.weighted_sup_distance(&exact, alpha)?,
            max_step_ratio: rep_a.max_step_ratio.max(rep_b.max_step_ratio),
            mean_step_ratio: rep_a.mean_step_ratio,
        });
    }
    let in_band = rows.iter().all(|r| (0.1 - 1e-9..=0.35 + 1e-9).contains(&r.c_beta));
    body.check(Assertion::new(
        "Mayer norms lie in [0.1, 0.35]",
        in_band,
        format!("{:?}", rows.iter().map(|r| (r.c_beta * 1e4).round() / 1e4).collect::<Vec<_>>()),
    ));
    body.check(Assertion::at_most(
        "two initialisations agree (weighted sup)",
        max_of(rows.iter().map(|r| r.two_init_distance)),
        ctx.tol(2.0 * TOL),
    ));
    body.check(Assertion::at_most(
        "fixed point matches enumerated Gibbs correlations (weighted sup)",
        max_of(rows.iter().map(|r| r.gibbs_distance)),
        ctx.tol(GIBBS_TOL),
    ));
    let ratio_excess = max_of(rows.iter().map(|r| r.max_step_ratio / r.rate_bound));
    body.check(Assertion::at_most("observed step ratio / e^(alpha C)/alpha", ratio_excess, 1.0));

    // Refusal just outside the regime.
    let (phi, _) = chain(0.1, 1.5, 2.5, REFUSAL_NORM)?;
    let refused = match fixed_point_solve(&phi, &FunctionalRep::constant(phi.space().clone(), 1.0)?, opts) {
        Err(e @ Error::OutsideUniquenessRegime { .. }) => Some(e.to_string()),
        _ => None,
    };
    body.check(Assertion::new(
        format!("solver refuses at C(beta) = {REFUSAL_NORM}"),
        refused.is_some(),
        refused.unwrap_or_else(|| "solver ran".into()),
    ));
    body.files.push(DataFile::csv("c4_uniqueness.csv", &rows)?);
    Ok(body)
}
