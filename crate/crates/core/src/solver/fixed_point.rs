use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::jop::{apply_j, check};
use super::rep::{ent_norm_upper_bound, FunctionalRep};
use crate::calculus::Field;
use crate::equilibrium::DiscretePotential;
use crate::{rng, Error, Result};

/// Largest space the solver accepts.
pub const MAX_SOLVER_SITES: usize = 12;

/// Contraction data for `L = 1 + JL` on `Ent_alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub alpha: f64,
    pub c_beta: f64,
    /// `exp(alpha C(beta)) / alpha`, the operator-norm bound of `J`.
    pub rate_bound: f64,
    pub iterations: usize,
    /// Last weighted sup-norm step.
    pub final_delta: f64,
    pub converged: bool,
    /// Weighted sup-norm step after each iteration.
    pub deltas: Vec<f64>,
    /// Largest ratio of successive steps above the rounding floor.
    pub max_step_ratio: f64,
    /// Geometric mean of successive step ratios over the same range.
    pub mean_step_ratio: f64,
    /// For certificates: largest sampled `||J D||_alpha` lower estimate over
    /// the `||D||_alpha` upper bound, across random differences `D`.
    pub empirical_ratio: Option<f64>,
}

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Defaults to `1 / C(beta)`.
    pub alpha: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-10, max_iter: 1000, alpha: None }
    }
}

pub fn rate_bound(alpha: f64, c_beta: f64) -> f64 {
    (alpha * c_beta).exp() / alpha
}

fn base_report(phi: &DiscretePotential, alpha: Option<f64>) -> Result<ContractionReport> {
    let c_beta = phi.mayer_norm();
    let alpha = alpha.unwrap_or(1.0 / c_beta);
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain("alpha must be positive and finite"));
    }
    Ok(ContractionReport {
        alpha,
        c_beta,
        rate_bound: rate_bound(alpha, c_beta),
        iterations: 0,
        final_delta: f64::NAN,
        converged: false,
        deltas: Vec::new(),
        max_step_ratio: f64::NAN,
        mean_step_ratio: f64::NAN,
        empirical_ratio: None,
    })
}

/// Step ratios are only meaningful while the steps dominate rounding noise.
fn step_ratios(deltas: &[f64], scale: f64) -> (f64, f64) {
    let floor = 1e3 * f64::EPSILON * scale.max(1.0);
    let usable: Vec<f64> = deltas.iter().copied().take_while(|&d| d > floor).collect();
    if usable.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let ratios: Vec<f64> = usable.windows(2).map(|w| w[1] / w[0]).collect();
    let max = ratios.iter().copied().fold(0.0, f64::max);
    let mean = (usable[usable.len() - 1] / usable[0]).powf(1.0 / ratios.len() as f64);
    (max, mean)
}

/// Picard iteration `L <- 1 + JL` from `init`.
///
/// Refuses to start outside the regime `exp(alpha C) / alpha < 1` or for
/// potentials with a negative part, where uniqueness is not guaranteed.
pub fn fixed_point_solve(
    phi: &DiscretePotential,
    init: &FunctionalRep,
    options: SolveOptions,
) -> Result<(FunctionalRep, ContractionReport)> {
    check(init, phi)?;
    let n = phi.space().len();
    if n > MAX_SOLVER_SITES {
        return Err(Error::EnumerationCap { size: n, cap: MAX_SOLVER_SITES });
    }
    if !phi.is_positive() {
        return Err(Error::domain("the fixed-point solver requires a non-negative pair potential"));
    }
    if !(options.tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    let mut report = base_report(phi, options.alpha)?;
    if report.rate_bound >= 1.0 {
        return Err(Error::OutsideUniquenessRegime { c_beta: report.c_beta, rate_bound: report.rate_bound });
    }
    let mut l = init.clone();
    loop {
        let jl = apply_j(&l, phi)?;
        let mut next = jl.values().to_vec();
        next[0] += Complex64::new(1.0, 0.0);
        let next = l.with_values(next);
        let delta = next.weighted_sup_distance(&l, report.alpha)?;
        report.iterations += 1;
        report.deltas.push(delta);
        report.final_delta = delta;
        l = next;
        if delta <= options.tol {
            report.converged = true;
            break;
        }
        if report.iterations >= options.max_iter {
            return Err(Error::NonConvergence { iterations: report.iterations, last_delta: delta });
        }
    }
    let scale = l.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    (report.max_step_ratio, report.mean_step_ratio) = step_ratios(&report.deltas, scale);
    Ok((l, report))
}

/// Number of random differences and fields used by [`contraction_certificate`].
pub const CERTIFICATE_PAIRS: usize = 100;
const CERTIFICATE_FIELDS: usize = 48;

/// Computes `C(beta)` and the rate bound, and samples the operator ratio of
/// `J` on random coefficient differences.
///
/// The sampled ratio divides a lower estimate of `||J D||_alpha` (the largest
/// `|JD(theta)| exp(-alpha ||theta||)` over sampled fields) by the certified
/// upper bound of `||D||_alpha`, so it never exceeds the true operator ratio.
pub fn contraction_certificate(phi: &DiscretePotential, alpha: f64, seed: u64) -> Result<ContractionReport> {
    let mut report = base_report(phi, Some(alpha))?;
    let space = phi.space().clone();
    let n = space.len();
    if n > MAX_SOLVER_SITES {
        return Err(Error::EnumerationCap { size: n, cap: MAX_SOLVER_SITES });
    }
    let sigma = space.sigma().to_vec();
    let zero = FunctionalRep::constant(space.clone(), 0.0)?;
    let scale = std::f64::consts::E * alpha;
    let mut worst = 0.0_f64;
    for pair in 0..CERTIFICATE_PAIRS {
        let mut r = rng::stream(seed, pair as u64);
        // Sparse differences of low degree: the sampled sup of |JD| exp(-alpha ||theta||)
        // is then a meaningful fraction of the upper bound of ||D||.
        let degree = r.random_range(0..=2usize);
        let mut values = vec![Complex64::new(0.0, 0.0); 1usize << n];
        for _ in 0..r.random_range(1..=3usize) {
            let mut m = 0usize;
            while (m.count_ones() as usize) < degree.min(n) {
                m |= 1 << r.random_range(0..n);
            }
            let mag = scale.powi(m.count_ones() as i32) * r.random_range(0.1..1.0);
            values[m] += Complex64::from_polar(mag, r.random_range(0.0..std::f64::consts::TAU));
        }
        let d = zero.with_values(values);
        let jd = apply_j(&d, phi)?;
        let upper = ent_norm_upper_bound(&d, alpha)?;
        let mut lower = 0.0_f64;
        for _ in 0..CERTIFICATE_FIELDS {
            // The monomials of JD have degree <= degree + 1; their weighted sup
            // sits near ||theta|| = (degree + 1) / alpha.
            let radius = (degree + 1) as f64 / alpha * r.random_range(0.5..1.5);
            let support = r.random_range(1..=n.min(degree + 2));
            let mut w = vec![0.0; n];
            for _ in 0..support {
                w[r.random_range(0..n)] += r.random_range(0.2..1.0);
            }
            let wsum: f64 = w.iter().sum();
            let theta = Field(
                (0..n)
                    .map(|x| Complex64::from_polar(radius * w[x] / wsum / sigma[x], r.random_range(0.0..std::f64::consts::TAU)))
                    .collect(),
            );
            let v = jd.eval(&theta)?.norm() * (-alpha * theta.l1_norm(&space)).exp();
            lower = lower.max(v);
        }
        if upper > 0.0 {
            worst = worst.max(lower / upper);
        }
    }
    report.empirical_ratio = Some(worst);
    Ok(report)
}
