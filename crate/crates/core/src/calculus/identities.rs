use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::functional::{bogoliubov_eval, IdentityResidual};
use super::set_function::SetFunction;
use super::space::{Configuration, Field};
use crate::{rng, Error, Result};

/// Both sides of the splitting identity
/// `sum_{eta, xi disjoint} G(eta + xi) H(xi, eta) lambda(eta) lambda(xi)
///  = sum_eta G(eta) sum_{xi subset eta} H(xi, eta \ xi) lambda(eta)`.
///
/// `h` receives `(xi, eta)` as configurations inside the window of `g`.
pub fn star_identity_check<H>(g: &SetFunction, h: H) -> IdentityResidual
where
    H: Fn(Configuration, Configuration) -> Complex64,
{
    let lambda = g.lambda_table();
    let full = g.len() - 1;
    let cfg = |m: usize| g.configuration(m);

    let mut lhs = Complex64::new(0.0, 0.0);
    let mut mag = 0.0;
    for eta in 0..g.len() {
        let rest = full & !eta;
        let mut xi = rest;
        loop {
            let t = g.values()[eta | xi] * h(cfg(xi), cfg(eta)) * lambda[eta] * lambda[xi];
            lhs += t;
            mag += t.norm();
            if xi == 0 {
                break;
            }
            xi = (xi - 1) & rest;
        }
    }

    let mut rhs = Complex64::new(0.0, 0.0);
    for eta in 0..g.len() {
        let mut inner = Complex64::new(0.0, 0.0);
        let mut xi = eta;
        loop {
            inner += h(cfg(xi), cfg(eta & !xi));
            if xi == 0 {
                break;
            }
            xi = (xi - 1) & eta;
        }
        let t = g.values()[eta] * inner * lambda[eta];
        rhs += t;
        mag += t.norm();
    }
    IdentityResidual::new(lhs, rhs, mag)
}

/// Result of a (generalised) Ruelle bound check.
#[derive(Debug, Clone, Serialize)]
pub struct RuelleReport {
    pub passed: bool,
    pub a: f64,
    pub epsilon: f64,
    /// First configuration, in local-mask order, whose value exceeds the bound.
    pub witness: Option<Configuration>,
    /// Smallest constant for which the coefficient bound holds.
    pub minimal_a: f64,
    /// Number of random fields on which the growth bound was evaluated.
    pub growth_samples: usize,
    pub growth_violations: usize,
}

const GROWTH_SAMPLES: usize = 64;
const GROWTH_SEED: u64 = 0x5EED_0001;

fn factorial_pow(n: u32, power: f64) -> f64 {
    (1..=n).map(|i| (i as f64).ln()).sum::<f64>() * power
}

/// `min a` such that `|k(eta)| <= (|eta|!)^{1-eps} a^{|eta|}` for all nonempty `eta`.
pub fn minimal_ruelle_constant(k: &SetFunction, epsilon: f64) -> f64 {
    k.values()
        .iter()
        .enumerate()
        .skip(1)
        .map(|(m, v)| {
            let n = m.count_ones();
            if v.norm() == 0.0 {
                0.0
            } else {
                ((v.norm().ln() - factorial_pow(n, 1.0 - epsilon)) / n as f64).exp()
            }
        })
        .fold(0.0, f64::max)
}

/// Checks `|k(eta)| <= (|eta|!)^{1-eps} a^{|eta|}` entry by entry. When the
/// classical bound (`eps = 1`) holds, also samples complex fields and checks
/// the growth consequence `|L(theta)| <= prod (1 + a |theta_x| sigma_x) <= exp(a ||theta||)`.
pub fn ruelle_bound_check(k: &SetFunction, a: f64, epsilon: f64) -> Result<RuelleReport> {
    if !(a > 0.0) {
        return Err(Error::domain("Ruelle constant must be positive"));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::domain("epsilon must lie in (0, 1]"));
    }
    let mut witness = None;
    for (m, v) in k.values().iter().enumerate() {
        let n = m.count_ones();
        let log_bound = factorial_pow(n, 1.0 - epsilon) + n as f64 * a.ln();
        if v.norm() > log_bound.exp() * (1.0 + 1e-12) {
            witness = Some(k.configuration(m));
            break;
        }
    }
    let mut report = RuelleReport {
        passed: witness.is_none(),
        a,
        epsilon,
        witness,
        minimal_a: minimal_ruelle_constant(k, epsilon),
        growth_samples: 0,
        growth_violations: 0,
    };
    if report.passed && epsilon == 1.0 {
        let space = k.space();
        let sigma = space.sigma();
        let mut r = rng::stream(GROWTH_SEED, 0);
        for _ in 0..GROWTH_SAMPLES {
            let scale = r.random_range(0.1..4.0);
            let theta = Field(
                (0..space.len())
                    .map(|x| Complex64::from_polar(scale * r.random::<f64>() / sigma[x], r.random_range(0.0..std::f64::consts::TAU)))
                    .collect(),
            );
            let value = bogoliubov_eval(k, &theta)?.norm();
            let product: f64 = k.sites().iter().map(|&s| 1.0 + a * theta.get(s).norm() * sigma[s]).product();
            let exp_bound = (a * theta.l1_norm(space)).exp();
            report.growth_samples += 1;
            if value > product * (1.0 + 1e-12) || product > exp_bound * (1.0 + 1e-12) {
                report.growth_violations += 1;
            }
        }
        report.passed = report.growth_violations == 0;
    }
    Ok(report)
}
