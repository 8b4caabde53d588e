//! Bogoliubov functionals on a finite window, their variational derivatives,
//! and the finite-window consequences of the derivative calculus.

use num_complex::Complex64;
use serde::Serialize;

use super::lattice;
use super::set_function::{Role, SetFunction};
use super::space::{Configuration, Field};
use super::transform::{correlation_from_measure, validate_measure};
use crate::{par, Error, Result};

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// Evaluates `L(theta)`.
///
/// A measure table is integrated against `prod (1 + theta)`; a correlation or
/// coefficient table is expanded as `sum k(eta) prod theta_x sigma_x`.
pub fn bogoliubov_eval(source: &SetFunction, theta: &Field) -> Result<Complex64> {
    theta.check(source.space())?;
    let sites = source.sites();
    match source.role() {
        Role::Measure => {
            let f: Vec<Complex64> = sites.iter().map(|&s| one() + theta.get(s)).collect();
            Ok(lattice::multilinear_eval(source.values(), &f))
        }
        Role::Correlation | Role::Coefficients => {
            let sigma = source.space().sigma();
            let f: Vec<Complex64> = sites.iter().map(|&s| theta.get(s) * sigma[s]).collect();
            Ok(lattice::multilinear_eval(source.values(), &f))
        }
        other => Err(Error::domain(format!("cannot evaluate a functional from a {other:?} table"))),
    }
}

/// The Taylor-coefficient table `k` of the functional described by `source`.
pub fn coefficients(source: &SetFunction) -> Result<SetFunction> {
    match source.role() {
        Role::Measure => Ok(correlation_from_measure(source)?.with_role(Role::Coefficients)),
        Role::Correlation | Role::Coefficients => Ok(source.clone().with_role(Role::Coefficients)),
        other => Err(Error::domain(format!("a {other:?} table does not describe a functional"))),
    }
}

/// `eta -> D^{|eta|} L(theta0; eta)` via the shift formula
/// `D(theta0; eta) = sum_{xi disjoint from eta} k(eta + xi) e(theta0, xi) lambda(xi)`.
///
/// The returned table is the coefficient table of `L(theta0 + .)`.
pub fn variational_derivatives(source: &SetFunction, theta0: &Field) -> Result<SetFunction> {
    theta0.check(source.space())?;
    let k = coefficients(source)?;
    let sigma = k.space().sigma();
    let c: Vec<Complex64> = k.sites().iter().map(|&s| theta0.get(s) * sigma[s]).collect();
    let mut v = k.values().to_vec();
    lattice::weighted_superset_zeta(&mut v, &c);
    k.with_values(v)
}

/// Same table as [`variational_derivatives`], obtained only from point
/// evaluations of `L`. Since `L` is affine in each site variable,
/// `h -> L(theta0 + h)` is recovered exactly from its values at the corners
/// `h = sum_{x in xi} e_x / sigma_x` by Möbius inversion.
pub fn variational_derivatives_by_extraction(source: &SetFunction, theta0: &Field) -> Result<SetFunction> {
    theta0.check(source.space())?;
    let sites = source.sites().to_vec();
    let sigma = source.space().sigma().to_vec();
    let evals = par::map_range(source.len(), |xi| {
        let mut theta = theta0.clone();
        for (j, &s) in sites.iter().enumerate() {
            if xi >> j & 1 == 1 {
                theta.0[s] += 1.0 / sigma[s];
            }
        }
        bogoliubov_eval(source, &theta)
    });
    let mut v = evals.into_iter().collect::<Result<Vec<_>>>()?;
    lattice::subset_mobius(&mut v);
    Ok(source.with_values(v)?.with_role(Role::Coefficients))
}

/// Probability of prescribed occupation counts of disjoint blocks, computed
/// two ways.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OccupationResult {
    /// Direct summation of the measure.
    pub direct: f64,
    /// Extracted from evaluations of `L` at `sum_i z_i 1_{block_i} - 1_{union}`.
    pub via_functional: f64,
}

pub fn occupation_probabilities(mu: &SetFunction, blocks: &[Configuration], counts: &[usize]) -> Result<OccupationResult> {
    if mu.role() != Role::Measure {
        return Err(Error::domain("occupation probabilities need a measure table"));
    }
    validate_measure(mu)?;
    if blocks.len() != counts.len() {
        return Err(Error::validation("one count per block is required"));
    }
    let mut union = Configuration::EMPTY;
    for b in blocks {
        if !b.is_subset_of(mu.window()) {
            return Err(Error::domain("partition block lies outside the measure window"));
        }
        if !b.is_disjoint(union) {
            return Err(Error::domain("partition blocks must be disjoint"));
        }
        union = union.union(*b);
    }
    if blocks.iter().zip(counts).any(|(b, &n)| n > b.len()) {
        return Ok(OccupationResult { direct: 0.0, via_functional: 0.0 });
    }
    let matches = |gamma: Configuration| blocks.iter().zip(counts).all(|(b, &n)| gamma.intersection(*b).len() == n);

    let direct = mu.values().iter().enumerate().filter(|(m, _)| matches(mu.configuration(*m))).map(|(_, v)| v.re).sum();

    // Per-site version of the polynomial in z: w_x in {0,1} replaces z_i for
    // x in block i. L(w - 1 on the union) = sum_gamma mu(gamma) prod_{x in
    // gamma cap union} w_x, whose Möbius transform over the corners is the
    // law of gamma cap union.
    let dsites: Vec<usize> = union.sites().collect();
    let n = mu.space().len();
    let evals = par::map_range(1usize << dsites.len(), |s| {
        let mut theta = Field::zeros(n);
        for (j, &x) in dsites.iter().enumerate() {
            theta.0[x] = Complex64::new(if s >> j & 1 == 1 { 0.0 } else { -1.0 }, 0.0);
        }
        bogoliubov_eval(mu, &theta)
    });
    let mut law = evals.into_iter().collect::<Result<Vec<_>>>()?;
    lattice::subset_mobius(&mut law);
    let via_functional = law
        .iter()
        .enumerate()
        .filter(|(t, _)| {
            let gamma = Configuration::from_sites(dsites.iter().enumerate().filter(|(j, _)| t >> j & 1 == 1).map(|(_, &x)| x));
            matches(gamma)
        })
        .map(|(_, v)| v.re)
        .sum();
    Ok(OccupationResult { direct, via_functional })
}

/// Outcome of the Cauchy-type derivative bound
/// `|D^n L(theta0; eta)| <= n! (e/r)^n S(r)`.
#[derive(Debug, Clone, Serialize)]
pub struct DerivativeBoundReport {
    pub radius: f64,
    /// Upper bound for the sup of `|L|` over the `L^1(sigma)` ball of radius
    /// `r` about `theta0`.
    pub sup_bound: f64,
    /// Largest ratio of `|D|` to the right-hand side; at most 1 on success.
    pub worst_ratio: f64,
    pub witness: Option<Configuration>,
}

impl DerivativeBoundReport {
    pub fn holds(&self) -> bool {
        self.worst_ratio <= 1.0 + 1e-12
    }
}

/// Checks the derivative bound with the computable majorant
/// `S(r) = sum_zeta |D(theta0; zeta)| (r/|zeta|)^{|zeta|}`.
///
/// The majorant follows from expanding `L(theta0 + h)` in the coefficients
/// `D(theta0; .)` and bounding `prod_{x in zeta} |h_x| sigma_x` by AM-GM on the
/// ball `sum |h| sigma <= r`. It is an upper bound, never the exact sup.
pub fn derivative_bound_check(source: &SetFunction, theta0: &Field, r: f64) -> Result<DerivativeBoundReport> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain("radius must be positive and finite"));
    }
    let d = variational_derivatives(source, theta0)?;
    let sup_bound: f64 = d
        .values()
        .iter()
        .enumerate()
        .map(|(m, v)| {
            let n = m.count_ones() as i32;
            if n == 0 {
                v.norm()
            } else {
                v.norm() * (r / n as f64).powi(n)
            }
        })
        .sum();
    let mut worst = 0.0_f64;
    let mut witness = None;
    for (m, v) in d.values().iter().enumerate() {
        let n = m.count_ones();
        let factorial: f64 = (1..=n).map(f64::from).product();
        let rhs = factorial * (std::f64::consts::E / r).powi(n as i32) * sup_bound;
        let ratio = if rhs > 0.0 {
            v.norm() / rhs
        } else if v.norm() > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        if ratio > worst {
            worst = ratio;
            witness = Some(d.configuration(m));
        }
    }
    Ok(DerivativeBoundReport { radius: r, sup_bound, worst_ratio: worst, witness })
}

/// Residual of a two-sided identity, with a scale for relative comparison.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IdentityResidual {
    pub lhs: Complex64,
    pub rhs: Complex64,
    /// `|lhs - rhs|`.
    pub abs: f64,
    /// Sum of the absolute values of all summands on both sides; the natural
    /// scale of rounding error.
    pub magnitude: f64,
}

impl IdentityResidual {
    pub(crate) fn new(lhs: Complex64, rhs: Complex64, magnitude: f64) -> Self {
        IdentityResidual { lhs, rhs, abs: (lhs - rhs).norm(), magnitude }
    }

    /// `abs / magnitude`, or 0 when every summand vanishes.
    pub fn relative(&self) -> f64 {
        if self.magnitude > 0.0 {
            self.abs / self.magnitude
        } else {
            self.abs
        }
    }
}

/// Derivative duality: `int G D(theta; .) d lambda = int sum_{xi subset eta}
/// G(xi) e(theta, eta \ xi) d rho(eta)` for a quasi-observable `g` on the
/// same window as `source`.
pub fn derivative_duality(g: &SetFunction, source: &SetFunction, theta: &Field) -> Result<IdentityResidual> {
    g.same_window(source)?;
    let k = coefficients(source)?;
    let d = variational_derivatives(&k, theta)?;
    let lambda = k.lambda_table();
    let theta_local: Vec<Complex64> = k.sites().iter().map(|&s| theta.get(s)).collect();
    let e = lattice::product_table(&theta_local);

    let mut lhs = Complex64::new(0.0, 0.0);
    let mut mag = 0.0;
    for m in 0..g.len() {
        let t = g.values()[m] * d.values()[m] * lambda[m];
        lhs += t;
        mag += t.norm();
    }
    let mut rhs = Complex64::new(0.0, 0.0);
    for eta in 0..g.len() {
        let rho = k.values()[eta] * lambda[eta];
        if rho == Complex64::new(0.0, 0.0) {
            continue;
        }
        let mut inner = Complex64::new(0.0, 0.0);
        let mut xi = eta;
        loop {
            inner += g.values()[xi] * e[eta & !xi];
            if xi == 0 {
                break;
            }
            xi = (xi - 1) & eta;
        }
        let t = inner * rho;
        rhs += t;
        mag += t.norm();
    }
    Ok(IdentityResidual::new(lhs, rhs, mag))
}

/// Reconstructs the local measure on `lambda_window` from a functional:
/// `mu(eta) = D(-1_Lambda; eta) lambda(eta)` for `eta` inside the window.
///
/// Fails with a validation error when some `D(-1_Lambda; eta)` is negative,
/// i.e. when the functional is not a Bogoliubov functional.
pub fn reconstruct_measure(source: &SetFunction, lambda_window: Configuration) -> Result<SetFunction> {
    let k = coefficients(source)?;
    if !lambda_window.is_subset_of(k.window()) {
        return Err(Error::domain("reconstruction window must lie inside the table window"));
    }
    if (k.values()[0] - one()).norm() > 1e-9 {
        return Err(Error::validation("functional is not normalized: L(0) != 1"));
    }
    let theta = Field::indicator(k.space().len(), lambda_window, -1.0);
    let d = variational_derivatives(&k, &theta)?.restrict(lambda_window)?;
    let lambda = d.lambda_table();
    let scale = d.values().iter().zip(&lambda).map(|(v, l)| v.norm() * l).fold(0.0, f64::max);
    let mut weights = Vec::with_capacity(d.len());
    for (m, (v, l)) in d.values().iter().zip(&lambda).enumerate() {
        if v.re < -1e-12 * scale.max(1.0) || v.im.abs() > 1e-12 * scale.max(1.0) {
            return Err(Error::validation(format!("derivative at -1_Lambda is not non-negative at {:?}: {v}", d.configuration(m))));
        }
        weights.push(Complex64::new(v.re.max(0.0) * l, 0.0));
    }
    Ok(d.with_values(weights)?.with_role(Role::Measure))
}
