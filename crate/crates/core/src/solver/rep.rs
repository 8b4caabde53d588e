use std::sync::Arc;

use num_complex::Complex64;

use crate::calculus::{bogoliubov_eval, Field, Role, SetFunction, SiteSpace};
use crate::{Error, Result};

/// An entire functional on a finite space, stored by its Taylor coefficients:
/// `L(theta) = sum_eta k(eta) prod_{x in eta} theta_x sigma_x`.
#[derive(Debug, Clone)]
pub struct FunctionalRep {
    coefficients: SetFunction,
}

impl FunctionalRep {
    /// Wraps a coefficient or correlation table that covers the whole space.
    pub fn new(table: SetFunction) -> Result<Self> {
        if table.window() != table.space().full() {
            return Err(Error::domain("functional tables must cover the whole space"));
        }
        if !table.values()[0].re.is_finite() || !table.values()[0].im.is_finite() {
            return Err(Error::validation("k(empty) must be finite"));
        }
        match table.role() {
            Role::Coefficients | Role::Correlation => Ok(FunctionalRep { coefficients: table.with_role(Role::Coefficients) }),
            other => Err(Error::domain(format!("a {other:?} table is not a coefficient table"))),
        }
    }

    /// The constant functional `L = c`.
    pub fn constant(space: Arc<SiteSpace>, c: f64) -> Result<Self> {
        let mut values = vec![Complex64::new(0.0, 0.0); 1usize << space.len()];
        values[0] = Complex64::new(c, 0.0);
        let full = space.full();
        Self::new(SetFunction::from_values(space, full, Role::Coefficients, values)?)
    }

    /// The functional of the Poisson-like free measure with the diagonal
    /// convention: `k(eta) = prod_{x in eta} 1 / (1 + sigma_x)`.
    pub fn free(space: Arc<SiteSpace>) -> Result<Self> {
        let full = space.full();
        let sigma = space.sigma().to_vec();
        Self::new(SetFunction::from_fn(space, full, Role::Coefficients, |eta| {
            Complex64::new(eta.sites().map(|x| 1.0 / (1.0 + sigma[x])).product(), 0.0)
        })?)
    }

    pub fn coefficients(&self) -> &SetFunction {
        &self.coefficients
    }

    pub fn space(&self) -> &Arc<SiteSpace> {
        self.coefficients.space()
    }

    pub fn values(&self) -> &[Complex64] {
        self.coefficients.values()
    }

    pub(crate) fn with_values(&self, values: Vec<Complex64>) -> Self {
        FunctionalRep { coefficients: self.coefficients.with_values(values).expect("same shape") }
    }

    pub fn eval(&self, theta: &Field) -> Result<Complex64> {
        bogoliubov_eval(&self.coefficients, theta)
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: Complex64, other: &FunctionalRep, b: Complex64) -> Result<Self> {
        self.coefficients.same_window(&other.coefficients)?;
        Ok(self.with_values(self.values().iter().zip(other.values()).map(|(x, y)| a * x + b * y).collect()))
    }

    /// `max_eta |k(eta) - k'(eta)| (e alpha)^{-|eta|}`.
    pub fn weighted_sup_distance(&self, other: &FunctionalRep, alpha: f64) -> Result<f64> {
        self.coefficients.same_window(&other.coefficients)?;
        let w = 1.0 / (std::f64::consts::E * alpha);
        let n = self.space().len();
        let powers: Vec<f64> = (0..=n).map(|j| w.powi(j as i32)).collect();
        Ok(self
            .values()
            .iter()
            .zip(other.values())
            .enumerate()
            .map(|(m, (a, b))| (a - b).norm() * powers[m.count_ones() as usize])
            .fold(0.0, f64::max))
    }
}

/// Certified upper bound `sum_eta |k(eta)| (e alpha)^{-|eta|}` for
/// `||L||_alpha = sup_theta |L(theta)| exp(-alpha ||theta||)`.
///
/// Each monomial is bounded separately, using `t exp(-alpha t) <= 1/(e alpha)`
/// per site, so the bound is exact for constant functionals.
pub fn ent_norm_upper_bound(l: &FunctionalRep, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain("alpha must be positive and finite"));
    }
    let w = 1.0 / (std::f64::consts::E * alpha);
    Ok(l.values().iter().enumerate().map(|(m, v)| v.norm() * w.powi(m.count_ones() as i32)).sum())
}
