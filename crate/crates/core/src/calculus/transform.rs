//! K-transform, its Möbius inverse, coherent states, Lebesgue–Poisson
//! integration, and the passage between measures and correlation functions.

use num_complex::Complex64;

use super::lattice;
use super::set_function::{Role, SetFunction};
use super::space::{Configuration, Field};
use crate::{Error, Result};

const MEASURE_TOL: f64 = 1e-9;

/// `(KG)(gamma) = sum_{eta subset of gamma} G(eta)`, by direct summation.
pub fn k_transform(g: &SetFunction, gamma: Configuration) -> Result<Complex64> {
    let top = g.local_index(gamma).ok_or_else(|| Error::domain(format!("{gamma:?} is not inside the table window")))?;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut s = top;
    loop {
        sum += g.values()[s];
        if s == 0 {
            break;
        }
        s = (s - 1) & top;
    }
    Ok(sum)
}

/// `KG` on every subset of the window at once (fast zeta transform).
pub fn k_transform_table(g: &SetFunction) -> SetFunction {
    let mut v = g.values().to_vec();
    lattice::subset_zeta(&mut v);
    g.with_values(v).expect("same shape").with_role(Role::Observable)
}

/// Möbius inversion: the unique `G` with `KG = F` on the window.
pub fn k_inverse(f: &SetFunction) -> SetFunction {
    let mut v = f.values().to_vec();
    lattice::subset_mobius(&mut v);
    f.with_values(v).expect("same shape").with_role(Role::QuasiObservable)
}

/// `e_lambda(f, eta) = prod_{x in eta} f(x)`, with the empty product 1.
pub fn coherent_state(f: &Field, eta: Configuration) -> Complex64 {
    eta.sites().map(|x| f.get(x)).product()
}

/// [`coherent_state`] tabulated on a window, as a quasi-observable.
pub fn coherent_table(space: std::sync::Arc<super::SiteSpace>, window: Configuration, f: &Field) -> Result<SetFunction> {
    f.check(&space)?;
    let sites: Vec<usize> = window.sites().collect();
    let local: Vec<Complex64> = sites.iter().map(|&s| f.get(s)).collect();
    SetFunction::from_values(space, window, Role::QuasiObservable, lattice::product_table(&local))
}

/// `int_{Gamma_Lambda} G d lambda_sigma = sum_{eta subset of Lambda} G(eta) prod sigma`.
pub fn lebesgue_poisson_integral(g: &SetFunction, lambda_window: Configuration) -> Result<Complex64> {
    let top = g.local_index(lambda_window).ok_or_else(|| Error::domain("integration window must lie inside the table window"))?;
    let weights = g.lambda_table();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut s = top;
    loop {
        sum += g.values()[s] * weights[s];
        if s == 0 {
            break;
        }
        s = (s - 1) & top;
    }
    Ok(sum)
}

/// Checks that a table is a probability: real, non-negative, summing to one.
pub fn validate_measure(mu: &SetFunction) -> Result<()> {
    let mut total = 0.0;
    for (m, v) in mu.values().iter().enumerate() {
        if v.im.abs() > MEASURE_TOL || v.re < -MEASURE_TOL || !v.re.is_finite() {
            return Err(Error::validation(format!("measure weight at {:?} is {v}, expected a non-negative real", mu.configuration(m))));
        }
        total += v.re;
    }
    if (total - 1.0).abs() > MEASURE_TOL {
        return Err(Error::validation(format!("measure weights sum to {total}, expected 1")));
    }
    Ok(())
}

/// Masses of the correlation measure `rho(eta) = mu({gamma : gamma contains eta})`.
pub fn correlation_masses(mu: &SetFunction) -> Result<Vec<Complex64>> {
    validate_measure(mu)?;
    let mut rho = mu.values().to_vec();
    lattice::superset_zeta(&mut rho);
    Ok(rho)
}

/// Correlation function `k = d rho / d lambda_sigma`.
pub fn correlation_from_measure(mu: &SetFunction) -> Result<SetFunction> {
    let rho = correlation_masses(mu)?;
    let lambda = mu.lambda_table();
    let k = rho.iter().zip(&lambda).map(|(r, l)| r / l).collect();
    Ok(mu.with_values(k)?.with_role(Role::Correlation))
}

/// Inverse of [`correlation_from_measure`]:
/// `mu(gamma) = sum_{xi subset of Lambda \ gamma} (-1)^{|xi|} k(gamma + xi) lambda(gamma + xi)`.
///
/// The result carries the measure role but is not validated; a `k` that is
/// not a correlation function shows up as negative weights.
pub fn measure_from_correlation(k: &SetFunction) -> Result<SetFunction> {
    let k0 = k.values()[0];
    if (k0 - Complex64::new(1.0, 0.0)).norm() > MEASURE_TOL {
        return Err(Error::validation(format!("correlation function must have k(empty) = 1, got {k0}")));
    }
    let lambda = k.lambda_table();
    let mut v: Vec<Complex64> = k.values().iter().zip(&lambda).map(|(a, l)| a * l).collect();
    lattice::superset_mobius(&mut v);
    Ok(k.with_values(v)?.with_role(Role::Measure))
}

/// Push-forward of a measure on its window to the subsets of `sub`:
/// `mu^{sub}(eta) = mu({gamma : gamma cap sub = eta})`.
pub fn project_measure(mu: &SetFunction, sub: Configuration) -> Result<SetFunction> {
    if !sub.is_subset_of(mu.window()) {
        return Err(Error::domain("projection window must lie inside the measure window"));
    }
    let mut out = SetFunction::zeros(mu.space().clone(), sub, Role::Measure)?;
    let mut values = vec![Complex64::new(0.0, 0.0); out.len()];
    for (m, v) in mu.values().iter().enumerate() {
        let gamma = mu.configuration(m).intersection(sub);
        values[out.local_index(gamma).expect("inside sub")] += v;
    }
    out = out.with_values(values)?;
    Ok(out)
}
