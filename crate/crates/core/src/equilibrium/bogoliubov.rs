//! Residuals of the Bogoliubov equilibrium equation in its three equivalent
//! forms, evaluated exactly on a finite space.
//!
//! With the diagonal convention the shifted argument
//! `s_x(theta)(y) = (1 + theta_y)(exp(-beta phi(x, y)) - 1) + theta_y`
//! equals `-1` at `y = x`, which removes every configuration containing `x`
//! from `L(s_x(theta))`. That is exactly the indicator `1_{x not in gamma}`
//! in the finite-space GNZ identity, so for the Gibbs functional
//! `delta L / delta theta(x) = L(s_x(theta))` holds with no correction term.

use num_complex::Complex64;

use super::discrete::DiscretePotential;
use crate::calculus::{bogoliubov_eval, coherent_state, variational_derivatives, Configuration, Field, SetFunction};
use crate::quadrature::GaussLegendre;
use crate::{par, Error, Result};

/// Which of the equivalent forms to test.
#[derive(Debug, Clone)]
pub enum BogoliubovForm {
    /// `delta L(theta) / delta theta(x) = L(s_x(theta))` for every site.
    I,
    /// Integrated form along `theta + t f`, `t` in `[0, 1]`.
    Ii { f: Field },
    /// Expansion of `L(theta + f)` in the many-body shifts `s_eta(theta)`.
    Iii { f: Field },
}

/// `(1 + theta)(exp(-beta W(eta, {.})) - 1) + theta`.
pub fn shifted_field(phi: &DiscretePotential, eta: Configuration, theta: &Field) -> Field {
    let n = phi.space().len();
    Field(
        (0..n)
            .map(|y| {
                let b: f64 = eta.sites().map(|x| phi.boltzmann(x, y)).product();
                (Complex64::new(1.0, 0.0) + theta.get(y)) * (b - 1.0) + theta.get(y)
            })
            .collect(),
    )
}

fn check_source(source: &SetFunction, phi: &DiscretePotential) -> Result<()> {
    if source.window() != phi.space().full() || **source.space() != **phi.space() {
        return Err(Error::domain("functional must live on the full space of the potential"));
    }
    Ok(())
}

/// Absolute residual of the chosen form at `theta`.
pub fn bogoliubov_equation_residual(source: &SetFunction, phi: &DiscretePotential, theta: &Field, form: &BogoliubovForm) -> Result<f64> {
    check_source(source, phi)?;
    theta.check(phi.space())?;
    let n = phi.space().len();
    match form {
        BogoliubovForm::I => {
            let d = variational_derivatives(source, theta)?;
            let res = par::map_range(n, |x| -> Result<f64> {
                let lhs = d.get(Configuration::single(x))?;
                let rhs = bogoliubov_eval(source, &shifted_field(phi, Configuration::single(x), theta))?;
                Ok((lhs - rhs).norm())
            });
            res.into_iter().try_fold(0.0, |m, r| Ok(f64::max(m, r?)))
        }
        BogoliubovForm::Ii { f } => {
            f.check(phi.space())?;
            let sigma = phi.space().sigma();
            let lhs = bogoliubov_eval(source, &theta.add(f))? - bogoliubov_eval(source, theta)?;
            // t -> L(s_x(theta + t f)) is a polynomial of degree <= N.
            let gl = GaussLegendre::on((n + 1).div_ceil(2), 0.0, 1.0);
            let terms = par::map_range(n, |x| -> Result<Complex64> {
                if f.get(x) == Complex64::new(0.0, 0.0) {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                let mut integral = Complex64::new(0.0, 0.0);
                for (t, w) in gl.nodes.iter().zip(&gl.weights) {
                    let arg = theta.add(&f.scale(Complex64::new(*t, 0.0)));
                    integral += *w * bogoliubov_eval(source, &shifted_field(phi, Configuration::single(x), &arg))?;
                }
                Ok(f.get(x) * sigma[x] * integral)
            });
            let mut rhs = Complex64::new(0.0, 0.0);
            for t in terms {
                rhs += t?;
            }
            Ok((lhs - rhs).norm())
        }
        BogoliubovForm::Iii { f } => {
            f.check(phi.space())?;
            let lhs = bogoliubov_eval(source, &theta.add(f))?;
            let space = phi.space();
            let terms = par::map_range(1usize << n, |m| -> Result<Complex64> {
                let eta = Configuration(m as u64);
                let e = coherent_state(f, eta);
                let boltz = phi.energy(eta).boltzmann(phi.beta());
                if e == Complex64::new(0.0, 0.0) || boltz == 0.0 {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                let l = bogoliubov_eval(source, &shifted_field(phi, eta, theta))?;
                Ok(e * boltz * l * space.lambda(eta))
            });
            let mut rhs = Complex64::new(0.0, 0.0);
            for t in terms {
                rhs += t?;
            }
            Ok((lhs - rhs).norm())
        }
    }
}
