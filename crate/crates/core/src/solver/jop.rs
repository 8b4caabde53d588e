use num_complex::Complex64;

use super::rep::FunctionalRep;
use crate::calculus::{bogoliubov_eval, lattice, Configuration, Field};
use crate::equilibrium::{shifted_field, DiscretePotential};
use crate::quadrature::GaussLegendre;
use crate::{par, Error, Result};

fn nodes(n: usize) -> GaussLegendre {
    // t -> L(s_x(t theta)) has degree at most N in t.
    GaussLegendre::on((n + 1).div_ceil(2).max(1), 0.0, 1.0)
}

pub(crate) fn check(l: &FunctionalRep, phi: &DiscretePotential) -> Result<()> {
    if **l.space() != **phi.space() {
        return Err(Error::domain("functional and potential live on different spaces"));
    }
    Ok(())
}

/// Coefficient table of
/// `(JL)(theta) = sum_x sigma_x theta_x int_0^1 L(s_x(t theta)) dt`,
/// `s_x(theta) = (1 + theta)(exp(-beta phi(x, .)) - 1) + theta`.
///
/// In the scaled variables `u_y = theta_y sigma_y` the shifted argument is
/// `u_y -> a_xy + t b_xy u_y` with `b_xy = exp(-beta phi(x, y))` and
/// `a_xy = sigma_y (b_xy - 1)`. For fixed `x` and `t`, the values of
/// `L(shift(1_xi))` at all `2^N` corners `xi` come out of one Kronecker
/// transform of the coefficient table, mapping each site pair
/// `(v0, v1) -> (v0 + a v1, v0 + (a + t b) v1)`. Summing the corner values of
/// `JL` and Möbius-inverting gives its coefficients. The diagonal convention
/// `b_xx = 0` makes the argument independent of `u_x`, so `JL` stays
/// multilinear.
pub fn apply_j(l: &FunctionalRep, phi: &DiscretePotential) -> Result<FunctionalRep> {
    check(l, phi)?;
    let n = phi.space().len();
    let sigma = phi.space().sigma();
    let gl = nodes(n);
    let contributions = par::map_range(n, |x| {
        let a: Vec<f64> = (0..n).map(|y| sigma[y] * (phi.boltzmann(x, y) - 1.0)).collect();
        let bit_x = 1usize << x;
        let mut acc = vec![Complex64::new(0.0, 0.0); 1usize << n];
        let mut buf = vec![Complex64::new(0.0, 0.0); 1usize << n];
        for (t, w) in gl.nodes.iter().zip(&gl.weights) {
            buf.copy_from_slice(l.values());
            for (y, &ay) in a.iter().enumerate() {
                let c = ay + t * phi.boltzmann(x, y);
                let bit = 1usize << y;
                for m in 0..buf.len() {
                    if m & bit == 0 {
                        let v0 = buf[m];
                        let v1 = buf[m | bit];
                        buf[m] = v0 + ay * v1;
                        buf[m | bit] = v0 + c * v1;
                    }
                }
            }
            for m in 0..buf.len() {
                if m & bit_x != 0 {
                    acc[m] += *w * buf[m];
                }
            }
        }
        acc
    });
    let mut corners = vec![Complex64::new(0.0, 0.0); 1usize << n];
    for acc in contributions {
        for (c, v) in corners.iter_mut().zip(acc) {
            *c += v;
        }
    }
    lattice::subset_mobius(&mut corners);
    Ok(l.with_values(corners))
}

/// `(JL)(theta)` by direct quadrature of point evaluations, independent of
/// the coefficient route in [`apply_j`].
pub fn j_eval(l: &FunctionalRep, phi: &DiscretePotential, theta: &Field) -> Result<Complex64> {
    check(l, phi)?;
    theta.check(phi.space())?;
    let n = phi.space().len();
    let sigma = phi.space().sigma();
    let gl = nodes(n);
    let mut total = Complex64::new(0.0, 0.0);
    for x in 0..n {
        if theta.get(x) == Complex64::new(0.0, 0.0) {
            continue;
        }
        let mut integral = Complex64::new(0.0, 0.0);
        for (t, w) in gl.nodes.iter().zip(&gl.weights) {
            let arg = shifted_field(phi, Configuration::single(x), &theta.scale(Complex64::new(*t, 0.0)));
            integral += *w * bogoliubov_eval(l.coefficients(), &arg)?;
        }
        total += sigma[x] * theta.get(x) * integral;
    }
    Ok(total)
}
