use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use super::potential::{Energy, PairPotential, PotentialKind, RadialPotential};
use crate::calculus::{Configuration, IdentityResidual, Role, SetFunction, SiteSpace};
use crate::quadrature;
use crate::{Error, Result};

/// A pair potential resolved on the sites of a [`SiteSpace`].
///
/// Pair energies and Boltzmann factors are tabulated once. On the diagonal
/// the Mayer convention `exp(-beta phi(x, x)) = 0` holds: a site interacts
/// with itself as an infinitely hard core, so no configuration can contain
/// a point twice and interaction energies of overlapping configurations are
/// `+inf`.
#[derive(Debug, Clone)]
pub struct DiscretePotential {
    space: Arc<SiteSpace>,
    beta: f64,
    phi: Vec<Energy>,
    boltz: Vec<f64>,
    semibound: f64,
}

/// Energies of a configuration pair together with the Mayer norm.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyReport {
    /// `E(eta)`, `None` for `+inf`.
    pub energy: Option<f64>,
    /// `W(eta, gamma)`, `None` for `+inf`.
    pub interaction: Option<f64>,
    pub c_beta: f64,
}

impl DiscretePotential {
    /// Resolve `potential` on `space`. Radial potentials use Euclidean
    /// distances, or minimum-image distances in a periodic cube of side
    /// `period` when given.
    pub fn new(potential: &PairPotential, space: Arc<SiteSpace>, period: Option<f64>) -> Result<Self> {
        potential.validate()?;
        let n = space.len();
        let mut phi = vec![Energy::Infinite; n * n];
        match &potential.kind {
            PotentialKind::Matrix(m) => {
                if m.len() != n {
                    return Err(Error::validation(format!("pair matrix is {}x{} but the space has {n} sites", m.len(), m.len())));
                }
                for x in 0..n {
                    for y in 0..n {
                        if x != y {
                            phi[x * n + y] = m[x][y];
                        }
                    }
                }
            }
            PotentialKind::Radial(r) => {
                for x in 0..n {
                    for y in 0..n {
                        if x != y {
                            phi[x * n + y] = r.value(site_distance(&space, x, y, period));
                        }
                    }
                }
            }
        }
        let boltz = phi.iter().enumerate().map(|(i, e)| if i / n == i % n { 0.0 } else { e.boltzmann(potential.beta) }).collect();
        Ok(DiscretePotential { space, beta: potential.beta, phi, boltz, semibound: potential.semibound() })
    }

    pub fn space(&self) -> &Arc<SiteSpace> {
        &self.space
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn semibound(&self) -> f64 {
        self.semibound
    }

    /// `phi(x, y)`; `+inf` on the diagonal by convention.
    pub fn phi(&self, x: usize, y: usize) -> Energy {
        self.phi[x * self.space.len() + y]
    }

    /// `exp(-beta phi(x, y))`, exactly 0 on the diagonal and for hard cores.
    pub fn boltzmann(&self, x: usize, y: usize) -> f64 {
        self.boltz[x * self.space.len() + y]
    }

    /// True if every off-diagonal pair energy is non-negative.
    pub fn is_positive(&self) -> bool {
        let n = self.space.len();
        (0..n * n).all(|i| i / n == i % n || self.phi[i].finite().is_none_or(|v| v >= 0.0))
    }

    /// `E(eta) = sum over unordered pairs of phi`; `E(empty) = E({x}) = 0`.
    pub fn energy(&self, eta: Configuration) -> Energy {
        let sites: Vec<usize> = eta.sites().collect();
        let mut e = Energy::ZERO;
        for (i, &x) in sites.iter().enumerate() {
            for &y in &sites[..i] {
                e = e + self.phi(x, y);
            }
        }
        e
    }

    /// `W(eta, gamma) = sum_{x in eta, y in gamma} phi(x, y)`; overlapping
    /// configurations meet the diagonal and give `+inf`.
    pub fn interaction(&self, eta: Configuration, gamma: Configuration) -> Energy {
        if !eta.is_disjoint(gamma) {
            return Energy::Infinite;
        }
        eta.sites().flat_map(|x| gamma.sites().map(move |y| (x, y))).map(|(x, y)| self.phi(x, y)).sum()
    }

    /// `exp(-beta W(eta, gamma))` as the product of pair Boltzmann factors.
    pub fn boltzmann_interaction(&self, eta: Configuration, gamma: Configuration) -> f64 {
        eta.sites().flat_map(|x| gamma.sites().map(move |y| (x, y))).map(|(x, y)| self.boltzmann(x, y)).product()
    }

    /// `C(beta) = max_x sum_y |exp(-beta phi(x, y)) - 1| sigma_y`, the diagonal
    /// contributing `sigma_x`.
    pub fn mayer_norm(&self) -> f64 {
        let n = self.space.len();
        let sigma = self.space.sigma();
        (0..n).map(|x| (0..n).map(|y| (self.boltzmann(x, y) - 1.0).abs() * sigma[y]).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn energy_report(&self, eta: Configuration, gamma: Configuration) -> EnergyReport {
        EnergyReport { energy: self.energy(eta).finite(), interaction: self.interaction(eta, gamma).finite(), c_beta: self.mayer_norm() }
    }

    /// The Gibbs measure `mu(gamma) = exp(-beta E(gamma)) prod sigma / Z`
    /// on all subsets of the space.
    pub fn gibbs_measure(&self) -> Result<SetFunction> {
        let full = self.space.full();
        self.space.check_cap(full)?;
        let n = self.space.len();
        let sigma = self.space.sigma();
        let mut w = vec![0.0_f64; 1usize << n];
        w[0] = 1.0;
        for m in 1..w.len() {
            let top = usize::BITS as usize - 1 - m.leading_zeros() as usize;
            let rest = m ^ (1 << top);
            if w[rest] == 0.0 {
                continue;
            }
            let factor: f64 = Configuration(rest as u64).sites().map(|y| self.boltzmann(top, y)).product();
            w[m] = w[rest] * sigma[top] * factor;
        }
        let z: f64 = w.iter().sum();
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::domain("Gibbs weights cannot be normalised"));
        }
        let values = w.into_iter().map(|v| Complex64::new(v / z, 0.0)).collect();
        SetFunction::from_values(self.space.clone(), full, Role::Measure, values)
    }

    /// Both sides of the discrete GNZ identity
    /// `E_mu[sum_{x in gamma} H(x, gamma \ x)] = sum_x sigma_x E_mu[H(x, gamma) exp(-beta W({x}, gamma))]`.
    ///
    /// The indicator `x not in gamma` of the finite-space identity is carried
    /// by the diagonal convention: `exp(-beta W({x}, gamma)) = 0` when `x` is in `gamma`.
    pub fn gnz_residual<H>(&self, mu: &SetFunction, h: H) -> Result<IdentityResidual>
    where
        H: Fn(usize, Configuration) -> f64,
    {
        if mu.role() != Role::Measure {
            return Err(Error::domain("GNZ residual needs a measure table"));
        }
        if mu.window() != self.space.full() || **mu.space() != *self.space {
            return Err(Error::domain("measure must live on the full space of the potential"));
        }
        let sigma = self.space.sigma();
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        let mut mag = 0.0;
        for (m, v) in mu.values().iter().enumerate() {
            let p = v.re;
            if p == 0.0 {
                continue;
            }
            let gamma = mu.configuration(m);
            for x in gamma.sites() {
                let t = p * h(x, gamma.without(x));
                lhs += t;
                mag += t.abs();
            }
            for x in 0..self.space.len() {
                let b = self.boltzmann_interaction(Configuration::single(x), gamma);
                if b == 0.0 {
                    continue;
                }
                let t = sigma[x] * p * h(x, gamma) * b;
                rhs += t;
                mag += t.abs();
            }
        }
        Ok(IdentityResidual::new(Complex64::new(lhs, 0.0), Complex64::new(rhs, 0.0), mag))
    }
}

/// Inverse temperature at which `potential` on `space` has Mayer norm
/// `target`, found by bisection. Needs a non-negative potential, for which
/// `C(beta)` increases from `max sigma` at `beta = 0`.
pub fn beta_for_mayer_norm(potential: &PairPotential, space: Arc<SiteSpace>, period: Option<f64>, target: f64) -> Result<f64> {
    if !potential.is_positive() {
        return Err(Error::domain("beta search needs a non-negative potential"));
    }
    let norm_at = |beta: f64| -> Result<f64> {
        let p = PairPotential { beta, ..potential.clone() };
        Ok(DiscretePotential::new(&p, space.clone(), period)?.mayer_norm())
    };
    if norm_at(0.0)? > target {
        return Err(Error::domain(format!("C(beta) >= max sigma exceeds the target {target}")));
    }
    let mut hi = 1.0;
    while norm_at(hi)? < target {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::domain(format!("C(beta) never reaches {target}")));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if norm_at(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub(crate) fn site_distance(space: &SiteSpace, x: usize, y: usize, period: Option<f64>) -> f64 {
    let (p, q) = (space.position(x), space.position(y));
    p.iter()
        .zip(q)
        .map(|(a, b)| {
            let mut d = a - b;
            if let Some(l) = period {
                d -= l * (d / l).round();
            }
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Surface area of the unit sphere in `dim` dimensions.
pub fn unit_sphere_area(dim: usize) -> f64 {
    use std::f64::consts::PI;
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => panic!("dimension must be 1, 2 or 3"),
    }
}

/// Continuum Mayer norm `C(beta) = z int |exp(-beta V(|u|)) - 1| du` over
/// `R^dim`, by composite Gauss–Legendre in the radius.
pub fn continuum_mayer_norm(potential: &RadialPotential, beta: f64, z: f64, dim: usize) -> Result<f64> {
    if !(1..=3).contains(&dim) {
        return Err(Error::domain("dimension must be 1, 2 or 3"));
    }
    let integrand = |r: f64| (potential.value(r).boltzmann(beta) - 1.0).abs() * r.powi(dim as i32 - 1);
    let rc = potential.cutoff;
    // Split at a hard-core radius so every panel sees a smooth integrand.
    let mut breaks = vec![0.0, rc];
    if let super::potential::RadialForm::Hardcore { radius } = potential.form {
        breaks.insert(1, radius.min(rc));
    }
    let mut total = 0.0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            total += quadrature::composite(w[0], w[1], 64, 8, integrand);
        }
    }
    Ok(z * unit_sphere_area(dim) * total)
}
