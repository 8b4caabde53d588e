//! Finite surrogate of the base space: sites with positions and intensities,
//! configurations as site bitmasks, and per-site fields.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default cap on the number of sites any 2^N enumeration may touch.
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

/// Hard limit imposed by the 64-bit configuration mask.
pub const MAX_SITES: usize = 64;

/// A finite set of sites `x` with positions in R^d and intensity weights
/// `sigma_x > 0`, standing in for a non-atomic intensity measure.
///
/// `sigma_x` is a dimensionless mass: activity times cell volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteSpace {
    ids: Vec<String>,
    positions: Vec<Vec<f64>>,
    sigma: Vec<f64>,
    #[serde(default = "default_cap")]
    enumeration_cap: usize,
}

fn default_cap() -> usize {
    DEFAULT_ENUMERATION_CAP
}

impl SiteSpace {
    pub fn new(ids: Vec<String>, positions: Vec<Vec<f64>>, sigma: Vec<f64>) -> Result<Self> {
        let space = SiteSpace { ids, positions, sigma, enumeration_cap: DEFAULT_ENUMERATION_CAP };
        space.validate()?;
        Ok(space)
    }

    /// `n` sites on a line at `0, spacing, 2*spacing, ...` with common `sigma`.
    pub fn lattice_1d(n: usize, spacing: f64, sigma: f64) -> Result<Self> {
        Self::new((0..n).map(|i| format!("s{i}")).collect(), (0..n).map(|i| vec![i as f64 * spacing]).collect(), vec![sigma; n])
    }

    /// `n` sites at unit spacing carrying the given intensities.
    pub fn with_sigma(sigma: Vec<f64>) -> Result<Self> {
        let n = sigma.len();
        Self::new((0..n).map(|i| format!("s{i}")).collect(), (0..n).map(|i| vec![i as f64]).collect(), sigma)
    }

    pub fn with_enumeration_cap(mut self, cap: usize) -> Self {
        self.enumeration_cap = cap.min(MAX_SITES);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.sigma.len();
        if n == 0 {
            return Err(Error::validation("site space must contain at least one site"));
        }
        if n > MAX_SITES {
            return Err(Error::validation(format!("at most {MAX_SITES} sites are supported, got {n}")));
        }
        if self.ids.len() != n || self.positions.len() != n {
            return Err(Error::validation("ids, positions and sigma must have equal length"));
        }
        if let Some(i) = self.sigma.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::validation(format!("sigma of site {} must be finite and > 0", self.ids[i])));
        }
        let mut sorted: Vec<&String> = self.ids.iter().collect();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::validation("site identifiers must be unique"));
        }
        let dim = self.positions[0].len();
        if self.positions.iter().any(|p| p.len() != dim || p.iter().any(|c| !c.is_finite())) {
            return Err(Error::validation("positions must share one dimension and be finite"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn position(&self, site: usize) -> &[f64] {
        &self.positions[site]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|s| s == id)
    }

    pub fn enumeration_cap(&self) -> usize {
        self.enumeration_cap
    }

    pub fn full(&self) -> Configuration {
        Configuration::full(self.len())
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.positions[a].iter().zip(&self.positions[b]).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
    }

    /// Lebesgue–Poisson weight `prod_{x in eta} sigma_x`.
    ///
    /// For sets of distinct sites the `1/n!` of the continuum measure cancels
    /// against the `n!` orderings of the set, so the weight is a bare product.
    pub fn lambda(&self, eta: Configuration) -> f64 {
        eta.sites().map(|x| self.sigma[x]).product()
    }

    /// `sigma(Lambda)`.
    pub fn sigma_of(&self, window: Configuration) -> f64 {
        window.sites().map(|x| self.sigma[x]).sum()
    }

    pub(crate) fn check_cap(&self, window: Configuration) -> Result<()> {
        let size = window.len();
        if size > self.enumeration_cap {
            return Err(Error::EnumerationCap { size, cap: self.enumeration_cap });
        }
        if !window.is_subset_of(self.full()) {
            return Err(Error::domain("window contains sites outside the space"));
        }
        Ok(())
    }
}

/// A finite configuration: a set of sites encoded as a bitmask over the
/// global site indices of a [`SiteSpace`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Configuration(pub u64);

impl Configuration {
    pub const EMPTY: Configuration = Configuration(0);

    pub fn full(n: usize) -> Self {
        if n >= 64 {
            Configuration(u64::MAX)
        } else {
            Configuration((1u64 << n) - 1)
        }
    }

    pub fn single(site: usize) -> Self {
        Configuration(1u64 << site)
    }

    pub fn from_sites<I: IntoIterator<Item = usize>>(sites: I) -> Self {
        Configuration(sites.into_iter().fold(0u64, |m, s| m | (1u64 << s)))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, site: usize) -> bool {
        self.0 >> site & 1 == 1
    }

    pub fn with(self, site: usize) -> Self {
        Configuration(self.0 | (1u64 << site))
    }

    pub fn without(self, site: usize) -> Self {
        Configuration(self.0 & !(1u64 << site))
    }

    pub fn union(self, other: Self) -> Self {
        Configuration(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        Configuration(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        Configuration(self.0 & !other.0)
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    /// Site indices in ascending order.
    pub fn sites(self) -> impl Iterator<Item = usize> {
        let mut m = self.0;
        std::iter::from_fn(move || {
            if m == 0 {
                None
            } else {
                let s = m.trailing_zeros() as usize;
                m &= m - 1;
                Some(s)
            }
        })
    }

    /// All subsets, including the empty set and `self`.
    pub fn subsets(self) -> impl Iterator<Item = Configuration> {
        let full = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == full { None } else { Some((cur.wrapping_sub(full)) & full) };
            Some(Configuration(cur))
        })
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.sites()).finish()
    }
}

/// A per-site complex field `theta_x`, an element of L^1(sigma) on the
/// finite space. `||theta|| = sum_x |theta_x| sigma_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field(pub Vec<Complex64>);

impl Field {
    pub fn zeros(n: usize) -> Self {
        Field(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Field(vec![Complex64::new(value, 0.0); n])
    }

    pub fn from_real(values: &[f64]) -> Self {
        Field(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// `value * 1_support`.
    pub fn indicator(n: usize, support: Configuration, value: f64) -> Self {
        Field((0..n).map(|x| Complex64::new(if support.contains(x) { value } else { 0.0 }, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, site: usize) -> Complex64 {
        self.0[site]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn l1_norm(&self, space: &SiteSpace) -> f64 {
        self.0.iter().zip(space.sigma()).map(|(t, s)| t.norm() * s).sum()
    }

    pub fn add(&self, other: &Field) -> Field {
        Field(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, c: Complex64) -> Field {
        Field(self.0.iter().map(|a| a * c).collect())
    }

    pub(crate) fn check(&self, space: &SiteSpace) -> Result<()> {
        if self.len() != space.len() {
            return Err(Error::domain(format!("field has {} entries but the space has {} sites", self.len(), space.len())));
        }
        if !self.is_finite() {
            return Err(Error::domain("field contains non-finite entries"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_enumerates_every_submask_once() {
        let c = Configuration::from_sites([0, 2, 5]);
        let mut subs: Vec<u64> = c.subsets().map(|s| s.bits()).collect();
        subs.sort();
        assert_eq!(subs, vec![0, 1, 4, 5, 32, 33, 36, 37]);
        assert_eq!(Configuration::EMPTY.subsets().count(), 1);
    }

    #[test]
    fn rejects_bad_sigma_and_duplicate_ids() {
        assert!(SiteSpace::with_sigma(vec![1.0, 0.0]).is_err());
        assert!(SiteSpace::with_sigma(vec![]).is_err());
        let dup = SiteSpace::new(vec!["a".into(), "a".into()], vec![vec![0.0], vec![1.0]], vec![1.0, 1.0]);
        assert!(dup.is_err());
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let space = SiteSpace::lattice_1d(6, 1.0, 0.5).unwrap().with_enumeration_cap(4);
        assert!(matches!(space.check_cap(space.full()), Err(Error::EnumerationCap { size: 6, cap: 4 })));
        assert!(space.check_cap(Configuration::full(4)).is_ok());
    }

    #[test]
    fn lambda_is_product_of_sigmas() {
        let space = SiteSpace::with_sigma(vec![0.5, 2.0, 3.0]).unwrap();
        assert_eq!(space.lambda(Configuration::EMPTY), 1.0);
        assert_eq!(space.lambda(Configuration::from_sites([0, 2])), 1.5);
    }
}
