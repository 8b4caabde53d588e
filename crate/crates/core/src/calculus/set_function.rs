use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::space::{Configuration, SiteSpace};
use crate::{Error, Result};

/// What a table of values over subsets stands for. Operations that accept
/// more than one kind of input dispatch on this tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// A function `G` on finite configurations.
    QuasiObservable,
    /// An observable `F = KG` restricted to subsets of the window.
    Observable,
    /// Probability weights `mu(gamma)`.
    Measure,
    /// Correlation function `k`, a density with respect to Lebesgue–Poisson.
    Correlation,
    /// Taylor coefficients of a functional `L(theta) = sum k(eta) prod theta sigma`.
    Coefficients,
}

/// A dense table of complex values indexed by every subset of a window.
///
/// Entry `i` of [`values`](Self::values) holds the value at the subset whose
/// local bitmask is `i`; bit `j` of the local mask is the `j`-th window site
/// in ascending global order.
#[derive(Debug, Clone)]
pub struct SetFunction {
    space: Arc<SiteSpace>,
    window: Configuration,
    sites: Vec<usize>,
    values: Vec<Complex64>,
    role: Role,
}

impl SetFunction {
    pub fn from_values(space: Arc<SiteSpace>, window: Configuration, role: Role, values: Vec<Complex64>) -> Result<Self> {
        space.check_cap(window)?;
        let sites: Vec<usize> = window.sites().collect();
        if values.len() != 1usize << sites.len() {
            return Err(Error::validation(format!(
                "table over {} sites needs {} entries, got {}",
                sites.len(),
                1usize << sites.len(),
                values.len()
            )));
        }
        Ok(SetFunction { space, window, sites, values, role })
    }

    pub fn zeros(space: Arc<SiteSpace>, window: Configuration, role: Role) -> Result<Self> {
        space.check_cap(window)?;
        let n = window.len();
        Self::from_values(space, window, role, vec![Complex64::new(0.0, 0.0); 1usize << n])
    }

    pub fn from_fn<F>(space: Arc<SiteSpace>, window: Configuration, role: Role, f: F) -> Result<Self>
    where
        F: Fn(Configuration) -> Complex64,
    {
        space.check_cap(window)?;
        let sites: Vec<usize> = window.sites().collect();
        let values = (0..1usize << sites.len()).map(|m| f(expand(&sites, m))).collect();
        Self::from_values(space, window, role, values)
    }

    /// Indicator of the single subset `eta`.
    pub fn indicator(space: Arc<SiteSpace>, window: Configuration, role: Role, eta: Configuration) -> Result<Self> {
        Self::from_fn(space, window, role, |c| Complex64::new(if c == eta { 1.0 } else { 0.0 }, 0.0))
    }

    pub fn space(&self) -> &Arc<SiteSpace> {
        &self.space
    }

    pub fn window(&self) -> Configuration {
        self.window
    }

    /// Global site indices of the window in ascending order.
    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    /// Same window and role, new values.
    pub fn with_values(&self, values: Vec<Complex64>) -> Result<Self> {
        Self::from_values(self.space.clone(), self.window, self.role, values)
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        SetFunction { values: self.values.iter().map(|&v| f(v)).collect(), ..self.clone() }
    }

    /// Local bitmask of `c`, or `None` if `c` is not inside the window.
    pub fn local_index(&self, c: Configuration) -> Option<usize> {
        if !c.is_subset_of(self.window) {
            return None;
        }
        Some(self.sites.iter().enumerate().filter(|(_, &s)| c.contains(s)).fold(0usize, |m, (j, _)| m | (1 << j)))
    }

    pub fn configuration(&self, local: usize) -> Configuration {
        expand(&self.sites, local)
    }

    pub fn get(&self, c: Configuration) -> Result<Complex64> {
        self.local_index(c).map(|i| self.values[i]).ok_or_else(|| Error::domain(format!("configuration {c:?} is outside the window")))
    }

    /// Intensities of the window sites in local order.
    pub fn local_sigma(&self) -> Vec<f64> {
        self.sites.iter().map(|&s| self.space.sigma()[s]).collect()
    }

    /// `lambda(eta) = prod sigma` for every local mask.
    pub fn lambda_table(&self) -> Vec<f64> {
        let sig = self.local_sigma();
        let mut out = vec![1.0; self.values.len()];
        for m in 1..out.len() {
            out[m] = out[m & (m - 1)] * sig[m.trailing_zeros() as usize];
        }
        out
    }

    /// Table restricted to the subsets of `sub`.
    pub fn restrict(&self, sub: Configuration) -> Result<Self> {
        if !sub.is_subset_of(self.window) {
            return Err(Error::domain("restriction window must lie inside the table window"));
        }
        let sites: Vec<usize> = sub.sites().collect();
        let values =
            (0..1usize << sites.len()).map(|m| self.values[self.local_index(expand(&sites, m)).expect("subset of window")]).collect();
        Self::from_values(self.space.clone(), sub, self.role, values)
    }

    pub(crate) fn same_window(&self, other: &SetFunction) -> Result<()> {
        if self.window != other.window || !Arc::ptr_eq(&self.space, &other.space) && *self.space != *other.space {
            return Err(Error::domain("tables live on different windows"));
        }
        Ok(())
    }

    /// Largest absolute entry-wise difference.
    pub fn max_abs_diff(&self, other: &SetFunction) -> Result<f64> {
        self.same_window(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("plain data serializes")
    }

    pub fn to_json_value(&self) -> SetFunctionJson {
        SetFunctionJson {
            window: self.sites.iter().map(|&s| self.space.ids()[s].clone()).collect(),
            role: Some(self.role),
            entries: self
                .values
                .iter()
                .enumerate()
                .filter(|(_, v)| v.re != 0.0 || v.im != 0.0)
                .map(|(m, v)| (m as u64, v.re, v.im))
                .collect(),
        }
    }

    /// Parse the sparse JSON form. Missing entries read as 0; `role` defaults
    /// to `fallback_role` when absent.
    pub fn from_json(text: &str, space: Arc<SiteSpace>, fallback_role: Role) -> Result<Self> {
        let raw: SetFunctionJson = serde_json::from_str(text)?;
        Self::from_json_value(raw, space, fallback_role)
    }

    pub fn from_json_value(raw: SetFunctionJson, space: Arc<SiteSpace>, fallback_role: Role) -> Result<Self> {
        let mut sites = Vec::with_capacity(raw.window.len());
        for id in &raw.window {
            let s = space.index_of(id).ok_or_else(|| Error::validation(format!("unknown site id {id:?} in window")))?;
            sites.push(s);
        }
        if sites.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation("window site ids must be listed in ascending site order without repeats"));
        }
        let window = Configuration::from_sites(sites.iter().copied());
        let mut table = Self::zeros(space, window, raw.role.unwrap_or(fallback_role))?;
        for (mask, re, im) in raw.entries {
            let m = usize::try_from(mask)
                .ok()
                .filter(|&m| m < table.values.len())
                .ok_or_else(|| Error::validation(format!("entry bitmask {mask} exceeds the {}-site window", table.sites.len())))?;
            if !(re.is_finite() && im.is_finite()) {
                return Err(Error::validation(format!("entry {mask} is not finite")));
            }
            table.values[m] += Complex64::new(re, im);
        }
        Ok(table)
    }
}

/// Wire form of a [`SetFunction`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetFunctionJson {
    pub window: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<Role>,
    pub entries: Vec<(u64, f64, f64)>,
}

pub(crate) fn expand(sites: &[usize], local: usize) -> Configuration {
    let mut bits = 0u64;
    let mut m = local;
    while m != 0 {
        let j = m.trailing_zeros() as usize;
        bits |= 1u64 << sites[j];
        m &= m - 1;
    }
    Configuration(bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space() -> Arc<SiteSpace> {
        Arc::new(SiteSpace::with_sigma(vec![0.5, 1.0, 2.0, 0.25]).unwrap())
    }

    #[test]
    fn local_and_global_masks_roundtrip() {
        let sp = space();
        let w = Configuration::from_sites([1, 3]);
        let t = SetFunction::from_fn(sp, w, Role::QuasiObservable, |c| Complex64::new(c.bits() as f64, 0.0)).unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(t.configuration(2), Configuration::single(3));
        assert_eq!(t.get(Configuration::from_sites([1, 3])).unwrap().re, 10.0);
        assert!(t.get(Configuration::single(0)).is_err());
    }

    #[test]
    fn json_roundtrip_is_exact() {
        let sp = space();
        let t = SetFunction::from_fn(sp.clone(), sp.full(), Role::Correlation, |c| {
            Complex64::new((c.bits() as f64).sqrt() / 3.0, if c.len() == 2 { -0.1 } else { 0.0 })
        })
        .unwrap();
        let back = SetFunction::from_json(&t.to_json(), sp, Role::Measure).unwrap();
        assert_eq!(back.role(), Role::Correlation);
        assert_eq!(back.values(), t.values());
    }

    #[test]
    fn json_rejects_out_of_range_mask() {
        let text = r#"{"window":["s0"],"entries":[[2,1.0,0.0]]}"#;
        assert!(SetFunction::from_json(text, space(), Role::Measure).is_err());
        let unknown = r#"{"window":["zz"],"entries":[]}"#;
        assert!(SetFunction::from_json(unknown, space(), Role::Measure).is_err());
    }

    #[test]
    fn restriction_keeps_values() {
        let sp = space();
        let t = SetFunction::from_fn(sp.clone(), sp.full(), Role::Correlation, |c| Complex64::new(c.bits() as f64, 0.0)).unwrap();
        let r = t.restrict(Configuration::from_sites([0, 2])).unwrap();
        assert_eq!(r.values().iter().map(|v| v.re).collect::<Vec<_>>(), vec![0.0, 1.0, 4.0, 5.0]);
    }
}
