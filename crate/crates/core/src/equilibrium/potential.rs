use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A pair energy or an interaction energy, possibly `+inf`.
///
/// Infinite energies are a flag, never an IEEE infinity, so sums and
/// Boltzmann factors stay exact: `exp(-beta * Infinite) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Energy {
    Finite(f64),
    Infinite,
}

impl Energy {
    pub const ZERO: Energy = Energy::Finite(0.0);

    pub fn is_infinite(self) -> bool {
        matches!(self, Energy::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Energy::Finite(v) => Some(v),
            Energy::Infinite => None,
        }
    }

    /// `exp(-beta E)`, exactly 0 for an infinite energy.
    pub fn boltzmann(self, beta: f64) -> f64 {
        match self {
            Energy::Finite(v) => (-beta * v).exp(),
            Energy::Infinite => 0.0,
        }
    }
}

impl std::ops::Add for Energy {
    type Output = Energy;
    fn add(self, rhs: Energy) -> Energy {
        match (self, rhs) {
            (Energy::Finite(a), Energy::Finite(b)) => Energy::Finite(a + b),
            _ => Energy::Infinite,
        }
    }
}

impl std::iter::Sum for Energy {
    fn sum<I: Iterator<Item = Energy>>(iter: I) -> Energy {
        iter.fold(Energy::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Energy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Energy::Finite(v) => write!(f, "{v}"),
            Energy::Infinite => f.write_str("inf"),
        }
    }
}

/// Matrix entries in JSON: a number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixEntry {
    Value(f64),
    Symbol(InfSymbol),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InfSymbol {
    #[serde(rename = "inf")]
    Inf,
}

impl From<MatrixEntry> for Energy {
    fn from(e: MatrixEntry) -> Energy {
        match e {
            MatrixEntry::Value(v) => Energy::Finite(v),
            MatrixEntry::Symbol(InfSymbol::Inf) => Energy::Infinite,
        }
    }
}

impl From<Energy> for MatrixEntry {
    fn from(e: Energy) -> MatrixEntry {
        match e {
            Energy::Finite(v) => MatrixEntry::Value(v),
            Energy::Infinite => MatrixEntry::Symbol(InfSymbol::Inf),
        }
    }
}

/// Shape of a radial potential `V(r)` for `r` below the cutoff; `V = 0`
/// at and beyond the cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RadialForm {
    /// `V = 0`.
    Zero,
    /// `V = +inf` for `r < radius`.
    Hardcore { radius: f64 },
    /// Lennard-Jones `4 eps ((s/r)^12 - (s/r)^6)`, shifted to vanish at the cutoff.
    LjCut { epsilon: f64, sigma: f64 },
    /// `A (exp(-r^2 / 2w^2) - exp(-rc^2 / 2w^2))`.
    Gauss { amplitude: f64, width: f64 },
    /// Piecewise-linear interpolation of `(r, v)` pairs, constant below `r[0]`.
    Table { r: Vec<f64>, v: Vec<f64> },
    /// `A (1 - r^2/rc^2)^p`, `p >= 3` (default 3): vanishes with `p - 1`
    /// derivatives at the cutoff.
    Poly {
        amplitude: f64,
        #[serde(default = "default_power")]
        power: u32,
    },
}

/// Radial pair potential `phi(x, y) = V(|x - y|)` with compact support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialPotential {
    pub form: RadialForm,
    pub cutoff: f64,
}

impl RadialPotential {
    pub fn new(form: RadialForm, cutoff: f64) -> Result<Self> {
        let p = RadialPotential { form, cutoff };
        p.validate()?;
        Ok(p)
    }

    pub fn zero(cutoff: f64) -> Self {
        RadialPotential { form: RadialForm::Zero, cutoff }
    }

    pub fn poly(amplitude: f64, cutoff: f64) -> Result<Self> {
        Self::new(RadialForm::Poly { amplitude, power: 3 }, cutoff)
    }

    /// `A (1 - r^2/rc^2)^power`.
    pub fn poly_power(amplitude: f64, power: u32, cutoff: f64) -> Result<Self> {
        Self::new(RadialForm::Poly { amplitude, power }, cutoff)
    }

    pub fn hardcore(radius: f64) -> Result<Self> {
        Self::new(RadialForm::Hardcore { radius }, radius)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::validation(m.to_string()));
        if !(self.cutoff.is_finite() && self.cutoff > 0.0) {
            return bad("cutoff must be positive and finite");
        }
        match &self.form {
            RadialForm::Zero => {}
            RadialForm::Hardcore { radius } => {
                if !(radius.is_finite() && *radius > 0.0 && *radius <= self.cutoff) {
                    return bad("hardcore radius must lie in (0, cutoff]");
                }
            }
            RadialForm::LjCut { epsilon, sigma } => {
                if !(epsilon.is_finite() && sigma.is_finite() && *sigma > 0.0) {
                    return bad("lj-cut needs finite epsilon and sigma > 0");
                }
            }
            RadialForm::Gauss { amplitude, width } => {
                if !(amplitude.is_finite() && width.is_finite() && *width > 0.0) {
                    return bad("gauss needs finite amplitude and width > 0");
                }
            }
            RadialForm::Table { r, v } => {
                if r.len() < 2 || r.len() != v.len() {
                    return bad("table needs at least two (r, v) pairs of equal length");
                }
                if r[0] < 0.0 || r.windows(2).any(|w| !(w[1] > w[0])) || v.iter().chain(r).any(|x| !x.is_finite()) {
                    return bad("table radii must be non-negative and strictly increasing, values finite");
                }
            }
            RadialForm::Poly { amplitude, power } => {
                if !amplitude.is_finite() {
                    return bad("poly amplitude must be finite");
                }
                if *power < 3 {
                    return bad("poly power must be at least 3");
                }
            }
        }
        Ok(())
    }

    fn lj(epsilon: f64, sigma: f64, r: f64) -> f64 {
        let s6 = (sigma / r).powi(6);
        4.0 * epsilon * (s6 * s6 - s6)
    }

    pub fn value(&self, r: f64) -> Energy {
        let rc = self.cutoff;
        if r >= rc {
            return Energy::ZERO;
        }
        match &self.form {
            RadialForm::Zero => Energy::ZERO,
            RadialForm::Hardcore { radius } => {
                if r < *radius {
                    Energy::Infinite
                } else {
                    Energy::ZERO
                }
            }
            RadialForm::LjCut { epsilon, sigma } => {
                if r <= 0.0 {
                    Energy::Infinite
                } else {
                    Energy::Finite(Self::lj(*epsilon, *sigma, r) - Self::lj(*epsilon, *sigma, rc))
                }
            }
            RadialForm::Gauss { amplitude, width } => {
                let g = |x: f64| (-x * x / (2.0 * width * width)).exp();
                Energy::Finite(amplitude * (g(r) - g(rc)))
            }
            RadialForm::Table { r: rs, v } => Energy::Finite(interpolate(rs, v, r)),
            RadialForm::Poly { amplitude, power } => {
                let u = 1.0 - r * r / (rc * rc);
                Energy::Finite(amplitude * u.powi(*power as i32))
            }
        }
    }

    /// `V'(r)`; `None` where the potential is not differentiable.
    pub fn derivative(&self, r: f64) -> Option<f64> {
        let rc = self.cutoff;
        if r > rc {
            return Some(0.0);
        }
        match &self.form {
            RadialForm::Zero => Some(0.0),
            RadialForm::Hardcore { .. } | RadialForm::Table { .. } => None,
            RadialForm::LjCut { epsilon, sigma } => {
                if r <= 0.0 || r == rc {
                    return None;
                }
                let s6 = (sigma / r).powi(6);
                Some(4.0 * epsilon * (-12.0 * s6 * s6 + 6.0 * s6) / r)
            }
            RadialForm::Gauss { amplitude, width } => {
                if r == rc {
                    return None;
                }
                let w2 = width * width;
                Some(-amplitude * r / w2 * (-r * r / (2.0 * w2)).exp())
            }
            RadialForm::Poly { amplitude, power } => {
                let p = *power as f64;
                let u = 1.0 - r * r / (rc * rc);
                Some(-2.0 * p * amplitude * r / (rc * rc) * u.powi(*power as i32 - 1))
            }
        }
    }

    /// `V''(r)`; `None` where the potential is not twice differentiable.
    pub fn second_derivative(&self, r: f64) -> Option<f64> {
        let rc = self.cutoff;
        if r > rc {
            return Some(0.0);
        }
        match &self.form {
            RadialForm::Zero => Some(0.0),
            RadialForm::Hardcore { .. } | RadialForm::Table { .. } => None,
            RadialForm::LjCut { epsilon, sigma } => {
                if r <= 0.0 || r == rc {
                    return None;
                }
                let s6 = (sigma / r).powi(6);
                Some(4.0 * epsilon * (156.0 * s6 * s6 - 42.0 * s6) / (r * r))
            }
            RadialForm::Gauss { amplitude, width } => {
                if r == rc {
                    return None;
                }
                let w2 = width * width;
                Some(amplitude * (r * r / (w2 * w2) - 1.0 / w2) * (-r * r / (2.0 * w2)).exp())
            }
            RadialForm::Poly { amplitude, power } => {
                let p = *power as f64;
                let rc2 = rc * rc;
                let u = 1.0 - r * r / rc2;
                let k = *power as i32;
                Some(-2.0 * p * amplitude / rc2 * u.powi(k - 1) + 4.0 * p * (p - 1.0) * amplitude * r * r / (rc2 * rc2) * u.powi(k - 2))
            }
        }
    }

    /// `V'(r) / r`, the radial factor of the gradient, finite at `r = 0`
    /// for forms that are smooth there.
    pub fn derivative_over_r(&self, r: f64) -> Option<f64> {
        if r > 0.0 {
            return self.derivative(r).map(|d| d / r);
        }
        match &self.form {
            RadialForm::Zero => Some(0.0),
            RadialForm::Gauss { amplitude, width } => Some(-amplitude / (width * width)),
            RadialForm::Poly { amplitude, power } => Some(-2.0 * *power as f64 * amplitude / (self.cutoff * self.cutoff)),
            _ => None,
        }
    }

    /// `Delta V` in `dim` dimensions: `V'' + (dim - 1) V'/r`.
    pub fn laplacian(&self, r: f64, dim: usize) -> Option<f64> {
        let v2 = self.second_derivative(r)?;
        if dim == 1 {
            return Some(v2);
        }
        Some(v2 + (dim as f64 - 1.0) * self.derivative_over_r(r)?)
    }

    /// True if `V` is twice differentiable on `[0, inf)` away from the
    /// origin, which the dynamics engines require.
    pub fn is_smooth(&self) -> bool {
        !matches!(self.form, RadialForm::Hardcore { .. } | RadialForm::Table { .. })
    }

    /// Mismatch of `V` and `V'` just inside the cutoff, which should vanish
    /// for potentials used in continuous-time dynamics.
    pub fn cutoff_jump(&self) -> (f64, f64) {
        let r = self.cutoff * (1.0 - 1e-12);
        let v = self.value(r).finite().unwrap_or(f64::INFINITY).abs();
        let d = self.derivative(r).map(f64::abs).unwrap_or(f64::INFINITY);
        (v, d)
    }

    /// True if `V` and `V'` both vanish at the cutoff (to `1e-9`), as the
    /// dynamics engines require so that forces have no jump.
    pub fn is_continuous_at_cutoff(&self) -> bool {
        let (v, d) = self.cutoff_jump();
        v <= 1e-9 && d <= 1e-9
    }

    /// Lower bound of `V`, i.e. `-2B` in the semi-boundedness condition.
    pub fn minimum(&self) -> f64 {
        let rc = self.cutoff;
        match &self.form {
            RadialForm::Zero | RadialForm::Hardcore { .. } => 0.0,
            RadialForm::LjCut { epsilon, sigma } => {
                let shift = Self::lj(*epsilon, *sigma, rc);
                let rmin = 2f64.powf(1.0 / 6.0) * sigma;
                let at_min = if rmin < rc { Self::lj(*epsilon, *sigma, rmin) } else { shift };
                (at_min - shift).min(0.0)
            }
            RadialForm::Gauss { amplitude, .. } | RadialForm::Poly { amplitude, .. } => {
                if *amplitude < 0.0 {
                    self.value(0.0).finite().unwrap_or(0.0)
                } else {
                    0.0
                }
            }
            RadialForm::Table { r, v } => {
                let inside = r.iter().zip(v).filter(|(ri, _)| **ri < rc).map(|(_, vi)| *vi);
                inside.fold(0.0, f64::min)
            }
        }
    }
}

fn default_power() -> u32 {
    3
}

fn interpolate(rs: &[f64], vs: &[f64], r: f64) -> f64 {
    if r <= rs[0] {
        return vs[0];
    }
    let last = rs.len() - 1;
    if r >= rs[last] {
        return 0.0;
    }
    let i = rs.partition_point(|&x| x <= r) - 1;
    let t = (r - rs[i]) / (rs[i + 1] - rs[i]);
    vs[i] + t * (vs[i + 1] - vs[i])
}

/// Pair interaction with inverse temperature.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    /// Symmetric `N x N` table over the sites of a space; the diagonal is
    /// ignored in favour of the diagonal Mayer convention.
    Matrix(Vec<Vec<Energy>>),
    Radial(RadialPotential),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairPotential {
    pub kind: PotentialKind,
    pub beta: f64,
}

/// JSON form: `{kind: "radial", V: {form, ...}, beta, cutoff}` or
/// `{kind: "matrix", matrix: [[...]], beta}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PotentialSpec {
    Radial {
        #[serde(rename = "V")]
        v: RadialForm,
        beta: f64,
        cutoff: f64,
    },
    Matrix {
        matrix: Vec<Vec<MatrixEntry>>,
        beta: f64,
    },
}

impl PairPotential {
    pub fn radial(potential: RadialPotential, beta: f64) -> Result<Self> {
        let p = PairPotential { kind: PotentialKind::Radial(potential), beta };
        p.validate()?;
        Ok(p)
    }

    pub fn matrix(matrix: Vec<Vec<Energy>>, beta: f64) -> Result<Self> {
        let p = PairPotential { kind: PotentialKind::Matrix(matrix), beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::validation("beta must be finite and non-negative"));
        }
        match &self.kind {
            PotentialKind::Radial(r) => r.validate(),
            PotentialKind::Matrix(m) => {
                let n = m.len();
                if n == 0 || m.iter().any(|row| row.len() != n) {
                    return Err(Error::validation("pair matrix must be square and non-empty"));
                }
                for i in 0..n {
                    for j in 0..i {
                        if m[i][j] != m[j][i] {
                            return Err(Error::validation(format!("pair matrix is not symmetric at ({i}, {j})")));
                        }
                        if let Energy::Finite(v) = m[i][j] {
                            if !v.is_finite() {
                                return Err(Error::validation("pair matrix entries must be finite or \"inf\""));
                            }
                        }
                    }
                }
                Ok(())
            }
        }
    }

    pub fn radial_part(&self) -> Option<&RadialPotential> {
        match &self.kind {
            PotentialKind::Radial(r) => Some(r),
            PotentialKind::Matrix(_) => None,
        }
    }

    /// Semi-boundedness constant `B >= 0` with `phi >= -2B` off the diagonal.
    pub fn semibound(&self) -> f64 {
        let min = match &self.kind {
            PotentialKind::Radial(r) => r.minimum(),
            PotentialKind::Matrix(m) => {
                let mut lo = 0.0_f64;
                for (i, row) in m.iter().enumerate() {
                    for (j, e) in row.iter().enumerate() {
                        if i != j {
                            if let Energy::Finite(v) = e {
                                lo = lo.min(*v);
                            }
                        }
                    }
                }
                lo
            }
        };
        (-min / 2.0).max(0.0)
    }

    /// True if `phi >= 0` off the diagonal.
    pub fn is_positive(&self) -> bool {
        self.semibound() == 0.0
    }

    pub fn to_spec(&self) -> PotentialSpec {
        match &self.kind {
            PotentialKind::Radial(r) => PotentialSpec::Radial { v: r.form.clone(), beta: self.beta, cutoff: r.cutoff },
            PotentialKind::Matrix(m) => {
                PotentialSpec::Matrix { matrix: m.iter().map(|row| row.iter().map(|&e| e.into()).collect()).collect(), beta: self.beta }
            }
        }
    }

    pub fn from_spec(spec: PotentialSpec) -> Result<Self> {
        match spec {
            PotentialSpec::Radial { v, beta, cutoff } => Self::radial(RadialPotential::new(v, cutoff)?, beta),
            PotentialSpec::Matrix { matrix, beta } => {
                Self::matrix(matrix.into_iter().map(|row| row.into_iter().map(Energy::from).collect()).collect(), beta)
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_spec(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_spec()).expect("plain data serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinite_energy_is_absorbing_and_has_zero_boltzmann_factor() {
        assert!((Energy::Finite(1.0) + Energy::Infinite).is_infinite());
        assert_eq!(Energy::Infinite.boltzmann(0.5), 0.0);
        assert_eq!(Energy::Finite(0.0).boltzmann(3.0), 1.0);
    }

    #[test]
    fn poly_derivatives_match_finite_differences() {
        let p = RadialPotential::poly(2.0, 1.5).unwrap();
        for &r in &[0.1, 0.7, 1.2, 1.49] {
            let h = 1e-5;
            let v = |x: f64| p.value(x).finite().unwrap();
            let fd1 = (v(r + h) - v(r - h)) / (2.0 * h);
            let fd2 = (v(r + h) - 2.0 * v(r) + v(r - h)) / (h * h);
            assert!((fd1 - p.derivative(r).unwrap()).abs() < 1e-8);
            assert!((fd2 - p.second_derivative(r).unwrap()).abs() < 1e-4);
        }
        let (jv, jd) = p.cutoff_jump();
        assert!(jv < 1e-20 && jd < 1e-10);
    }

    #[test]
    fn lj_and_gauss_derivatives_match_finite_differences() {
        let lj = RadialPotential::new(RadialForm::LjCut { epsilon: 1.0, sigma: 1.0 }, 2.5).unwrap();
        let g = RadialPotential::new(RadialForm::Gauss { amplitude: -0.7, width: 0.4 }, 2.0).unwrap();
        for p in [&lj, &g] {
            for &r in &[0.9, 1.1, 1.6] {
                let h = 1e-5;
                let v = |x: f64| p.value(x).finite().unwrap();
                let fd1 = (v(r + h) - v(r - h)) / (2.0 * h);
                let fd2 = (v(r + h) - 2.0 * v(r) + v(r - h)) / (h * h);
                assert!((fd1 - p.derivative(r).unwrap()).abs() < 1e-6 * (1.0 + fd1.abs()));
                assert!((fd2 - p.second_derivative(r).unwrap()).abs() < 1e-3 * (1.0 + fd2.abs()));
            }
        }
        assert!((lj.minimum() - (-1.0 - RadialPotential::lj(1.0, 1.0, 2.5))).abs() < 1e-12);
        assert!((g.minimum() - g.value(0.0).finite().unwrap()).abs() < 1e-15);
    }

    #[test]
    fn table_interpolates_and_vanishes_past_cutoff() {
        let t = RadialPotential::new(RadialForm::Table { r: vec![0.0, 1.0, 2.0], v: vec![4.0, 2.0, 0.0] }, 2.0).unwrap();
        assert_eq!(t.value(0.5), Energy::Finite(3.0));
        assert_eq!(t.value(2.5), Energy::ZERO);
        assert!(!t.is_smooth());
    }

    #[test]
    fn json_roundtrip_and_inf_entries() {
        let text = r#"{"kind":"matrix","matrix":[[0,"inf"],["inf",0]],"beta":1.5}"#;
        let p = PairPotential::from_json(text).unwrap();
        match &p.kind {
            PotentialKind::Matrix(m) => assert!(m[0][1].is_infinite()),
            _ => panic!("expected a matrix"),
        }
        assert_eq!(PairPotential::from_json(&p.to_json()).unwrap(), p);
        let radial = r#"{"kind":"radial","V":{"form":"gauss","amplitude":1.0,"width":0.5},"beta":2.0,"cutoff":2.0}"#;
        let q = PairPotential::from_json(radial).unwrap();
        assert_eq!(PairPotential::from_json(&q.to_json()).unwrap(), q);
    }

    #[test]
    fn asymmetric_matrix_is_rejected() {
        let m = vec![vec![Energy::ZERO, Energy::Finite(1.0)], vec![Energy::Finite(2.0), Energy::ZERO]];
        assert!(PairPotential::matrix(m, 1.0).is_err());
        let bad = r#"{"kind":"radial","V":{"form":"poly","amplitude":1.0,"extra":2},"beta":1.0,"cutoff":1.0}"#;
        assert!(PairPotential::from_json(bad).is_err());
    }
}
