use serde::{Deserialize, Serialize};

use crate::equilibrium::{Energy, RadialPotential};
use crate::{Error, Result};

/// A periodic cube `[0, side)^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodicBox {
    pub dim: usize,
    pub side: f64,
}

impl PeriodicBox {
    pub fn new(dim: usize, side: f64) -> Result<Self> {
        let b = PeriodicBox { dim, side };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::validation("box dimension must be 1, 2 or 3"));
        }
        if !(self.side.is_finite() && self.side > 0.0) {
            return Err(Error::validation("box side must be positive and finite"));
        }
        Ok(())
    }

    /// Requires `side > 2 cutoff`, so the minimum image is the only image in range.
    pub fn check_cutoff(&self, cutoff: f64) -> Result<()> {
        if self.side <= 2.0 * cutoff {
            return Err(Error::validation(format!("box side {} must exceed twice the cutoff {cutoff}", self.side)));
        }
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim as i32)
    }

    pub fn wrap(&self, x: f64) -> f64 {
        let y = x.rem_euclid(self.side);
        // rem_euclid can return `side` itself for tiny negative inputs.
        if y >= self.side {
            0.0
        } else {
            y
        }
    }

    /// Minimum-image displacement component.
    pub fn min_image(&self, d: f64) -> f64 {
        d - self.side * (d / self.side).round()
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(p, q)| self.min_image(p - q).powi(2)).sum::<f64>().sqrt()
    }

    /// Volume of the shell `lo <= r < hi` in this dimension.
    pub fn shell_volume(&self, lo: f64, hi: f64) -> f64 {
        use std::f64::consts::PI;
        match self.dim {
            1 => 2.0 * (hi - lo),
            2 => PI * (hi * hi - lo * lo),
            _ => 4.0 / 3.0 * PI * (hi.powi(3) - lo.powi(3)),
        }
    }
}

/// Finite point configuration in a periodic box, stored as flat coordinates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParticleState {
    dim: usize,
    coords: Vec<f64>,
}

impl ParticleState {
    pub fn empty(dim: usize) -> Self {
        ParticleState { dim, coords: Vec::new() }
    }

    pub fn from_points(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        let mut s = Self::empty(dim);
        for p in points {
            if p.len() != dim || p.iter().any(|c| !c.is_finite()) {
                return Err(Error::validation(format!("point {p:?} is not a finite {dim}-vector")));
            }
            s.coords.extend_from_slice(p);
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn point_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim.max(1))
    }

    pub fn push(&mut self, p: &[f64]) {
        debug_assert_eq!(p.len(), self.dim);
        self.coords.extend_from_slice(p);
    }

    pub fn swap_remove(&mut self, i: usize) {
        let last = self.len() - 1;
        for c in 0..self.dim {
            self.coords.swap(i * self.dim + c, last * self.dim + c);
        }
        self.coords.truncate(last * self.dim);
    }

    /// `[[x, y, ...], ...]`.
    pub fn to_json(&self) -> String {
        let pts: Vec<&[f64]> = self.points().collect();
        serde_json::to_string(&pts).expect("plain data serializes")
    }

    pub fn from_json(dim: usize, text: &str) -> Result<Self> {
        let pts: Vec<Vec<f64>> = serde_json::from_str(text)?;
        Self::from_points(dim, &pts)
    }

    /// `W({x}, gamma)` against every particle, skipping index `skip`.
    pub fn interaction_with(&self, x: &[f64], skip: Option<usize>, bx: &PeriodicBox, v: &RadialPotential) -> Energy {
        let mut total = Energy::ZERO;
        for (j, p) in self.points().enumerate() {
            if Some(j) == skip {
                continue;
            }
            let r = bx.distance(x, p);
            if r < v.cutoff {
                total = total + v.value(r);
                if total.is_infinite() {
                    return total;
                }
            }
        }
        total
    }

    /// Number of particles inside the axis-aligned region `[lo, hi)` (per coordinate).
    pub fn count_in(&self, lo: &[f64], hi: &[f64]) -> usize {
        self.points().filter(|p| p.iter().zip(lo).zip(hi).all(|((c, l), h)| c >= l && c < h)).count()
    }
}
