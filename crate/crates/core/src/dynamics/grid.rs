use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Uniform 1-D grid, either periodic on `[origin, origin + len * spacing)`
/// or an interval whose functions vanish outside the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1d {
    pub origin: f64,
    pub spacing: f64,
    pub len: usize,
    pub periodic: bool,
}

impl Grid1d {
    /// `len` points `i * side / len` on a circle of circumference `side`.
    pub fn periodic(side: f64, len: usize) -> Result<Self> {
        let g = Grid1d { origin: 0.0, spacing: side / len as f64, len, periodic: true };
        g.validate()?;
        Ok(g)
    }

    /// `len` points from `a` to `b` inclusive, zero extension outside.
    pub fn interval(a: f64, b: f64, len: usize) -> Result<Self> {
        if len < 2 {
            return Err(Error::validation("an interval grid needs at least two points"));
        }
        let g = Grid1d { origin: a, spacing: (b - a) / (len - 1) as f64, len, periodic: false };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.len < 3 {
            return Err(Error::validation("grid needs at least three points"));
        }
        if !(self.spacing.is_finite() && self.spacing > 0.0 && self.origin.is_finite()) {
            return Err(Error::validation("grid spacing must be positive and finite"));
        }
        Ok(())
    }

    pub fn x(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.spacing
    }

    /// Circumference of a periodic grid.
    pub fn side(&self) -> f64 {
        self.len as f64 * self.spacing
    }

    pub fn neighbor(&self, i: usize, offset: isize) -> Option<usize> {
        let j = i as isize + offset;
        if self.periodic {
            Some(j.rem_euclid(self.len as isize) as usize)
        } else if j < 0 || j >= self.len as isize {
            None
        } else {
            Some(j as usize)
        }
    }

    /// `x_i - x_j`, by minimum image on a periodic grid.
    pub fn separation(&self, i: usize, j: usize) -> f64 {
        let d = (i as f64 - j as f64) * self.spacing;
        if self.periodic {
            let s = self.side();
            d - s * (d / s).round()
        } else {
            d
        }
    }

    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.len).map(|i| f(self.x(i))).collect()
    }

    fn at(&self, f: &[f64], i: usize, offset: isize) -> f64 {
        self.neighbor(i, offset).map_or(0.0, |j| f[j])
    }

    /// Centered first difference.
    pub fn d1(&self, f: &[f64], i: usize) -> f64 {
        (self.at(f, i, 1) - self.at(f, i, -1)) / (2.0 * self.spacing)
    }

    /// Centered second difference.
    pub fn d2(&self, f: &[f64], i: usize) -> f64 {
        (self.at(f, i, 1) - 2.0 * f[i] + self.at(f, i, -1)) / (self.spacing * self.spacing)
    }
}

/// Square table `k(x_i, x_j)` stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTable {
    pub n: usize,
    pub data: Vec<f64>,
}

impl PairTable {
    pub fn zeros(n: usize) -> Self {
        PairTable { n, data: vec![0.0; n * n] }
    }

    pub fn from_fn<F: FnMut(usize, usize) -> f64>(n: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        PairTable { n, data }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    /// Largest `|k(i, j) - k(j, i)|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn at(&self, g: &Grid1d, i: usize, di: isize, j: usize) -> f64 {
        g.neighbor(i, di).map_or(0.0, |a| self.get(a, j))
    }

    /// Centered difference in the first argument.
    pub fn d_first(&self, g: &Grid1d, i: usize, j: usize) -> f64 {
        (self.at(g, i, 1, j) - self.at(g, i, -1, j)) / (2.0 * g.spacing)
    }

    /// Centered second difference in the first argument.
    pub fn dd_first(&self, g: &Grid1d, i: usize, j: usize) -> f64 {
        (self.at(g, i, 1, j) - 2.0 * self.get(i, j) + self.at(g, i, -1, j)) / (g.spacing * g.spacing)
    }

    /// Centered difference in the second argument.
    pub fn d_second(&self, g: &Grid1d, i: usize, j: usize) -> f64 {
        let f = |dj: isize| g.neighbor(j, dj).map_or(0.0, |b| self.get(i, b));
        (f(1) - f(-1)) / (2.0 * g.spacing)
    }

    pub fn dd_second(&self, g: &Grid1d, i: usize, j: usize) -> f64 {
        let f = |dj: isize| g.neighbor(j, dj).map_or(0.0, |b| self.get(i, b));
        (f(1) - 2.0 * self.get(i, j) + f(-1)) / (g.spacing * g.spacing)
    }
}
