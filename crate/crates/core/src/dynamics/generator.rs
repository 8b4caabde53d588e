use serde::{Deserialize, Serialize};

use super::grid::{Grid1d, PairTable};
use super::tables::{radial_of, PotentialTable};
use crate::equilibrium::PairPotential;
use crate::{Error, Result};

/// Quasi-observable truncated to levels 0, 1 and 2 on a 1-D grid.
///
/// Level 2 is symmetric and vanishes within `epsilon` of the diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiObservableGrid {
    pub grid: Grid1d,
    pub g0: f64,
    pub g1: Vec<f64>,
    pub g2: PairTable,
    pub epsilon: f64,
}

impl QuasiObservableGrid {
    pub fn new(grid: Grid1d, g0: f64, g1: Vec<f64>, g2: PairTable, epsilon: f64) -> Result<Self> {
        let q = QuasiObservableGrid { grid, g0, g1, g2, epsilon };
        q.validate()?;
        Ok(q)
    }

    pub fn zeros(grid: Grid1d, epsilon: f64) -> Self {
        QuasiObservableGrid { grid, g0: 0.0, g1: vec![0.0; grid.len], g2: PairTable::zeros(grid.len), epsilon }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        let n = self.grid.len;
        if self.g1.len() != n || self.g2.n != n || self.g2.data.len() != n * n {
            return Err(Error::validation("level sizes do not match the grid"));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::validation("exclusion radius must be non-negative"));
        }
        if !self.g0.is_finite() || self.g1.iter().chain(&self.g2.data).any(|v| !v.is_finite()) {
            return Err(Error::validation("quasi-observable values must be finite"));
        }
        for i in 0..n {
            for j in 0..=i {
                if self.g2.get(i, j) != self.g2.get(j, i) {
                    return Err(Error::validation(format!("level 2 is not symmetric at ({i}, {j})")));
                }
                if self.grid.separation(i, j).abs() <= self.epsilon && self.g2.get(i, j) != 0.0 {
                    return Err(Error::validation(format!(
                        "level 2 must vanish within {} of the diagonal, nonzero at ({i}, {j})",
                        self.epsilon
                    )));
                }
            }
        }
        Ok(())
    }

    /// Max-abs of each level.
    pub fn level_norms(&self) -> [f64; 3] {
        [self.g0.abs(), self.g1.iter().fold(0.0, |m, v| m.max(v.abs())), self.g2.max_abs()]
    }
}

/// The quasi-observable generator `H^ = K^{-1} H K` on levels 0 to 2, with
/// centered differences:
///
/// `(H^G)(eta) = -1/2 Delta G(eta) + beta/2 sum_{x in eta} sum_{y in eta\x}
///   [<grad V(x-y), grad_x G(eta)> + <grad V(x-y), grad_x G(eta\y)>]`.
///
/// Output level `n` reads only input levels `n` and `n - 1`. The diagonal of
/// the output level 2 is not a configuration and is set to zero.
pub fn apply_h_hat(g: &QuasiObservableGrid, phi: &PairPotential) -> Result<QuasiObservableGrid> {
    g.validate()?;
    let v = radial_of(phi)?;
    let table = PotentialTable::new(&g.grid, v)?;
    let beta = phi.beta;
    let grid = &g.grid;
    let n = grid.len;

    let g1: Vec<f64> = (0..n).map(|i| -0.5 * grid.d2(&g.g1, i)).collect();
    let g1_grad: Vec<f64> = (0..n).map(|i| grid.d1(&g.g1, i)).collect();
    let mut g2 = PairTable::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let lap = g.g2.dd_first(grid, i, j) + g.g2.dd_second(grid, i, j);
            let vij = table.grad(i, j);
            let vji = table.grad(j, i);
            let drift = vij * g.g2.d_first(grid, i, j) + vji * g.g2.d_second(grid, i, j) + vij * g1_grad[i] + vji * g1_grad[j];
            let out = -0.5 * lap + 0.5 * beta * drift;
            g2.set(i, j, out);
            g2.set(j, i, out);
        }
    }
    Ok(QuasiObservableGrid { grid: *grid, g0: 0.0, g1, g2, epsilon: 0.0 })
}
