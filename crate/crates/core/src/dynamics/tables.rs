use super::grid::Grid1d;
use crate::equilibrium::{PairPotential, RadialPotential};
use crate::{Error, Result};

/// `grad V(x_i - x_j)` and `V(x_i - x_j)` in one dimension, tabulated by
/// grid offset. Construction also checks that `V''` exists on the grid.
#[derive(Debug, Clone)]
pub(crate) struct PotentialTable {
    grid: Grid1d,
    grad: Vec<f64>,
    value: Vec<f64>,
    /// Periodic offsets `o = i - j (mod n)` with separation inside the cutoff.
    pub ball: Vec<usize>,
}

pub(crate) fn radial_of(phi: &PairPotential) -> Result<&RadialPotential> {
    let v = phi.radial_part().ok_or_else(|| Error::validation("dynamics needs a radial potential"))?;
    if !v.is_smooth() {
        return Err(Error::validation("dynamics needs a potential that is twice differentiable away from the origin"));
    }
    if !v.is_continuous_at_cutoff() {
        return Err(Error::validation("dynamics needs V and V' to vanish at the cutoff (use the poly form)"));
    }
    Ok(v)
}

impl PotentialTable {
    pub fn new(grid: &Grid1d, v: &RadialPotential) -> Result<Self> {
        let n = grid.len;
        let size = if grid.periodic { n } else { 2 * n - 1 };
        if grid.periodic && v.cutoff > grid.side() / 2.0 {
            return Err(Error::validation("periodic grid must be longer than twice the potential cutoff"));
        }
        let mut grad = vec![0.0; size];
        let mut value = vec![0.0; size];
        let mut ball = Vec::new();
        for o in 0..size {
            let d = if grid.periodic { grid.separation(o, 0) } else { (o as f64 - (n - 1) as f64) * grid.spacing };
            let r = d.abs();
            if r >= v.cutoff {
                continue;
            }
            if grid.periodic {
                ball.push(o);
            }
            // The origin is only reached on the diagonal, where smooth radial
            // potentials have zero gradient.
            let dv = if r == 0.0 { v.derivative_over_r(0.0).map(|_| 0.0) } else { v.derivative(r) };
            let dv = dv.ok_or_else(|| Error::validation(format!("potential is not differentiable at r = {r}")))?;
            if v.second_derivative(r).is_none() {
                return Err(Error::validation(format!("potential is not twice differentiable at r = {r}")));
            }
            grad[o] = dv * d.signum();
            value[o] = v.value(r).finite().ok_or_else(|| Error::validation("potential must be finite for dynamics"))?;
        }
        Ok(PotentialTable { grid: *grid, grad, value, ball })
    }

    fn offset(&self, i: usize, j: usize) -> usize {
        let n = self.grid.len;
        if self.grid.periodic {
            (i + n - j) % n
        } else {
            i + n - 1 - j
        }
    }

    pub fn grad(&self, i: usize, j: usize) -> f64 {
        self.grad[self.offset(i, j)]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.value[self.offset(i, j)]
    }

    /// Grid index `j` with `i - j = o (mod n)`.
    pub fn partner(&self, i: usize, o: usize) -> usize {
        let n = self.grid.len;
        (i + n - o) % n
    }
}
