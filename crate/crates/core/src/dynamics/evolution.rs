use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::hierarchy::{HierarchyState, Timeline};
use super::tables::{radial_of, PotentialTable};
use crate::equilibrium::PairPotential;
use crate::{Error, Result};

/// A smooth test field with analytic first and second derivatives.
pub trait TestField: Sync {
    fn value(&self, x: f64) -> f64;
    fn d1(&self, x: f64) -> f64;
    fn d2(&self, x: f64) -> f64;
}

/// `amplitude * exp(-1 / (1 - s^2))` with `s = (x - center) / width`, zero
/// for `|s| >= 1`. On a circle of circumference `period`, `x - center` is
/// taken by minimum image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
    pub period: Option<f64>,
}

impl Bump {
    fn s(&self, x: f64) -> f64 {
        let mut d = x - self.center;
        if let Some(p) = self.period {
            d -= p * (d / p).round();
        }
        d / self.width
    }

    /// `(f, g', g'')` with `f = A e^g`, or `None` outside the support.
    fn parts(&self, x: f64) -> Option<(f64, f64, f64)> {
        let s = self.s(x);
        let q = 1.0 - s * s;
        if q <= 0.0 {
            return None;
        }
        let f = self.amplitude * (-1.0 / q).exp();
        let w = self.width;
        let g1 = -2.0 * s / (q * q * w);
        let g2 = -(2.0 + 6.0 * s * s) / (w * w * q * q * q);
        Some((f, g1, g2))
    }
}

impl TestField for Bump {
    fn value(&self, x: f64) -> f64 {
        self.parts(x).map_or(0.0, |p| p.0)
    }

    fn d1(&self, x: f64) -> f64 {
        self.parts(x).map_or(0.0, |(f, g1, _)| f * g1)
    }

    fn d2(&self, x: f64) -> f64 {
        self.parts(x).map_or(0.0, |(f, g1, g2)| f * (g1 * g1 + g2))
    }
}

/// The zero field.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroField;

impl TestField for ZeroField {
    fn value(&self, _: f64) -> f64 {
        0.0
    }
    fn d1(&self, _: f64) -> f64 {
        0.0
    }
    fn d2(&self, _: f64) -> f64 {
        0.0
    }
}

/// `theta = e^phi - 1`, with derivatives by the chain rule.
#[derive(Debug, Clone, Copy)]
pub struct ExpMinusOne<F>(pub F);

impl<F: TestField> TestField for ExpMinusOne<F> {
    fn value(&self, x: f64) -> f64 {
        self.0.value(x).exp_m1()
    }
    fn d1(&self, x: f64) -> f64 {
        self.0.value(x).exp() * self.0.d1(x)
    }
    fn d2(&self, x: f64) -> f64 {
        let d = self.0.d1(x);
        self.0.value(x).exp() * (self.0.d2(x) + d * d)
    }
}

/// Truncated Bogoliubov functional `L(theta) = k0 + int k1 theta + 1/2 iint k2 theta theta`,
/// by the periodic trapezoid rule.
pub fn truncated_functional<F: TestField + ?Sized>(state: &HierarchyState, theta: &F) -> f64 {
    let g = &state.grid;
    let th = g.sample(|x| theta.value(x));
    functional_on_values(state, &th.iter().map(|v| Complex64::new(*v, 0.0)).collect::<Vec<_>>()).re
}

fn functional_on_values(state: &HierarchyState, theta: &[Complex64]) -> Complex64 {
    let g = &state.grid;
    let h = g.spacing;
    let n = g.len;
    let mut one = Complex64::new(0.0, 0.0);
    let mut two = Complex64::new(0.0, 0.0);
    for i in 0..n {
        one += state.k1(i) * theta[i];
        let mut row = Complex64::new(0.0, 0.0);
        for j in 0..n {
            row += state.k2(i, j) * theta[j];
        }
        two += theta[i] * row;
    }
    state.k0 + h * one + 0.5 * h * h * two
}

/// `delta L / delta theta (x_i) = k1(x_i) + int k2(x_i, y) theta(y) dy` for the truncated functional.
pub fn first_variation(state: &HierarchyState, theta: &[f64]) -> Vec<f64> {
    let g = &state.grid;
    (0..g.len).map(|i| state.k1(i) + g.spacing * (0..g.len).map(|j| state.k2(i, j) * theta[j]).sum::<f64>()).collect()
}

/// Both sides of an evolution identity at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionResidual {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs| / max(|lhs|, |rhs|, floor)`.
    pub relative: f64,
}

/// Floor of the residual denominator.
pub const RESIDUAL_FLOOR: f64 = 1e-12;

impl EvolutionResidual {
    fn new(t: f64, lhs: f64, rhs: f64) -> Self {
        let scale = lhs.abs().max(rhs.abs()).max(RESIDUAL_FLOOR);
        EvolutionResidual { t, lhs, rhs, relative: (lhs - rhs).abs() / scale }
    }
}

fn centered_index(timeline: &Timeline, t: f64) -> Result<usize> {
    let i = timeline.index_of(t).ok_or_else(|| Error::domain(format!("time {t} is not on the timeline")))?;
    if i == 0 || i + 1 >= timeline.states.len() {
        return Err(Error::domain(format!("time {t} is at the timeline boundary")));
    }
    Ok(i)
}

/// `dL/dt` by a centered difference of recorded states.
fn time_derivative(timeline: &Timeline, i: usize, value: impl Fn(&HierarchyState) -> f64) -> f64 {
    let (a, b) = (&timeline.states[i - 1], &timeline.states[i + 1]);
    (value(b) - value(a)) / (b.t - a.t)
}

/// Sampled field, first and second derivatives on the grid.
fn sample3<F: TestField + ?Sized>(state: &HierarchyState, f: &F) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let g = &state.grid;
    (g.sample(|x| f.value(x)), g.sample(|x| f.d1(x)), g.sample(|x| f.d2(x)))
}

/// Residual of the functional evolution equation
///
/// `dL_t(theta)/dt = 1/2 int Delta theta(x) dL/dtheta(x) dx
///   - beta/4 iint <grad V(x - y), grad theta(x)(theta(y) + 1) - grad theta(y)(theta(x) + 1)> d2L/dtheta(x)dtheta(y)`
///
/// on the truncated representation carried by the timeline (`k^(3)` treated
/// as zero in the variational derivatives).
pub fn functional_evolution_residual<F: TestField + ?Sized>(
    timeline: &Timeline,
    phi: &PairPotential,
    theta: &F,
    t: f64,
) -> Result<EvolutionResidual> {
    let i = centered_index(timeline, t)?;
    let state = &timeline.states[i];
    let table = PotentialTable::new(&state.grid, radial_of(phi)?)?;
    let lhs = time_derivative(timeline, i, |s| truncated_functional(s, theta));

    let g = &state.grid;
    let h = g.spacing;
    let (th, dth, ddth) = sample3(state, theta);
    let first = first_variation(state, &th);
    let diffusion: f64 = 0.5 * h * (0..g.len).map(|x| ddth[x] * first[x]).sum::<f64>();
    let mut interaction = 0.0;
    for x in 0..g.len {
        for &o in &table.ball {
            let y = table.partner(x, o);
            let bracket = dth[x] * (th[y] + 1.0) - dth[y] * (th[x] + 1.0);
            interaction += table.grad(x, y) * bracket * state.k2(x, y);
        }
    }
    let rhs = diffusion - 0.25 * phi.beta * h * h * interaction;
    Ok(EvolutionResidual::new(state.t, lhs, rhs))
}

/// Residual of the Laplace-transform (Hopf) form
///
/// `dL_t(phi)/dt = 1/2 int (Delta phi + |grad phi|^2) dL/dphi dx
///   - beta/4 iint <grad V(x - y), grad phi(x) - grad phi(y)> d2L/dphi(x)dphi(y)`
///
/// where `L_t(phi) = L_t(e^phi - 1)`, `dL/dphi = e^phi dL/dtheta` and
/// `d2L/dphi dphi = e^{phi(x) + phi(y)} d2L/dtheta dtheta`.
pub fn hopf_residual<F: TestField + ?Sized>(timeline: &Timeline, phi: &PairPotential, field: &F, t: f64) -> Result<EvolutionResidual> {
    let i = centered_index(timeline, t)?;
    let state = &timeline.states[i];
    let table = PotentialTable::new(&state.grid, radial_of(phi)?)?;
    let theta_of = |s: &HierarchyState| {
        let th: Vec<f64> = s.grid.sample(|x| field.value(x).exp_m1());
        functional_on_values(s, &th.iter().map(|v| Complex64::new(*v, 0.0)).collect::<Vec<_>>()).re
    };
    let lhs = time_derivative(timeline, i, theta_of);

    let g = &state.grid;
    let h = g.spacing;
    let (f, df, ddf) = sample3(state, field);
    let ef: Vec<f64> = f.iter().map(|v| v.exp()).collect();
    let th: Vec<f64> = f.iter().map(|v| v.exp_m1()).collect();
    let first = first_variation(state, &th);
    let diffusion: f64 = 0.5 * h * (0..g.len).map(|x| (ddf[x] + df[x] * df[x]) * ef[x] * first[x]).sum::<f64>();
    let mut interaction = 0.0;
    for x in 0..g.len {
        for &o in &table.ball {
            let y = table.partner(x, o);
            interaction += table.grad(x, y) * (df[x] - df[y]) * ef[x] * ef[y] * state.k2(x, y);
        }
    }
    let rhs = diffusion - 0.25 * phi.beta * h * h * interaction;
    Ok(EvolutionResidual::new(state.t, lhs, rhs))
}

/// Largest relative gap between `dL/dphi(x_i)`, taken directly by a complex
/// step on the discretized `L(e^phi - 1)`, and `e^{phi(x_i)} dL/dtheta(x_i)`.
pub fn chain_rule_check<F: TestField + ?Sized>(state: &HierarchyState, field: &F) -> f64 {
    let g = &state.grid;
    let f = g.sample(|x| field.value(x));
    let th: Vec<f64> = f.iter().map(|v| v.exp_m1()).collect();
    let via = first_variation(state, &th);
    let step = 1e-30;
    let mut worst = 0.0f64;
    for i in 0..g.len {
        let shifted: Vec<Complex64> = f
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let p = if i == j { Complex64::new(*v, step) } else { Complex64::new(*v, 0.0) };
                p.exp() - 1.0
            })
            .collect();
        let direct = functional_on_values(state, &shifted).im / step / g.spacing;
        let chain = f[i].exp() * via[i];
        let scale = direct.abs().max(chain.abs()).max(RESIDUAL_FLOOR);
        worst = worst.max((direct - chain).abs() / scale);
    }
    worst
}
