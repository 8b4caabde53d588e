use serde::{Deserialize, Serialize};

use super::grid::{Grid1d, PairTable};
use super::tables::{radial_of, PotentialTable};
use crate::equilibrium::PairPotential;
use crate::{par, Error, Result};

/// How `k^(3)` is supplied to the equation for `k^(2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Closure {
    /// `k^(3) = 0`.
    Zero,
    /// `k^(3)(x1, x2, y) = [k2(x1, x2) k1(y) + k2(x1, y) k1(x2) + k2(x2, y) k1(x1)] / 3`.
    Product,
}

/// Correlation functions up to level 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Profile {
    /// `k1(x_i)` and `k2(x_i, x_j)` on the full grid and pair grid.
    Full { k1: Vec<f64>, k2: PairTable },
    /// Constant `k1` and `k2(x, y) = f(x - y)` with `f[o]` at offset `o h`.
    TranslationInvariant { k1: f64, k2: Vec<f64> },
}

impl Profile {
    fn values(&self) -> Box<dyn Iterator<Item = f64> + '_> {
        match self {
            Profile::Full { k1, k2 } => Box::new(k1.iter().chain(&k2.data).copied()),
            Profile::TranslationInvariant { k1, k2 } => Box::new(std::iter::once(*k1).chain(k2.iter().copied())),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn is_finite(&self) -> bool {
        self.values().all(f64::is_finite)
    }

    /// `self + a * other`, for profiles of the same shape.
    fn axpy(&self, a: f64, other: &Profile) -> Profile {
        match (self, other) {
            (Profile::Full { k1, k2 }, Profile::Full { k1: d1, k2: d2 }) => Profile::Full {
                k1: k1.iter().zip(d1).map(|(x, d)| x + a * d).collect(),
                k2: PairTable { n: k2.n, data: k2.data.iter().zip(&d2.data).map(|(x, d)| x + a * d).collect() },
            },
            (Profile::TranslationInvariant { k1, k2 }, Profile::TranslationInvariant { k1: d1, k2: d2 }) => {
                Profile::TranslationInvariant { k1: k1 + a * d1, k2: k2.iter().zip(d2).map(|(x, d)| x + a * d).collect() }
            }
            _ => unreachable!("profiles of different shape"),
        }
    }
}

/// Truncated hierarchy state on a periodic 1-D grid. `k^(0) = 1` is held fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyState {
    pub grid: Grid1d,
    pub t: f64,
    pub k0: f64,
    pub profile: Profile,
    pub closure: Option<Closure>,
}

impl HierarchyState {
    pub fn full(grid: Grid1d, k1: Vec<f64>, k2: PairTable, closure: Option<Closure>) -> Result<Self> {
        let s = HierarchyState { grid, t: 0.0, k0: 1.0, profile: Profile::Full { k1, k2 }, closure };
        s.validate()?;
        Ok(s)
    }

    pub fn translation_invariant(grid: Grid1d, k1: f64, k2: Vec<f64>, closure: Option<Closure>) -> Result<Self> {
        let s = HierarchyState { grid, t: 0.0, k0: 1.0, profile: Profile::TranslationInvariant { k1, k2 }, closure };
        s.validate()?;
        Ok(s)
    }

    /// Poisson initial data `k1 = z`, `k2 = z^2`.
    pub fn poisson(grid: Grid1d, z: f64, translation_invariant: bool, closure: Option<Closure>) -> Result<Self> {
        if translation_invariant {
            Self::translation_invariant(grid, z, vec![z * z; grid.len], closure)
        } else {
            Self::full(grid, vec![z; grid.len], PairTable::from_fn(grid.len, |_, _| z * z), closure)
        }
    }

    /// Independent initial data `k2 = k1 (x) k1`.
    pub fn independent(grid: Grid1d, k1: Vec<f64>, closure: Option<Closure>) -> Result<Self> {
        let k2 = PairTable::from_fn(grid.len, |i, j| k1[i] * k1[j]);
        Self::full(grid, k1, k2, closure)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if !self.grid.periodic {
            return Err(Error::validation("the hierarchy runs on a periodic grid"));
        }
        let n = self.grid.len;
        if !self.profile.is_finite() {
            return Err(Error::validation("correlation functions must be finite"));
        }
        match &self.profile {
            Profile::Full { k1, k2 } => {
                if k1.len() != n || k2.n != n || k2.data.len() != n * n {
                    return Err(Error::validation("profile sizes do not match the grid"));
                }
                if k1.iter().any(|v| *v < 0.0) {
                    return Err(Error::validation("k1 must be non-negative"));
                }
                if k2.asymmetry() != 0.0 {
                    return Err(Error::validation("k2 must be symmetric"));
                }
            }
            Profile::TranslationInvariant { k1, k2 } => {
                if k2.len() != n {
                    return Err(Error::validation("profile sizes do not match the grid"));
                }
                if *k1 < 0.0 {
                    return Err(Error::validation("k1 must be non-negative"));
                }
                if (1..n).any(|o| k2[o] != k2[n - o]) {
                    return Err(Error::validation("k2 must be even in the separation"));
                }
            }
        }
        Ok(())
    }

    pub fn k1(&self, i: usize) -> f64 {
        match &self.profile {
            Profile::Full { k1, .. } => k1[i],
            Profile::TranslationInvariant { k1, .. } => *k1,
        }
    }

    pub fn k2(&self, i: usize, j: usize) -> f64 {
        match &self.profile {
            Profile::Full { k2, .. } => k2.get(i, j),
            Profile::TranslationInvariant { k2, .. } => k2[(i + self.grid.len - j) % self.grid.len],
        }
    }

    /// Full-grid tables, expanding the translation-invariant form.
    pub fn to_tables(&self) -> (Vec<f64>, PairTable) {
        match &self.profile {
            Profile::Full { k1, k2 } => (k1.clone(), k2.clone()),
            Profile::TranslationInvariant { .. } => {
                let n = self.grid.len;
                ((0..n).map(|i| self.k1(i)).collect(), PairTable::from_fn(n, |i, j| self.k2(i, j)))
            }
        }
    }

    /// Mean of `k2(x + r, x)` over reference points `x` and separations `r`
    /// in `[lo, hi)`, interpolating linearly between grid separations. This
    /// is what a binned pair-distance histogram estimates.
    pub fn k2_shell_average(&self, lo: f64, hi: f64) -> f64 {
        const SAMPLES: usize = 400;
        let n = self.grid.len;
        let by_offset: Vec<f64> = match &self.profile {
            Profile::TranslationInvariant { k2, .. } => k2.clone(),
            Profile::Full { k2, .. } => (0..n).map(|o| (0..n).map(|i| k2.get((i + o) % n, i)).sum::<f64>() / n as f64).collect(),
        };
        let total: f64 = (0..SAMPLES)
            .map(|q| {
                let u = (lo + (q as f64 + 0.5) / SAMPLES as f64 * (hi - lo)).abs() / self.grid.spacing;
                let i0 = u.floor() as usize;
                let f = u - i0 as f64;
                (1.0 - f) * by_offset[i0 % n] + f * by_offset[(i0 + 1) % n]
            })
            .sum();
        total / SAMPLES as f64
    }

    /// Largest `|k2(x, y) - k2(y, x)|`.
    pub fn asymmetry(&self) -> f64 {
        match &self.profile {
            Profile::Full { k2, .. } => k2.asymmetry(),
            Profile::TranslationInvariant { k2, .. } => {
                let n = k2.len();
                (1..n).map(|o| (k2[o] - k2[n - o]).abs()).fold(0.0, f64::max)
            }
        }
    }
}

/// `R(i, j) = int grad V(x_i - y) k3(x_i, x_j, y) dy`, either on the full
/// pair grid or, for translation-invariant data, by offset `i - j`.
enum Closed {
    None,
    Full(PairTable),
    Offsets(Vec<f64>),
}

struct Rhs<'a> {
    grid: &'a Grid1d,
    table: PotentialTable,
    beta: f64,
    k1: Vec<f64>,
    k2: PairTable,
    /// `Q(i) = int grad V(x_i - y) k2(x_i, y) dy`.
    q: Vec<f64>,
    closed: Closed,
}

impl<'a> Rhs<'a> {
    fn new(state: &'a HierarchyState, table: PotentialTable, beta: f64, closure: Closure) -> Self {
        let grid = &state.grid;
        let n = grid.len;
        let h = grid.spacing;
        let (k1, k2) = state.to_tables();
        let q = par::map_range(n, |i| {
            h * table
                .ball
                .iter()
                .map(|&o| {
                    let y = table.partner(i, o);
                    table.grad(i, y) * k2.get(i, y)
                })
                .sum::<f64>()
        });
        let r = |i: usize, j: usize| {
            h * table
                .ball
                .iter()
                .map(|&o| {
                    let y = table.partner(i, o);
                    let k3 = (k2.get(i, j) * k1[y] + k2.get(i, y) * k1[j] + k2.get(j, y) * k1[i]) / 3.0;
                    table.grad(i, y) * k3
                })
                .sum::<f64>()
        };
        let closed = match (closure, &state.profile) {
            (Closure::Zero, _) => Closed::None,
            (Closure::Product, Profile::Full { .. }) => {
                let rows = par::map_range(n, |i| (0..n).map(|j| r(i, j)).collect::<Vec<_>>());
                Closed::Full(PairTable { n, data: rows.concat() })
            }
            (Closure::Product, Profile::TranslationInvariant { .. }) => Closed::Offsets(par::map_range(n, |o| r(o, 0))),
        };
        Rhs { grid, table, beta, k1, k2, q, closed }
    }

    fn r(&self, i: usize, j: usize) -> f64 {
        match &self.closed {
            Closed::None => 0.0,
            Closed::Full(t) => t.get(i, j),
            Closed::Offsets(v) => v[(i + self.grid.len - j) % self.grid.len],
        }
    }

    /// `grad V(x_i - x_j) k2(x_i, x_j)`.
    fn flux(&self, i: usize, j: usize) -> f64 {
        self.table.grad(i, j) * self.k2.get(i, j)
    }

    /// Centered difference in the first argument of `f(i, j)`.
    fn d_first(&self, i: usize, j: usize, f: impl Fn(usize, usize) -> f64) -> f64 {
        let g = self.grid;
        let up = g.neighbor(i, 1).expect("periodic grid");
        let down = g.neighbor(i, -1).expect("periodic grid");
        (f(up, j) - f(down, j)) / (2.0 * g.spacing)
    }

    fn level1(&self, i: usize) -> f64 {
        let g = self.grid;
        0.5 * g.d2(&self.k1, i) + 0.5 * self.beta * g.d1(&self.q, i)
    }

    fn level2(&self, i: usize, j: usize) -> f64 {
        let g = self.grid;
        let k2 = &self.k2;
        let diffusion = 0.5 * (k2.dd_first(g, i, j) + k2.dd_second(g, i, j));
        let pair = self.d_first(i, j, |a, b| self.flux(a, b)) + self.d_first(j, i, |a, b| self.flux(a, b));
        let closed = match self.closed {
            Closed::None => 0.0,
            _ => self.d_first(i, j, |a, b| self.r(a, b)) + self.d_first(j, i, |a, b| self.r(a, b)),
        };
        diffusion + 0.5 * self.beta * (pair + closed)
    }
}

/// Time derivative of `(k1, k2)` under the truncated diffusion hierarchy:
///
/// `dk^(n)/dt = 1/2 sum_k Delta_k k^(n) + beta/2 sum_{k != j} [Delta V(x_k - x_j) k^(n)
///   + <grad V(x_k - x_j), grad_k k^(n)>] + beta/2 sum_k int [<grad V(x_k - y), grad_k k^(n+1)>
///   + Delta V(x_k - y) k^(n+1)] dy`,
///
/// with `k^(3)` from the closure. Each interaction pair `Delta V k + <grad V, grad k>`
/// is discretized in divergence form, as a centered difference of
/// `grad V k`; this agrees with the product form to `O(h^2)` and conserves
/// `int dk^(n)` exactly on the periodic grid. Integrals use the trapezoid
/// rule over the cutoff ball. `k^(0)` has zero derivative.
pub fn hierarchy_rhs(state: &HierarchyState, phi: &PairPotential) -> Result<Profile> {
    let closure = state.closure.ok_or_else(|| Error::validation("hierarchy closure is not set"))?;
    let v = radial_of(phi)?;
    let table = PotentialTable::new(&state.grid, v)?;
    let rhs = Rhs::new(state, table, phi.beta, closure);
    Ok(evaluate(&rhs, &state.profile))
}

fn evaluate(rhs: &Rhs, shape: &Profile) -> Profile {
    let n = rhs.grid.len;
    match shape {
        Profile::Full { .. } => {
            let k1 = par::map_range(n, |i| rhs.level1(i));
            // Upper triangle only, mirrored, so symmetry is exact.
            let rows = par::map_range(n, |i| (i..n).map(|j| rhs.level2(i, j)).collect::<Vec<_>>());
            let mut k2 = PairTable::zeros(n);
            for (i, row) in rows.iter().enumerate() {
                for (d, v) in row.iter().enumerate() {
                    k2.set(i, i + d, *v);
                    k2.set(i + d, i, *v);
                }
            }
            Profile::Full { k1, k2 }
        }
        Profile::TranslationInvariant { .. } => {
            let half = par::map_range(n / 2 + 1, |o| rhs.level2(o, 0));
            let k2 = (0..n).map(|o| half[o.min(n - o)]).collect();
            Profile::TranslationInvariant { k1: rhs.level1(0), k2 }
        }
    }
}

/// Fitted constants of the bound `|k| + |grad k| + |Delta k| <= C^|eta| e^{-alpha E(eta)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuelleDiagnostic {
    pub t: f64,
    /// `max (|k1| + |k1'| + |k1''|)`.
    pub level1: f64,
    /// `max (|k2| + |grad k2| + |Delta k2|)` over the pair grid.
    pub level2: f64,
    /// Smallest `C` with `alpha = 0`.
    pub c_alpha0: f64,
    /// `alpha` used for the second fit (the inverse temperature).
    pub alpha: f64,
    pub c_alpha: f64,
}

fn ruelle_diagnostic(state: &HierarchyState, table: &PotentialTable, alpha: f64) -> RuelleDiagnostic {
    let g = &state.grid;
    let (k1, k2) = state.to_tables();
    let n = g.len;
    let level1 = (0..n).map(|i| k1[i].abs() + g.d1(&k1, i).abs() + g.d2(&k1, i).abs()).fold(0.0, f64::max);
    let rows = par::map_range(n, |i| {
        let mut plain = 0.0f64;
        let mut weighted = 0.0f64;
        for j in 0..n {
            let grad = k2.d_first(g, i, j).hypot(k2.d_second(g, i, j));
            let b = k2.get(i, j).abs() + grad + (k2.dd_first(g, i, j) + k2.dd_second(g, i, j)).abs();
            plain = plain.max(b);
            weighted = weighted.max(b * (alpha * table.value(i, j)).exp());
        }
        (plain, weighted)
    });
    let level2 = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let weighted = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    RuelleDiagnostic { t: state.t, level1, level2, c_alpha0: level1.max(level2.sqrt()), alpha, c_alpha: level1.max(weighted.sqrt()) }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveSettings {
    /// Divisor in the step limit `dt <= h^2 / (2 d safety)` with `d = 2`.
    pub safety: f64,
    /// Record every `record_stride` steps; the final state is always kept.
    pub record_stride: usize,
}

impl Default for SolveSettings {
    fn default() -> Self {
        SolveSettings { safety: 1.0, record_stride: 1 }
    }
}

/// Recorded solution of the hierarchy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    pub closure: Closure,
    /// Step actually used, `t_end / steps`.
    pub dt: f64,
    pub states: Vec<HierarchyState>,
    pub ruelle: Vec<RuelleDiagnostic>,
}

impl Timeline {
    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    /// Index of the recorded state at time `t`, to within a tenth of a step.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.states.iter().position(|s| (s.t - t).abs() <= 0.1 * self.dt)
    }

    pub fn at(&self, t: f64) -> Result<&HierarchyState> {
        self.index_of(t).map(|i| &self.states[i]).ok_or_else(|| Error::domain(format!("time {t} is not on the timeline")))
    }

    /// Number of recorded states with `k^(0) != 1`.
    pub fn normalization_violations(&self) -> usize {
        self.states.iter().filter(|s| s.k0 != 1.0).count()
    }

    /// Largest asymmetry of `k2` over all recorded states.
    pub fn max_asymmetry(&self) -> f64 {
        self.states.iter().map(HierarchyState::asymmetry).fold(0.0, f64::max)
    }
}

/// Method-of-lines RK4 solution of the truncated hierarchy on `[0, t_end]`.
pub fn hierarchy_solve(state0: &HierarchyState, phi: &PairPotential, t_end: f64, dt: f64, settings: SolveSettings) -> Result<Timeline> {
    state0.validate()?;
    let closure = state0.closure.ok_or_else(|| Error::validation("hierarchy closure is not set"))?;
    let h = state0.grid.spacing;
    if !(dt > 0.0 && t_end > 0.0) {
        return Err(Error::domain("dt and t_end must be positive"));
    }
    if !(settings.safety >= 1.0) || settings.record_stride == 0 {
        return Err(Error::validation("safety must be at least 1 and record_stride positive"));
    }
    let limit = h * h / (4.0 * settings.safety);
    if dt > limit {
        return Err(Error::validation(format!("dt = {dt} violates the step limit h^2 / (4 safety) = {limit}")));
    }
    let table = PotentialTable::new(&state0.grid, radial_of(phi)?)?;
    let steps = (t_end / dt).ceil() as usize;
    let dt = t_end / steps as f64;

    let mut state = state0.clone();
    let mut timeline = Timeline { closure, dt, states: vec![state.clone()], ruelle: vec![ruelle_diagnostic(&state, &table, phi.beta)] };
    let with = |s: &HierarchyState, p: Profile| HierarchyState { profile: p, ..s.clone() };
    for step in 1..=steps {
        let before = state.profile.max_abs();
        let a = hierarchy_rhs(&state, phi)?;
        let b = hierarchy_rhs(&with(&state, state.profile.axpy(0.5 * dt, &a)), phi)?;
        let c = hierarchy_rhs(&with(&state, state.profile.axpy(0.5 * dt, &b)), phi)?;
        let d = hierarchy_rhs(&with(&state, state.profile.axpy(dt, &c)), phi)?;
        let next = state.profile.axpy(dt / 6.0, &a).axpy(dt / 3.0, &b).axpy(dt / 3.0, &c).axpy(dt / 6.0, &d);
        let t = step as f64 * dt;
        let after = next.max_abs();
        if !next.is_finite() || (before > 0.0 && after > 10.0 * before) {
            return Err(Error::Instability { time: t, detail: format!("norm grew from {before:e} to {after:e} in one step") });
        }
        state.profile = next;
        state.t = t;
        if step % settings.record_stride == 0 || step == steps {
            timeline.ruelle.push(ruelle_diagnostic(&state, &table, phi.beta));
            timeline.states.push(state.clone());
        }
    }
    Ok(timeline)
}
