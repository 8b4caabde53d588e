use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::equilibrium::RadialPotential;
use crate::gcmc::{estimate_correlations, Bins, CorrelationEstimate, ParticleState, PeriodicBox};
use crate::rng::{self, StreamRng};
use crate::stats::{batch_means, Estimate, MIN_BATCHES};
use crate::{par, Error, Result};

/// Initial point configuration of each replica.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitRule {
    /// Poisson process of intensity `z`.
    Poisson { z: f64 },
    /// Inhomogeneous Poisson process of intensity
    /// `z (1 + amplitude cos(2 pi mode x_0 / side))`, by thinning.
    Cosine { z: f64, amplitude: f64, mode: u32 },
    /// The same points in every replica.
    Fixed { points: Vec<Vec<f64>> },
}

impl InitRule {
    /// Intensity `k1(0, x)` of the initial configuration, where defined.
    pub fn intensity(&self, x0: f64, side: f64) -> Option<f64> {
        match self {
            InitRule::Poisson { z } => Some(*z),
            InitRule::Cosine { z, amplitude, mode } => {
                Some(z * (1.0 + amplitude * (std::f64::consts::TAU * *mode as f64 * x0 / side).cos()))
            }
            InitRule::Fixed { .. } => None,
        }
    }
}

/// Interacting Brownian particles `dx = -(beta/2) sum grad V dt + dW` in a periodic box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdeConfig {
    pub sim_box: PeriodicBox,
    pub init: InitRule,
    pub beta: f64,
    pub potential: RadialPotential,
    pub dt: f64,
    pub t_end: f64,
    pub n_replicas: usize,
    /// Largest magnitude allowed for a single pair gradient `|grad V|`.
    pub force_cap: f64,
    /// Brownian noise on or off; off gives the deterministic gradient flow.
    #[serde(default = "yes")]
    pub noise: bool,
    /// Times at which configurations are recorded; each must be a multiple of `dt`.
    pub record_times: Vec<f64>,
    pub seed: u64,
}

fn yes() -> bool {
    true
}

impl SdeConfig {
    pub fn validate(&self) -> Result<()> {
        self.sim_box.validate()?;
        self.potential.validate()?;
        self.sim_box.check_cutoff(self.potential.cutoff)?;
        if !self.potential.is_smooth() {
            return Err(Error::validation("the SDE needs a potential differentiable away from the origin"));
        }
        if !self.potential.is_continuous_at_cutoff() {
            return Err(Error::validation("the SDE needs V and V' to vanish at the cutoff (use the poly form)"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::validation("dt must be positive"));
        }
        if !(self.force_cap.is_finite() && self.force_cap > 0.0) {
            return Err(Error::validation("force_cap must be positive"));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::validation("t_end must be positive"));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::validation("beta must be finite and non-negative"));
        }
        if self.n_replicas == 0 {
            return Err(Error::validation("n_replicas must be positive"));
        }
        for &t in &self.record_times {
            if !(0.0..=self.t_end * (1.0 + 1e-12)).contains(&t) {
                return Err(Error::validation(format!("record time {t} lies outside [0, t_end]")));
            }
            let steps = (t / self.dt).round();
            if (steps * self.dt - t).abs() > 1e-9 * t.max(self.dt) {
                return Err(Error::validation(format!("record time {t} is not a multiple of dt = {}", self.dt)));
            }
        }
        match &self.init {
            InitRule::Poisson { z } if !(z.is_finite() && *z > 0.0) => {
                return Err(Error::validation("Poisson intensity must be positive"));
            }
            InitRule::Cosine { z, amplitude, .. } if !(z.is_finite() && *z > 0.0 && amplitude.abs() <= 1.0) => {
                return Err(Error::validation("cosine profile needs z > 0 and |amplitude| <= 1"));
            }
            InitRule::Fixed { points } => {
                ParticleState::from_points(self.sim_box.dim, points)?;
            }
            _ => {}
        }
        Ok(())
    }

    fn steps_to(&self, t: f64) -> usize {
        (t / self.dt).round() as usize
    }
}

/// Recorded configurations of one replica.
#[derive(Debug, Clone, PartialEq)]
pub struct Replica {
    /// Wrapped positions at each record time.
    pub snapshots: Vec<ParticleState>,
    /// Unwrapped displacement from the initial position, flat per snapshot.
    pub displacements: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdeOutput {
    pub sim_box: PeriodicBox,
    pub times: Vec<f64>,
    pub replicas: Vec<Replica>,
}

impl SdeOutput {
    pub fn time_index(&self, t: f64) -> Result<usize> {
        self.times
            .iter()
            .position(|s| (s - t).abs() <= 1e-9 * t.abs().max(1.0))
            .ok_or_else(|| Error::domain(format!("time {t} was not recorded")))
    }

    pub fn snapshots_at(&self, t: f64) -> Result<Vec<ParticleState>> {
        let k = self.time_index(t)?;
        Ok(self.replicas.iter().map(|r| r.snapshots[k].clone()).collect())
    }
}

fn sample_initial(cfg: &SdeConfig, rng: &mut StreamRng) -> Result<ParticleState> {
    let bx = cfg.sim_box;
    let uniform_point = |rng: &mut StreamRng| -> Vec<f64> { (0..bx.dim).map(|_| rng.random::<f64>() * bx.side).collect() };
    let state = match &cfg.init {
        InitRule::Fixed { points } => ParticleState::from_points(bx.dim, points)?,
        InitRule::Poisson { z } => {
            let n = draw_poisson(z * bx.volume(), rng)?;
            let pts: Vec<Vec<f64>> = (0..n).map(|_| uniform_point(rng)).collect();
            ParticleState::from_points(bx.dim, &pts)?
        }
        InitRule::Cosine { z, amplitude, .. } => {
            let peak = z * (1.0 + amplitude.abs());
            let n = draw_poisson(peak * bx.volume(), rng)?;
            let mut pts = Vec::with_capacity(n);
            for _ in 0..n {
                let p = uniform_point(rng);
                let keep = rng.random::<f64>() * peak;
                if keep < cfg.init.intensity(p[0], bx.side).unwrap_or(0.0) {
                    pts.push(p);
                }
            }
            ParticleState::from_points(bx.dim, &pts)?
        }
    };
    for i in 0..state.len() {
        for j in 0..i {
            let r = bx.distance(state.point(i), state.point(j));
            if r == 0.0 || cfg.potential.value(r).is_infinite() {
                return Err(Error::validation(format!("initial points {j} and {i} overlap")));
            }
        }
    }
    Ok(state)
}

fn draw_poisson(mean: f64, rng: &mut StreamRng) -> Result<usize> {
    let d = Poisson::new(mean).map_err(|e| Error::domain(format!("Poisson mean {mean}: {e}")))?;
    Ok(d.sample(rng) as usize)
}

/// Per-particle drift `-(beta/2) sum_j grad V(x_i - x_j)`, each pair
/// gradient clipped to `force_cap` in magnitude.
pub fn drift(state: &ParticleState, bx: &PeriodicBox, v: &RadialPotential, beta: f64, force_cap: f64) -> Vec<f64> {
    let dim = bx.dim;
    let mut out = vec![0.0; state.len() * dim];
    let mut d = vec![0.0; dim];
    for i in 0..state.len() {
        for j in 0..i {
            for (c, dc) in d.iter_mut().enumerate() {
                *dc = bx.min_image(state.point(i)[c] - state.point(j)[c]);
            }
            let r = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            if r >= v.cutoff {
                continue;
            }
            let Some(scale) = v.derivative_over_r(r) else { continue };
            let mut factor = scale;
            let magnitude = (scale * r).abs();
            if magnitude > force_cap {
                factor *= force_cap / magnitude;
            }
            for c in 0..dim {
                let g = factor * d[c];
                out[i * dim + c] -= 0.5 * beta * g;
                out[j * dim + c] += 0.5 * beta * g;
            }
        }
    }
    out
}

fn run_replica(cfg: &SdeConfig, id: u64, record_steps: &[usize]) -> Result<Replica> {
    let bx = cfg.sim_box;
    let dim = bx.dim;
    let mut rng = rng::stream(cfg.seed, id);
    let mut state = sample_initial(cfg, &mut rng)?;
    let n = state.len();
    let mut unwrapped = vec![0.0; n * dim];
    let mut replica = Replica { snapshots: Vec::new(), displacements: Vec::new() };
    let total = record_steps.iter().copied().max().unwrap_or(0).max(cfg.steps_to(cfg.t_end));
    let sqrt_dt = cfg.dt.sqrt();
    let mut next_record = 0;
    let mut record = |step: usize, state: &ParticleState, unwrapped: &[f64], replica: &mut Replica| {
        while next_record < record_steps.len() && record_steps[next_record] == step {
            replica.snapshots.push(state.clone());
            replica.displacements.push(unwrapped.to_vec());
            next_record += 1;
        }
    };
    record(0, &state, &unwrapped, &mut replica);
    for step in 1..=total {
        let mut delta = drift(&state, &bx, &cfg.potential, cfg.beta, cfg.force_cap);
        for dx in &mut delta {
            *dx *= cfg.dt;
            if cfg.noise {
                let xi: f64 = StandardNormal.sample(&mut rng);
                *dx += sqrt_dt * xi;
            }
        }
        for i in 0..n {
            let step_len = delta[i * dim..(i + 1) * dim].iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(step_len <= bx.side / 2.0) {
                return Err(Error::Instability {
                    time: step as f64 * cfg.dt,
                    detail: format!("replica {id}, particle {i} moved {step_len:e} in one step (half side {})", bx.side / 2.0),
                });
            }
            let p = state.point_mut(i);
            for c in 0..dim {
                p[c] = bx.wrap(p[c] + delta[i * dim + c]);
                unwrapped[i * dim + c] += delta[i * dim + c];
            }
        }
        record(step, &state, &unwrapped, &mut replica);
    }
    Ok(replica)
}

/// Euler-Maruyama simulation of `n_replicas` independent replicas, replica
/// `r` on stream `r`, run in parallel.
pub fn simulate_sde(cfg: &SdeConfig) -> Result<SdeOutput> {
    cfg.validate()?;
    let mut times = cfg.record_times.clone();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let steps: Vec<usize> = times.iter().map(|&t| cfg.steps_to(t)).collect();
    let replicas: Result<Vec<Replica>> = par::map_range(cfg.n_replicas, |r| run_replica(cfg, r as u64, &steps)).into_iter().collect();
    Ok(SdeOutput { sim_box: cfg.sim_box, times, replicas: replicas? })
}

/// Minimum number of replicas for empirical correlation estimates.
pub const MIN_REPLICAS: usize = 100;

fn check_replicas(out: &SdeOutput) -> Result<()> {
    if out.replicas.len() < MIN_REPLICAS {
        return Err(Error::InsufficientSamples { needed: MIN_REPLICAS, got: out.replicas.len() });
    }
    Ok(())
}

/// `k1` and binned `k2`, `g` across replicas at time `t`.
pub fn empirical_correlations(out: &SdeOutput, t: f64, bins: Bins) -> Result<CorrelationEstimate> {
    check_replicas(out)?;
    estimate_correlations(&out.snapshots_at(t)?, &out.sim_box, bins)
}

/// One bin of a density profile along the first coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityBin {
    pub lo: f64,
    pub hi: f64,
    pub k1: Estimate,
}

/// `k1(t, x_0)` on `n_bins` equal slabs along the first coordinate.
pub fn density_profile(out: &SdeOutput, t: f64, n_bins: usize) -> Result<Vec<DensityBin>> {
    check_replicas(out)?;
    if n_bins == 0 {
        return Err(Error::validation("need at least one bin"));
    }
    let bx = out.sim_box;
    let width = bx.side / n_bins as f64;
    let slab = width * bx.side.powi(bx.dim as i32 - 1);
    let snaps = out.snapshots_at(t)?;
    let counts: Vec<Vec<f64>> = snaps
        .iter()
        .map(|s| {
            let mut c = vec![0.0; n_bins];
            for p in s.points() {
                c[((p[0] / width) as usize).min(n_bins - 1)] += 1.0 / slab;
            }
            c
        })
        .collect();
    Ok((0..n_bins)
        .map(|b| {
            let v: Vec<f64> = counts.iter().map(|c| c[b]).collect();
            DensityBin { lo: b as f64 * width, hi: (b + 1) as f64 * width, k1: batch_means(&v, v.len()) }
        })
        .collect())
}

/// Mean squared unwrapped displacement per coordinate at time `t`, averaged
/// over particles within a replica, then averaged over replicas.
pub fn displacement_variance(out: &SdeOutput, t: f64) -> Result<Estimate> {
    let k = out.time_index(t)?;
    let per_replica: Vec<f64> = out
        .replicas
        .iter()
        .filter(|r| !r.displacements[k].is_empty())
        .map(|r| {
            let d = &r.displacements[k];
            d.iter().map(|x| x * x).sum::<f64>() / d.len() as f64
        })
        .collect();
    if per_replica.len() < MIN_BATCHES {
        return Err(Error::InsufficientSamples { needed: MIN_BATCHES, got: per_replica.len() });
    }
    // Replicas are independent, so each one is its own batch.
    Ok(batch_means(&per_replica, per_replica.len()))
}
