use rand::Rng;
use serde::{Deserialize, Serialize};

use super::state::{ParticleState, PeriodicBox};
use crate::equilibrium::RadialPotential;
use crate::rng::{self, StreamRng};
use crate::{par, Error, Result};

/// Settings of a grand-canonical birth/death chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub sim_box: PeriodicBox,
    /// Activity, particles per unit volume of the reference Poisson process.
    pub z: f64,
    pub beta: f64,
    pub potential: RadialPotential,
    /// Total sweeps including burn-in.
    pub n_sweeps: usize,
    pub burn_in: usize,
    /// Record a sample every `thinning` sweeps after burn-in.
    pub thinning: usize,
    pub seed: u64,
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        self.sim_box.validate()?;
        self.potential.validate()?;
        self.sim_box.check_cutoff(self.potential.cutoff)?;
        if !(self.z.is_finite() && self.z > 0.0) {
            return Err(Error::validation("activity z must be positive"));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::validation("beta must be finite and non-negative"));
        }
        if self.burn_in >= self.n_sweeps {
            return Err(Error::validation("burn_in must be smaller than n_sweeps"));
        }
        if self.thinning == 0 {
            return Err(Error::validation("thinning must be at least 1"));
        }
        Ok(())
    }

    /// `z |box|`, the mean particle number of the reference Poisson process.
    pub fn z_volume(&self) -> f64 {
        self.z * self.sim_box.volume()
    }

    /// Move attempts per sweep: `max(1, ceil(z |box|))`.
    pub fn attempts_per_sweep(&self) -> usize {
        (self.z_volume().ceil() as usize).max(1)
    }
}

/// Acceptance probability of adding a point to an `n`-point configuration;
/// `boltzmann = exp(-beta W({x}, gamma))`.
pub fn birth_acceptance(z_volume: f64, n: usize, boltzmann: f64) -> f64 {
    (z_volume / (n as f64 + 1.0) * boltzmann).min(1.0)
}

/// Acceptance probability of removing one point from an `n`-point
/// configuration; `inverse_boltzmann = exp(+beta W({x}, gamma \ x))`.
pub fn death_acceptance(z_volume: f64, n: usize, inverse_boltzmann: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    (n as f64 / z_volume * inverse_boltzmann).min(1.0)
}

/// One birth-or-death attempt. Returns whether the move was accepted.
pub fn gcmc_step(state: &mut ParticleState, cfg: &ChainConfig, rng: &mut StreamRng) -> bool {
    let zv = cfg.z_volume();
    let n = state.len();
    if rng.random::<bool>() {
        let x: Vec<f64> = (0..cfg.sim_box.dim).map(|_| rng.random::<f64>() * cfg.sim_box.side).collect();
        let w = state.interaction_with(&x, None, &cfg.sim_box, &cfg.potential);
        let a = birth_acceptance(zv, n, w.boltzmann(cfg.beta));
        // Draw the uniform even when a is 0 or 1 so the stream position does
        // not depend on the acceptance value.
        let u: f64 = rng.random();
        if u < a {
            state.push(&x);
            return true;
        }
        false
    } else {
        if n == 0 {
            let _: f64 = rng.random();
            return false;
        }
        let i = rng.random_range(0..n);
        let w = state.interaction_with(state.point(i), Some(i), &cfg.sim_box, &cfg.potential);
        let inv = match w.finite() {
            Some(v) => (cfg.beta * v).exp(),
            None => f64::INFINITY,
        };
        let a = death_acceptance(zv, n, inv);
        let u: f64 = rng.random();
        if u < a {
            state.swap_remove(i);
            return true;
        }
        false
    }
}

/// Samples of one chain.
#[derive(Debug, Clone)]
pub struct ChainOutput {
    pub samples: Vec<ParticleState>,
    pub acceptance_rate: f64,
}

/// Runs one chain from the empty configuration on stream `stream_id`.
pub fn run_chain(cfg: &ChainConfig, stream_id: u64) -> Result<ChainOutput> {
    cfg.validate()?;
    let mut rng = rng::stream(cfg.seed, stream_id);
    let mut state = ParticleState::empty(cfg.sim_box.dim);
    let attempts = cfg.attempts_per_sweep();
    let mut accepted = 0usize;
    let mut samples = Vec::with_capacity((cfg.n_sweeps - cfg.burn_in) / cfg.thinning + 1);
    for sweep in 0..cfg.n_sweeps {
        for _ in 0..attempts {
            accepted += usize::from(gcmc_step(&mut state, cfg, &mut rng));
        }
        if sweep >= cfg.burn_in && (sweep - cfg.burn_in).is_multiple_of(cfg.thinning) {
            samples.push(state.clone());
        }
    }
    Ok(ChainOutput { samples, acceptance_rate: accepted as f64 / (cfg.n_sweeps * attempts) as f64 })
}

/// Independent chains on streams `0..n_chains`, run in parallel; output is
/// in stream order regardless of scheduling.
pub fn run_chains(cfg: &ChainConfig, n_chains: usize) -> Result<Vec<ChainOutput>> {
    par::map_range(n_chains, |c| run_chain(cfg, c as u64)).into_iter().collect()
}
