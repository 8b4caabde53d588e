use serde::{Deserialize, Serialize};

use super::chain::ChainConfig;
use super::state::{ParticleState, PeriodicBox};
use crate::stats::{batch_means, Estimate, MIN_BATCHES};
use crate::{par, Error, Result};

/// Minimum number of samples accepted by the estimators.
pub const MIN_SAMPLES: usize = 30;

/// Equal-width radial bins on `[0, r_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bins {
    pub r_max: f64,
    pub n_bins: usize,
}

impl Bins {
    pub fn width(&self) -> f64 {
        self.r_max / self.n_bins as f64
    }

    pub fn edges(&self, b: usize) -> (f64, f64) {
        (b as f64 * self.width(), (b + 1) as f64 * self.width())
    }
}

/// One bin of the pair correlation `g(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GBin {
    pub lo: f64,
    pub hi: f64,
    pub g: f64,
    pub se: f64,
    /// Bin average of `k2` at this separation.
    pub k2: Estimate,
}

/// Density and pair correlation estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    /// One-point density `k1`.
    pub k1: Estimate,
    pub g: Vec<GBin>,
    pub n_samples: usize,
}

/// Pair-distance histogram per sample: entry `b` counts ordered pairs
/// `(i, j)`, `i != j`, at distance in bin `b`.
pub fn pair_histogram(state: &ParticleState, bx: &PeriodicBox, bins: &Bins) -> Vec<f64> {
    let mut h = vec![0.0; bins.n_bins];
    let w = bins.width();
    for i in 0..state.len() {
        for j in 0..i {
            let r = bx.distance(state.point(i), state.point(j));
            if r < bins.r_max {
                let b = ((r / w) as usize).min(bins.n_bins - 1);
                h[b] += 2.0;
            }
        }
    }
    h
}

pub(crate) fn check_bins(bx: &PeriodicBox, bins: &Bins) -> Result<()> {
    if bins.n_bins == 0 || !(bins.r_max > 0.0) {
        return Err(Error::validation("need at least one bin and r_max > 0"));
    }
    if bins.r_max > bx.side / 2.0 + 1e-12 {
        return Err(Error::validation("r_max must not exceed half the box side"));
    }
    Ok(())
}

/// Ratio estimator `g = k2 / k1^2`, with batch-means errors.
///
/// For a translation-invariant process, the expected number of ordered pairs
/// at separation in a shell equals `|box| int_shell k2`, so
/// `k2(bin) = E[pairs] / (|box| |shell|)` and `k1 = E[n] / |box|`.
pub fn estimate_correlations(samples: &[ParticleState], bx: &PeriodicBox, bins: Bins) -> Result<CorrelationEstimate> {
    if samples.is_empty() {
        return Err(Error::InsufficientSamples { needed: MIN_SAMPLES, got: 0 });
    }
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSamples { needed: MIN_SAMPLES, got: samples.len() });
    }
    check_bins(bx, &bins)?;
    let vol = bx.volume();
    let densities: Vec<f64> = samples.iter().map(|s| s.len() as f64 / vol).collect();
    let hists: Vec<Vec<f64>> = par::map_slice(samples, |s| pair_histogram(s, bx, &bins));
    let k1 = batch_means(&densities, MIN_BATCHES);

    let n = samples.len();
    let nb = MIN_BATCHES.min(n);
    let size = n / nb;
    let batch_range = |b: usize| (b * size, if b + 1 == nb { n } else { (b + 1) * size });
    let mut g = Vec::with_capacity(bins.n_bins);
    for b in 0..bins.n_bins {
        let (lo, hi) = bins.edges(b);
        let norm = vol * bx.shell_volume(lo, hi);
        let ratio = |from: usize, to: usize| {
            let m = (to - from) as f64;
            let k2: f64 = hists[from..to].iter().map(|h| h[b]).sum::<f64>() / m / norm;
            let rho: f64 = densities[from..to].iter().sum::<f64>() / m;
            k2 / (rho * rho)
        };
        let per_batch: Vec<f64> = (0..nb)
            .map(|i| {
                let (f, t) = batch_range(i);
                ratio(f, t)
            })
            .collect();
        let spread = batch_means(&per_batch, nb);
        let k2: Vec<f64> = hists.iter().map(|h| h[b] / norm).collect();
        g.push(GBin { lo, hi, g: ratio(0, n), se: spread.se, k2: batch_means(&k2, MIN_BATCHES) });
    }
    Ok(CorrelationEstimate { k1, g, n_samples: n })
}

/// Sample estimate of the Bogoliubov functional `E[prod_{x in gamma} (1 + theta(x))]`.
pub fn functional_estimate<F>(samples: &[ParticleState], theta: F) -> Result<Estimate>
where
    F: Fn(&[f64]) -> f64,
{
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSamples { needed: MIN_SAMPLES, got: samples.len() });
    }
    let values: Vec<f64> = samples.iter().map(|s| s.points().map(|p| 1.0 + theta(p)).product()).collect();
    Ok(batch_means(&values, MIN_BATCHES))
}

/// Configuration factor `psi(gamma)` of a GNZ test function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Psi {
    One,
    /// Number of points in `[lo, hi)`.
    CountIn {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    /// `exp(-rate * count in [lo, hi))`.
    ExpCount {
        lo: Vec<f64>,
        hi: Vec<f64>,
        rate: f64,
    },
    /// 1 if `[lo, hi)` is empty.
    EmptyIn {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
}

impl Psi {
    pub fn eval(&self, gamma: &ParticleState, skip: Option<usize>) -> f64 {
        let count = |lo: &[f64], hi: &[f64]| {
            gamma
                .points()
                .enumerate()
                .filter(|(j, p)| Some(*j) != skip && p.iter().zip(lo).zip(hi).all(|((c, l), h)| c >= l && c < h))
                .count() as f64
        };
        match self {
            Psi::One => 1.0,
            Psi::CountIn { lo, hi } => count(lo, hi),
            Psi::ExpCount { lo, hi, rate } => (-rate * count(lo, hi)).exp(),
            Psi::EmptyIn { lo, hi } => f64::from(count(lo, hi) == 0.0),
        }
    }
}

/// `H(x, gamma) = 1_{[lo, hi)}(x) psi(gamma)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GnzTestFunction {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub psi: Psi,
}

impl GnzTestFunction {
    fn h(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.lo).zip(&self.hi).all(|((c, l), h)| c >= l && c < h)
    }
}

/// Outcome for one test function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnzEntry {
    pub lhs: Estimate,
    pub rhs: Estimate,
    /// Mean and batch-means error of the per-sample difference.
    pub diff: Estimate,
    pub z_score: f64,
    /// Zero variance: flagged, and not counted as a failure.
    pub degenerate: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnzReport {
    pub activity: f64,
    pub entries: Vec<GnzEntry>,
    pub pass_fraction: f64,
    pub passed: bool,
}

/// Fraction of the family that must pass.
pub const GNZ_PASS_FRACTION: f64 = 0.95;

/// Statistical GNZ test: for each `H`, compares per sample
/// `sum_{x in gamma} H(x, gamma \ x)` with
/// `z int H(x, gamma) exp(-beta W({x}, gamma)) dx`, the integral taken by the
/// midpoint rule on `grid_per_side^dim` insertion points.
///
/// `activity` is the `z` used on the right-hand side; pass `cfg.z` for the
/// real test and a wrong value for a negative control.
pub fn gnz_statistical_test(
    samples: &[ParticleState],
    cfg: &ChainConfig,
    activity: f64,
    family: &[GnzTestFunction],
    grid_per_side: usize,
) -> Result<GnzReport> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSamples { needed: MIN_SAMPLES, got: samples.len() });
    }
    if family.is_empty() {
        return Err(Error::validation("GNZ test needs at least one test function"));
    }
    let bx = cfg.sim_box;
    let dim = bx.dim;
    for f in family {
        if f.lo.len() != dim || f.hi.len() != dim {
            return Err(Error::validation("test-function regions must match the box dimension"));
        }
    }
    let m = grid_per_side;
    if m == 0 {
        return Err(Error::validation("insertion grid needs at least one point per side"));
    }
    let cell = bx.side / m as f64;
    let cell_vol = cell.powi(dim as i32);
    let n_grid = m.pow(dim as u32);
    let grid_point = |idx: usize| -> Vec<f64> {
        let mut rest = idx;
        (0..dim)
            .map(|_| {
                let i = rest % m;
                rest /= m;
                (i as f64 + 0.5) * cell
            })
            .collect()
    };
    // Which grid points each test function's region contains.
    let members: Vec<Vec<usize>> = family.iter().map(|f| (0..n_grid).filter(|&g| f.h(&grid_point(g))).collect()).collect();

    let per_sample: Vec<Vec<(f64, f64)>> = par::map_slice(samples, |s| {
        let boltz = insertion_boltzmann(s, cfg, m);
        family
            .iter()
            .zip(&members)
            .map(|(f, idx)| {
                let lhs: f64 = s.points().enumerate().filter(|(_, p)| f.h(p)).map(|(i, _)| f.psi.eval(s, Some(i))).sum();
                let psi = f.psi.eval(s, None);
                let rhs = if psi == 0.0 { 0.0 } else { activity * psi * cell_vol * idx.iter().map(|&g| boltz[g]).sum::<f64>() };
                (lhs, rhs)
            })
            .collect()
    });

    let mut entries = Vec::with_capacity(family.len());
    for k in 0..family.len() {
        let lhs: Vec<f64> = per_sample.iter().map(|v| v[k].0).collect();
        let rhs: Vec<f64> = per_sample.iter().map(|v| v[k].1).collect();
        let d: Vec<f64> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
        let diff = batch_means(&d, MIN_BATCHES);
        let degenerate = !(diff.se > 0.0 && diff.se.is_finite());
        let z_score = diff.z_score(0.0);
        entries.push(GnzEntry {
            lhs: batch_means(&lhs, MIN_BATCHES),
            rhs: batch_means(&rhs, MIN_BATCHES),
            diff,
            z_score,
            degenerate,
            pass: degenerate || z_score <= 3.0,
        });
    }
    let pass_fraction = entries.iter().filter(|e| e.pass).count() as f64 / entries.len() as f64;
    Ok(GnzReport { activity, passed: pass_fraction >= GNZ_PASS_FRACTION, entries, pass_fraction })
}

/// `exp(-beta W({x}, gamma))` at every insertion grid point, by multiplying
/// pair factors only over grid points within the cutoff of each particle.
fn insertion_boltzmann(s: &ParticleState, cfg: &ChainConfig, m: usize) -> Vec<f64> {
    let bx = cfg.sim_box;
    let dim = bx.dim;
    let cell = bx.side / m as f64;
    let mut out = vec![1.0; m.pow(dim as u32)];
    let reach = (cfg.potential.cutoff / cell).ceil() as i64 + 1;
    let span = (2 * reach + 1).min(m as i64);
    for p in s.points() {
        let base: Vec<i64> = p.iter().map(|c| (c / cell).floor() as i64 - span / 2).collect();
        let total = (span as usize).pow(dim as u32);
        for off in 0..total {
            let mut rest = off;
            let mut idx = 0usize;
            let mut stride = 1usize;
            let mut x = Vec::with_capacity(dim);
            for &b in base.iter().take(dim) {
                let o = (rest % span as usize) as i64;
                rest /= span as usize;
                let i = (b + o).rem_euclid(m as i64) as usize;
                idx += i * stride;
                stride *= m;
                x.push((i as f64 + 0.5) * cell);
            }
            let r = bx.distance(&x, p);
            if r < cfg.potential.cutoff {
                out[idx] *= cfg.potential.value(r).boltzmann(cfg.beta);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_counts_ordered_pairs() {
        let bx = PeriodicBox::new(1, 10.0).unwrap();
        let s = ParticleState::from_points(1, &[vec![0.5], vec![1.0], vec![9.8]]).unwrap();
        let h = pair_histogram(&s, &bx, &Bins { r_max: 2.0, n_bins: 4 });
        // Distances 0.5, 0.7 and 1.2.
        assert_eq!(h, vec![0.0, 4.0, 2.0, 0.0]);
    }

    #[test]
    fn too_few_samples_are_refused() {
        let bx = PeriodicBox::new(1, 10.0).unwrap();
        let r = estimate_correlations(&[], &bx, Bins { r_max: 1.0, n_bins: 2 });
        assert!(matches!(r, Err(Error::InsufficientSamples { .. })));
    }

    #[test]
    fn psi_skips_the_removed_point() {
        let s = ParticleState::from_points(1, &[vec![0.5], vec![1.5]]).unwrap();
        let psi = Psi::CountIn { lo: vec![0.0], hi: vec![1.0] };
        assert_eq!(psi.eval(&s, None), 1.0);
        assert_eq!(psi.eval(&s, Some(0)), 0.0);
    }
}
