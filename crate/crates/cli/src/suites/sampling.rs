//! Criterion 5: the grand-canonical sampler against exact and asymptotic oracles.

use bogo_core::equilibrium::{Energy, RadialPotential};
use bogo_core::gcmc::*;
use bogo_core::stats::batch_means;
use serde::Serialize;

use super::*;
use crate::plot::GrRow;

const N_SE: f64 = 3.0;

/// Twenty test functions on a 1-D box of side `l`: indicator windows of two
/// widths paired with constant, counting, exponential and emptiness weights.
pub fn default_gnz_family(l: f64) -> Vec<GnzTestFunction> {
    (0..20)
        .map(|k| {
            let a = (k % 5) as f64 * 2.0 * l / 10.0;
            let w = if k < 10 { 0.2 * l } else { 0.4 * l };
            let psi = match k % 4 {
                0 => Psi::One,
                1 => {
                    let lo = (a + 0.1 * l) % l;
                    Psi::CountIn { lo: vec![lo], hi: vec![lo + 0.15 * l] }
                }
                2 => Psi::ExpCount { lo: vec![0.0], hi: vec![l], rate: 0.3 },
                _ => {
                    let lo = (a + 0.05 * l) % l;
                    Psi::EmptyIn { lo: vec![lo], hi: vec![lo + 0.1 * l] }
                }
            };
            GnzTestFunction { lo: vec![a], hi: vec![(a + w).min(l)], psi }
        })
        .collect()
}

/// Low-activity pair correlation in one dimension,
/// `(1 + f(r)) (1 + z int f(s) f(r - s) ds)` with `f = exp(-beta V) - 1`.
pub fn g_first_order(v: &RadialPotential, beta: f64, z: f64, r: f64) -> f64 {
    let f = |x: f64| match v.value(x.abs()) {
        Energy::Finite(e) => (-beta * e).exp() - 1.0,
        Energy::Infinite => -1.0,
    };
    let rc = v.cutoff;
    let n = 4000;
    let h = 2.0 * rc / n as f64;
    let conv: f64 = (0..n).map(|i| -rc + (i as f64 + 0.5) * h).map(|s| f(s) * f(r - s)).sum::<f64>() * h;
    (1.0 + f(r)) * (1.0 + z * conv)
}

/// `int |f|` over the line, the scale of the next term of the activity expansion.
fn mayer_integral(v: &RadialPotential, beta: f64) -> f64 {
    let n = 4000;
    let rc = v.cutoff;
    let h = 2.0 * rc / n as f64;
    (0..n)
        .map(|i| -rc + (i as f64 + 0.5) * h)
        .map(|x| match v.value(x.abs()) {
            Energy::Finite(e) => (1.0 - (-beta * e).exp()).abs(),
            Energy::Infinite => 1.0,
        })
        .sum::<f64>()
        * h
}

fn pooled(cfg: &ChainConfig, chains: usize) -> Result<Vec<ParticleState>, HarnessError> {
    Ok(run_chains(cfg, chains)?.into_iter().flat_map(|o| o.samples).collect())
}

#[derive(Serialize)]
struct SummaryRow {
    check: &'static str,
    value: f64,
    se: f64,
    target: f64,
}

#[derive(Serialize)]
pub(crate) struct GnzCsvRow {
    activity: f64,
    function: usize,
    lhs: f64,
    rhs: f64,
    diff: f64,
    diff_se: f64,
    z_score: f64,
    degenerate: bool,
    pass: bool,
}

pub(crate) fn gnz_rows(report: &GnzReport) -> Vec<GnzCsvRow> {
    report
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| GnzCsvRow {
            activity: report.activity,
            function: i,
            lhs: e.lhs.value,
            rhs: e.rhs.value,
            diff: e.diff.value,
            diff_se: e.diff.se,
            z_score: e.z_score,
            degenerate: e.degenerate,
            pass: e.pass,
        })
        .collect()
}

pub(super) fn gcmc_suite(ctx: &SuiteContext) -> Result<Body, HarnessError> {
    let mut body = Body::default();
    let n_se = N_SE * ctx.tolerance_scale;
    let mut summary = Vec::new();

    // Ideal gas: N is Poisson with mean z V.
    let ideal = ChainConfig {
        sim_box: PeriodicBox::new(2, 4.0)?,
        z: 0.5,
        beta: 1.0,
        potential: RadialPotential::zero(1.0),
        n_sweeps: 100_000,
        burn_in: 1000,
        thinning: 1,
        seed: ctx.derived_seed(5, 0),
    };
    let out = run_chain(&ideal, 0)?;
    let counts: Vec<f64> = out.samples.iter().map(|s| s.len() as f64).collect();
    let est = batch_means(&counts, 20);
    summary.push(SummaryRow { check: "ideal gas mean count", value: est.value, se: est.se, target: ideal.z_volume() });
    body.check(Assertion::new(
        "ideal gas: mean count within 3 SE of z V",
        est.within(ideal.z_volume(), n_se, 0.0),
        format!("{:.4} +- {:.4} vs {:.4}", est.value, est.se, ideal.z_volume()),
    ));

    // Hard core: no pair closer than the core, so g vanishes there exactly.
    let r_core = 0.5;
    let hard = ChainConfig {
        sim_box: PeriodicBox::new(1, 10.0)?,
        z: 1.0,
        potential: RadialPotential::hardcore(r_core)?,
        n_sweeps: 20_000,
        thinning: 5,
        seed: ctx.derived_seed(5, 1),
        ..ideal.clone()
    };
    let samples = pooled(&hard, 2)?;
    let bx = hard.sim_box;
    let mut closest = f64::INFINITY;
    for s in &samples {
        let pts: Vec<&[f64]> = s.points().collect();
        for i in 0..pts.len() {
            for j in 0..i {
                closest = closest.min(bx.distance(pts[i], pts[j]));
            }
        }
    }
    body.check(Assertion::at_least("hard core: closest accepted pair distance", closest, r_core));
    let est = estimate_correlations(&samples, &bx, Bins { r_max: 1.0, n_bins: 10 })?;
    let inside: Vec<f64> = est.g.iter().filter(|b| b.hi <= r_core).map(|b| b.g).collect();
    body.check(Assertion::new(
        "hard core: g(r < r_core) = 0 exactly",
        !inside.is_empty() && inside.iter().all(|g| *g == 0.0),
        format!("{} bins inside the core, values {inside:?}", inside.len()),
    ));
    let hard_rows: Vec<GrRow> =
        est.g.iter().map(|b| GrRow { t: None, lo: b.lo, hi: b.hi, g: b.g, se: b.se, reference: (b.hi <= r_core).then_some(0.0) }).collect();
    body.files.push(DataFile::csv("c5_hardcore_g.csv", &hard_rows)?);

    // Low activity: g follows the Boltzmann factor with its first activity correction.
    let v = RadialPotential::poly(1.0, 1.0)?;
    let z = 0.2;
    let soft = ChainConfig {
        sim_box: PeriodicBox::new(1, 10.0)?,
        z,
        potential: v.clone(),
        n_sweeps: 100_000,
        thinning: 10,
        seed: ctx.derived_seed(5, 2),
        ..ideal.clone()
    };
    let samples = pooled(&soft, 4)?;
    let est = estimate_correlations(&samples, &soft.sim_box, Bins { r_max: 2.0, n_bins: 10 })?;
    let allowance = (z * mayer_integral(&v, 1.0)).powi(2);
    let mut worst_excess = 0.0f64;
    for bin in &est.g {
        let m = 50;
        let oracle =
            (0..m).map(|i| bin.lo + (i as f64 + 0.5) * (bin.hi - bin.lo) / m as f64).map(|r| g_first_order(&v, 1.0, z, r)).sum::<f64>()
                / m as f64;
        let excess = ((bin.g - oracle).abs() - allowance) / bin.se;
        worst_excess = worst_excess.max(excess);
        body.results.g_r.push(GrRow { t: None, lo: bin.lo, hi: bin.hi, g: bin.g, se: bin.se, reference: Some(oracle) });
    }
    body.check(Assertion::at_most(
        format!("low activity: g within 3 SE + (z int|f|)^2 = {allowance:.2e} of the Boltzmann oracle (worst SE multiple)"),
        worst_excess,
        n_se,
    ));

    // GNZ statistical test and its wrong-activity control.
    let gnz_cfg = ChainConfig { z: 0.3, seed: ctx.derived_seed(5, 3), ..soft.clone() };
    let samples = pooled(&gnz_cfg, 4)?;
    let family = default_gnz_family(gnz_cfg.sim_box.side);
    let good = gnz_statistical_test(&samples, &gnz_cfg, gnz_cfg.z, &family, 1000)?;
    let bad = gnz_statistical_test(&samples, &gnz_cfg, 1.2 * gnz_cfg.z, &family, 1000)?;
    body.check(Assertion::at_least("GNZ family pass fraction at the true activity", good.pass_fraction, GNZ_PASS_FRACTION));
    body.check(Assertion::new(
        "GNZ test rejects activity 1.2 z",
        !bad.passed,
        format!("pass fraction {:.2} < {GNZ_PASS_FRACTION}", bad.pass_fraction),
    ));
    let mut rows = gnz_rows(&good);
    rows.extend(gnz_rows(&bad));
    body.files.push(DataFile::csv("c5_gnz.csv", &rows)?);
    body.files.push(DataFile::csv("c5_summary.csv", &summary)?);
    Ok(body)
}
