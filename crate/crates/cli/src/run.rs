//! Subcommand execution: configuration resolution, the engines, result files
//! and the manifest.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use bogo_core::calculus::{
    bogoliubov_eval, correlation_from_measure, measure_from_correlation, minimal_ruelle_constant, Configuration, Field, SiteSpace,
};
use bogo_core::dynamics::*;
use bogo_core::equilibrium::{beta_for_mayer_norm, bogoliubov_equation_residual, BogoliubovForm, DiscretePotential, PairPotential};
use bogo_core::gcmc::*;
use bogo_core::solver::{fixed_point_solve, FunctionalRep, SolveOptions};
use serde::Serialize;

use crate::config::*;
use crate::manifest::{Assertion, OutputRecord, RunManifest, Stage};
use crate::output::{sha256_hex, write_files, DataFile};
use crate::plot::{emit_plotdata, ConvergenceRow, GrRow, KtRow, RunResults};
use crate::suites::{self, default_gnz_family, SuiteContext};
use crate::HarnessError;

/// Command-line request. `None` fields fall back to the config file, then to defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub subcommand: Subcommand,
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub tolerance_scale: Option<f64>,
    pub suite: Option<String>,
}

impl RunOptions {
    pub fn new(subcommand: Subcommand) -> Self {
        RunOptions { subcommand, config: None, seed: None, jobs: None, out: None, tolerance_scale: None, suite: None }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    /// Where results went; absent when the run stopped before choosing it.
    pub out_dir: Option<PathBuf>,
    pub manifest: Option<RunManifest>,
    /// Human-readable progress and summary lines.
    pub report: Vec<String>,
    pub error: Option<String>,
}

/// Effective settings after merging the command line, the config file and defaults.
struct Prepared {
    sub: Subcommand,
    cfg: ExperimentConfig,
    seed: u64,
    tolerance_scale: f64,
    jobs: usize,
    out_dir: PathBuf,
    input_hashes: BTreeMap<String, String>,
}

fn prepare(opts: &RunOptions) -> Result<Prepared, HarnessError> {
    let mut input_hashes = BTreeMap::new();
    let mut cfg = match &opts.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
            input_hashes.insert(path.display().to_string(), sha256_hex(text.as_bytes()));
            let cfg = ExperimentConfig::parse(&text)?;
            let found = cfg.subcommand()?;
            if found != opts.subcommand {
                return Err(HarnessError::Config(format!(
                    "config holds a `{}` block but the subcommand is `{}`",
                    found.name(),
                    opts.subcommand.name()
                )));
            }
            cfg
        }
        None => ExperimentConfig::default_for(opts.subcommand),
    };
    if let Some(suite) = &opts.suite {
        if opts.subcommand != Subcommand::Verify {
            return Err(HarnessError::Config("--suite only applies to `verify`".into()));
        }
        cfg.verify.get_or_insert_with(VerifyConfig::default).suite = suite.clone();
    }
    let seed = opts.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let tolerance_scale = opts.tolerance_scale.or(cfg.tolerance_scale).unwrap_or(1.0);
    cfg.seed = Some(seed);
    cfg.tolerance_scale = Some(tolerance_scale);
    cfg.validate()?;
    let jobs = match opts.jobs {
        Some(0) => return Err(HarnessError::Config("--jobs must be at least 1".into())),
        Some(j) => j,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    let out_dir = opts.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| Path::new("bogo-out").join(opts.subcommand.name()));
    cfg.output_dir = Some(out_dir.clone());
    Ok(Prepared { sub: opts.subcommand, cfg, seed, tolerance_scale, jobs, out_dir, input_hashes })
}

/// What a subcommand produced before anything touches the disk.
#[derive(Default)]
struct Execution {
    assertions: Vec<Assertion>,
    files: Vec<DataFile>,
    results: RunResults,
    stages: Vec<Stage>,
    report: Vec<String>,
}

impl Execution {
    fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T, HarnessError>) -> Result<T, HarnessError> {
        let start = Instant::now();
        let out = f();
        self.stages.push(Stage { name: name.into(), wall_seconds: start.elapsed().as_secs_f64() });
        out
    }
}

/// Runs one subcommand end to end. Never panics on bad input; every failure
/// becomes an exit code, and every run that got past configuration leaves a
/// manifest behind.
pub fn run(opts: &RunOptions) -> RunOutcome {
    let prep = match prepare(opts) {
        Ok(p) => p,
        Err(e) => {
            return RunOutcome { exit_code: e.exit_code(), out_dir: None, manifest: None, report: Vec::new(), error: Some(e.to_string()) };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(prep.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            let e = HarnessError::Runtime(format!("thread pool: {e}"));
            return RunOutcome { exit_code: e.exit_code(), out_dir: None, manifest: None, report: Vec::new(), error: Some(e.to_string()) };
        }
    };
    let mut exec = Execution::default();
    let result = pool.install(|| execute(&prep, &mut exec));
    let (mut exit_code, mut error) = match &result {
        Ok(()) => (if exec.assertions.iter().all(|a| a.passed) { 0 } else { 1 }, None),
        Err(e) => (e.exit_code(), Some(e.to_string())),
    };

    let mut outputs = Vec::new();
    if result.is_ok() {
        match write_outputs(&prep.out_dir, &mut exec) {
            Ok(records) => outputs = records,
            Err(e) => {
                exit_code = e.exit_code();
                error = Some(e.to_string());
            }
        }
    }
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: prep.sub.name().into(),
        seed: prep.seed,
        rng_algorithm: bogo_core::rng::ALGORITHM.into(),
        jobs: prep.jobs,
        tolerance_scale: prep.tolerance_scale,
        config: serde_json::to_value(&prep.cfg).unwrap_or(serde_json::Value::Null),
        input_hashes: prep.input_hashes.clone(),
        stages: exec.stages.clone(),
        assertions: exec.assertions.clone(),
        outputs,
        exit_code,
        error: error.clone(),
    };
    if let Err(e) = manifest.write(&prep.out_dir) {
        exit_code = e.exit_code();
        error = Some(error.map_or(e.to_string(), |prev| format!("{prev}; {e}")));
    }
    RunOutcome { exit_code, out_dir: Some(prep.out_dir), manifest: Some(manifest), report: exec.report, error }
}

fn write_outputs(dir: &Path, exec: &mut Execution) -> Result<Vec<OutputRecord>, HarnessError> {
    write_files(dir, &exec.files)?;
    let mut records: Vec<OutputRecord> = exec.files.iter().map(|f| OutputRecord { file: f.name.clone(), sha256: f.sha256() }).collect();
    for kind in exec.results.available_kinds() {
        let path = emit_plotdata(&exec.results, kind, dir)?;
        let bytes = std::fs::read(&path).map_err(|e| HarnessError::Runtime(format!("{}: {e}", path.display())))?;
        let file = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        records.push(OutputRecord { file, sha256: sha256_hex(&bytes) });
    }
    Ok(records)
}

fn execute(prep: &Prepared, exec: &mut Execution) -> Result<(), HarnessError> {
    let cfg = &prep.cfg;
    let scale = prep.tolerance_scale;
    let missing = || HarnessError::Config(format!("missing `{}` block", prep.sub.name()));
    match prep.sub {
        Subcommand::Exact => run_exact(cfg.exact.as_ref().ok_or_else(missing)?, scale, exec),
        Subcommand::Fixedpoint => run_fixedpoint(cfg.fixedpoint.as_ref().ok_or_else(missing)?, scale, exec),
        Subcommand::Gcmc => run_gcmc(cfg.gcmc.as_ref().ok_or_else(missing)?, prep.seed, exec),
        Subcommand::Sde => run_sde(cfg.sde.as_ref().ok_or_else(missing)?, prep.seed, exec),
        Subcommand::Hierarchy => run_hierarchy(cfg.hierarchy.as_ref().ok_or_else(missing)?, exec),
        Subcommand::Verify => run_verify(cfg.verify.as_ref().ok_or_else(missing)?, prep, exec),
    }
}

fn lattice(spec: &LatticeSpec) -> Result<Arc<SiteSpace>, HarnessError> {
    Ok(Arc::new(SiteSpace::lattice_1d(spec.sites, spec.spacing, spec.sigma)?))
}

#[derive(Serialize)]
struct CheckRow {
    check: String,
    value: f64,
    tolerance: f64,
    passed: bool,
}

fn record_check(exec: &mut Execution, rows: &mut Vec<CheckRow>, name: &str, value: f64, tolerance: f64) {
    let a = Assertion::at_most(name, value, tolerance);
    rows.push(CheckRow { check: name.into(), value, tolerance, passed: a.passed });
    exec.assertions.push(a);
}

fn run_exact(cfg: &ExactConfig, scale: f64, exec: &mut Execution) -> Result<(), HarnessError> {
    let space = lattice(&cfg.lattice)?;
    let n = space.len();
    let pot = PairPotential::from_spec(cfg.potential.clone())?;
    let phi = DiscretePotential::new(&pot, space.clone(), cfg.lattice.period)?;
    let theta = match &cfg.theta {
        Some(t) if t.len() != n => {
            return Err(HarnessError::Config(format!("field `exact.theta`: expected {n} values, got {}", t.len())));
        }
        Some(t) => Field::from_real(t),
        None => Field::from_real(&(0..n).map(|x| 0.5 * (1.0 + x as f64).sin()).collect::<Vec<_>>()),
    };
    let (mu, k) = exec.stage("enumerate", || {
        let mu = phi.gibbs_measure()?;
        let k = correlation_from_measure(&mu)?;
        Ok((mu, k))
    })?;
    let mut rows = Vec::new();
    exec.stage("checks", || Ok(()))?;
    let start = Instant::now();
    let mass: f64 = mu.values().iter().map(|v| v.re).sum();
    record_check(exec, &mut rows, "measure normalization |sum mu - 1|", (mass - 1.0).abs(), 1e-12 * scale);
    let back = measure_from_correlation(&k)?;
    record_check(exec, &mut rows, "measure/correlation roundtrip max abs", back.max_abs_diff(&mu)?, 1e-12 * scale);
    let th: Vec<f64> = theta.0.iter().map(|v| v.re).collect();
    let h = |x: usize, g: Configuration| (1.0 + th[x]) * g.sites().map(|y| 1.0 + th[y]).product::<f64>();
    record_check(exec, &mut rows, "GNZ relative residual", phi.gnz_residual(&mu, h)?.relative(), 1e-12 * scale);
    let a = bogoliubov_eval(&mu, &theta)?;
    let b = bogoliubov_eval(&k, &theta)?;
    record_check(exec, &mut rows, "functional from measure vs correlation", (a - b).norm() / a.norm().max(b.norm()), 1e-11 * scale);
    let f = Field::from_real(&th.iter().map(|t| 0.5 * t).collect::<Vec<_>>());
    for (label, form) in [("I", BogoliubovForm::I), ("II", BogoliubovForm::Ii { f: f.clone() }), ("III", BogoliubovForm::Iii { f })] {
        let r = bogoliubov_equation_residual(&mu, &phi, &theta, &form)?;
        record_check(exec, &mut rows, &format!("Bogoliubov form {label} residual"), r, 1e-10 * scale);
    }
    if let Some(s) = exec.stages.last_mut() {
        s.wall_seconds = start.elapsed().as_secs_f64();
    }

    #[derive(Serialize)]
    struct Summary {
        sites: usize,
        beta: f64,
        mayer_norm: f64,
        minimal_ruelle_constant: f64,
        functional_at_theta: [f64; 2],
    }
    let summary = Summary {
        sites: n,
        beta: pot.beta,
        mayer_norm: phi.mayer_norm(),
        minimal_ruelle_constant: minimal_ruelle_constant(&k, 1.0),
        functional_at_theta: [a.re, a.im],
    };
    exec.report.push(format!("enumerated {} configurations; Mayer norm {:.4}", mu.len(), summary.mayer_norm));
    exec.files.push(DataFile::text("measure.json", mu.to_json() + "\n"));
    exec.files.push(DataFile::text("correlation.json", k.to_json() + "\n"));
    exec.files.push(DataFile::csv("checks.csv", &rows)?);
    exec.files.push(DataFile::json("summary.json", &summary)?);
    Ok(())
}

fn run_fixedpoint(cfg: &FixedPointConfig, scale: f64, exec: &mut Execution) -> Result<(), HarnessError> {
    let space = lattice(&cfg.lattice)?;
    let mut pot = PairPotential::from_spec(cfg.potential.clone())?;
    if let Some(target) = cfg.mayer_norm {
        pot.beta = beta_for_mayer_norm(&pot, space.clone(), cfg.lattice.period, target)?;
    }
    let phi = DiscretePotential::new(&pot, space.clone(), cfg.lattice.period)?;
    exec.report.push(format!("beta = {:.6}, C(beta) = {:.6}", pot.beta, phi.mayer_norm()));
    let opts = SolveOptions { tol: cfg.tol, max_iter: cfg.max_iter, alpha: cfg.alpha };
    let (l, rep) = exec.stage("solve", || Ok(fixed_point_solve(&phi, &FunctionalRep::constant(space.clone(), 1.0)?, opts)?))?;
    exec.report.push(format!(
        "converged in {} iterations; rate bound {:.4}, largest observed step ratio {:.4}",
        rep.iterations, rep.rate_bound, rep.max_step_ratio
    ));
    exec.assertions.push(Assertion::new(
        "solver converged",
        rep.converged,
        format!("final step {:.3e} <= {:.3e}", rep.final_delta, cfg.tol),
    ));
    exec.assertions.push(Assertion::at_most("observed step ratio within the rate bound", rep.max_step_ratio, rep.rate_bound));
    if cfg.compare_exact {
        let d = exec.stage("compare", || {
            let exact = FunctionalRep::new(correlation_from_measure(&phi.gibbs_measure()?)?)?;
            Ok(l.weighted_sup_distance(&exact, rep.alpha)?)
        })?;
        exec.assertions.push(Assertion::at_most("distance to enumerated Gibbs correlations (weighted sup)", d, 1e-8 * scale));
    }
    let first = rep.deltas.first().copied().unwrap_or(0.0);
    exec.results.convergence = rep
        .deltas
        .iter()
        .enumerate()
        .map(|(i, d)| ConvergenceRow { series: 0, iteration: i + 1, delta: *d, bound: first * rep.rate_bound.powi(i as i32) })
        .collect();
    exec.files.push(DataFile::text("fixed_point.json", l.coefficients().to_json() + "\n"));
    exec.files.push(DataFile::json("report.json", &rep)?);
    exec.files.push(DataFile::csv("convergence.csv", &exec.results.convergence)?);
    Ok(())
}

fn run_gcmc(cfg: &GcmcConfig, seed: u64, exec: &mut Execution) -> Result<(), HarnessError> {
    let chain = ChainConfig {
        sim_box: cfg.sim_box,
        z: cfg.z,
        beta: cfg.beta,
        potential: cfg.potential.clone(),
        n_sweeps: cfg.n_sweeps,
        burn_in: cfg.burn_in,
        thinning: cfg.thinning,
        seed,
    };
    if cfg.n_chains == 0 {
        return Err(HarnessError::Config("field `gcmc.n_chains`: must be at least 1".into()));
    }
    let outs = exec.stage("sample", || Ok(run_chains(&chain, cfg.n_chains)?))?;
    let acceptance: Vec<f64> = outs.iter().map(|o| o.acceptance_rate).collect();
    let samples: Vec<ParticleState> = outs.into_iter().flat_map(|o| o.samples).collect();
    let est = exec.stage("estimate", || Ok(estimate_correlations(&samples, &chain.sim_box, cfg.bins)?))?;
    exec.report.push(format!("{} samples; k1 = {:.5} +- {:.5}", samples.len(), est.k1.value, est.k1.se));
    exec.results.g_r = est.g.iter().map(|b| GrRow { t: None, lo: b.lo, hi: b.hi, g: b.g, se: b.se, reference: None }).collect();

    #[derive(Serialize)]
    struct Density<'a> {
        k1: bogo_core::stats::Estimate,
        z: f64,
        z_volume: f64,
        n_samples: usize,
        acceptance_rates: &'a [f64],
    }
    exec.files.push(DataFile::json(
        "density.json",
        &Density { k1: est.k1, z: cfg.z, z_volume: chain.z_volume(), n_samples: samples.len(), acceptance_rates: &acceptance },
    )?);
    exec.files.push(DataFile::csv("g_r.csv", &exec.results.g_r)?);

    if let Some(gnz) = &cfg.gnz {
        let family = match &gnz.family {
            Some(f) => f.clone(),
            None if chain.sim_box.dim == 1 => default_gnz_family(chain.sim_box.side),
            None => {
                return Err(HarnessError::Config("field `gcmc.gnz.family`: the default family is 1-D only; list test functions".into()))
            }
        };
        let good = exec.stage("gnz", || Ok(gnz_statistical_test(&samples, &chain, cfg.z, &family, gnz.grid_per_side)?))?;
        exec.assertions.push(Assertion::new(
            "GNZ family passes at the sampled activity",
            good.passed,
            format!("pass fraction {:.3} >= {GNZ_PASS_FRACTION}", good.pass_fraction),
        ));
        let mut rows = suites::gnz_rows(&good);
        if let Some(factor) = gnz.wrong_activity_factor {
            let bad =
                exec.stage("gnz control", || Ok(gnz_statistical_test(&samples, &chain, factor * cfg.z, &family, gnz.grid_per_side)?))?;
            exec.assertions.push(Assertion::new(
                format!("GNZ family rejects activity {factor} z"),
                !bad.passed,
                format!("pass fraction {:.3} < {GNZ_PASS_FRACTION}", bad.pass_fraction),
            ));
            rows.extend(suites::gnz_rows(&bad));
        }
        exec.files.push(DataFile::csv("gnz.csv", &rows)?);
    }
    Ok(())
}

#[derive(Serialize)]
struct K1Row {
    t: f64,
    k1: f64,
    se: f64,
}

#[derive(Serialize)]
struct VarianceRow {
    t: f64,
    variance: f64,
    se: f64,
    free_reference: f64,
}

fn run_sde(cfg: &SdeRunConfig, seed: u64, exec: &mut Execution) -> Result<(), HarnessError> {
    let sde = SdeConfig {
        sim_box: cfg.sim_box,
        init: cfg.init.clone(),
        beta: cfg.beta,
        potential: cfg.potential.clone(),
        dt: cfg.dt,
        t_end: cfg.t_end,
        n_replicas: cfg.n_replicas,
        force_cap: cfg.force_cap,
        noise: cfg.noise,
        record_times: cfg.record_times.clone(),
        seed,
    };
    let out = exec.stage("simulate", || Ok(simulate_sde(&sde)?))?;
    let (mut k1_rows, mut variance) = (Vec::new(), Vec::new());
    exec.stage("estimate", || Ok(()))?;
    let start = Instant::now();
    for &t in &cfg.record_times {
        let est = empirical_correlations(&out, t, cfg.bins)?;
        k1_rows.push(K1Row { t, k1: est.k1.value, se: est.k1.se });
        exec.results.g_r.extend(est.g.iter().map(|b| GrRow { t: Some(t), lo: b.lo, hi: b.hi, g: b.g, se: b.se, reference: None }));
        for bin in density_profile(&out, t, cfg.density_bins)? {
            exec.results.kt_profiles.push(KtRow {
                source: "sde".into(),
                t,
                level: 1,
                x: 0.5 * (bin.lo + bin.hi),
                value: bin.k1.value,
                se: Some(bin.k1.se),
            });
        }
        let v = displacement_variance(&out, t)?;
        variance.push(VarianceRow { t, variance: v.value, se: v.se, free_reference: t });
    }
    if let Some(s) = exec.stages.last_mut() {
        s.wall_seconds = start.elapsed().as_secs_f64();
    }
    exec.report.push(format!("{} replicas to t = {}", cfg.n_replicas, cfg.t_end));
    exec.files.push(DataFile::csv("k1.csv", &k1_rows)?);
    exec.files.push(DataFile::csv("g_r.csv", &exec.results.g_r)?);
    exec.files.push(DataFile::csv("profile.csv", &exec.results.kt_profiles)?);
    exec.files.push(DataFile::csv("variance.csv", &variance)?);
    exec.files.push(DataFile::text("snapshots.jsonl", snapshot_lines(&out)?));
    Ok(())
}

/// One JSON line per replica and record time, holding the wrapped positions.
fn snapshot_lines(out: &SdeOutput) -> Result<String, HarnessError> {
    #[derive(Serialize)]
    struct Line<'a> {
        t: f64,
        replica: usize,
        points: Vec<&'a [f64]>,
    }
    let mut text = String::new();
    for (i, &t) in out.times.iter().enumerate() {
        for (r, rep) in out.replicas.iter().enumerate() {
            let line = Line { t, replica: r, points: rep.snapshots[i].points().collect() };
            text.push_str(&serde_json::to_string(&line).map_err(bogo_core::Error::from)?);
            text.push('\n');
        }
    }
    Ok(text)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Serialize)]
struct K1ProfileRow {
    t: f64,
    x: f64,
    k1: f64,
}

#[derive(Serialize)]
struct K2ProfileRow {
    t: f64,
    x: f64,
    y: f64,
    k2: f64,
}

#[derive(Serialize)]
struct RuelleRow {
    t: f64,
    level1: f64,
    level2: f64,
    c_alpha0: f64,
    alpha: f64,
    c_alpha: f64,
}

fn run_hierarchy(cfg: &HierarchyConfig, exec: &mut Execution) -> Result<(), HarnessError> {
    let grid = Grid1d::periodic(cfg.side, cfg.points)?;
    let state = match &cfg.init {
        HierarchyInit::Poisson { z, full } => HierarchyState::poisson(grid, *z, !full, Some(cfg.closure))?,
        HierarchyInit::Cosine { z, amplitude, mode } => {
            let k1 = grid.sample(|x| z * (1.0 + amplitude * (TAU * f64::from(*mode) * x / cfg.side).cos()));
            HierarchyState::independent(grid, k1, Some(cfg.closure))?
        }
    };
    let phi = PairPotential::from_spec(cfg.potential.clone())?;
    let h = grid.spacing;
    let dt = cfg.dt.unwrap_or(h * h / 4.0);
    if !(dt > 0.0 && cfg.t_end > 0.0) {
        return Err(HarnessError::Config("fields `hierarchy.dt` and `hierarchy.t_end` must be positive".into()));
    }
    // Same step rounding as the solver, so record times can be located.
    let steps = (cfg.t_end / dt).ceil() as usize;
    let dt_eff = cfg.t_end / steps as f64;
    let mut record_steps = Vec::new();
    for &t in &cfg.record_times {
        let s = t / dt_eff;
        if !(0.0..=steps as f64 + 1e-9).contains(&s) || (s - s.round()).abs() > 1e-6 {
            return Err(HarnessError::Config(format!(
                "field `hierarchy.record_times`: {t} is not a step multiple in [0, t_end] (step {dt_eff})"
            )));
        }
        record_steps.push(s.round() as usize);
    }
    let stride = if cfg.residual_field.is_some() { 1 } else { record_steps.iter().fold(steps, |g, &s| gcd(g, s)).max(1) };
    let tl =
        exec.stage("solve", || Ok(hierarchy_solve(&state, &phi, cfg.t_end, dt, SolveSettings { safety: 1.0, record_stride: stride })?))?;
    exec.report.push(format!("{steps} RK4 steps of {dt_eff:.3e}; {} states recorded", tl.states.len()));

    let (mut k1_rows, mut k2_rows, mut ruelle) = (Vec::new(), Vec::new(), Vec::new());
    let translation_invariant = matches!(state.profile, Profile::TranslationInvariant { .. });
    let n = grid.len;
    for &t in &cfg.record_times {
        let i = tl.index_of(t).ok_or_else(|| HarnessError::Runtime(format!("record time {t} missing from the timeline")))?;
        let s = &tl.states[i];
        for x in 0..n {
            k1_rows.push(K1ProfileRow { t, x: grid.x(x), k1: s.k1(x) });
            exec.results.kt_profiles.push(KtRow { source: "hierarchy".into(), t, level: 1, x: grid.x(x), value: s.k1(x), se: None });
        }
        if translation_invariant {
            for o in 0..n {
                k2_rows.push(K2ProfileRow { t, x: 0.0, y: o as f64 * h, k2: s.k2(o, 0) });
            }
        } else {
            for a in 0..n {
                for b in 0..n {
                    k2_rows.push(K2ProfileRow { t, x: grid.x(a), y: grid.x(b), k2: s.k2(a, b) });
                }
            }
        }
        for o in 0..=n / 2 {
            let value = if translation_invariant { s.k2(o, 0) } else { s.k2_shell_average(o as f64 * h, o as f64 * h) };
            exec.results.kt_profiles.push(KtRow { source: "hierarchy".into(), t, level: 2, x: o as f64 * h, value, se: None });
        }
        let r = tl.ruelle[i];
        ruelle.push(RuelleRow { t, level1: r.level1, level2: r.level2, c_alpha0: r.c_alpha0, alpha: r.alpha, c_alpha: r.c_alpha });
    }

    if let Some(field) = &cfg.residual_field {
        let rows = exec.stage("residuals", || {
            let mut rows = Vec::new();
            for &t in &cfg.record_times {
                // The time derivative is centred, so the end points have no residual.
                if t <= 0.5 * dt_eff || t >= cfg.t_end - 0.5 * dt_eff {
                    continue;
                }
                rows.push(functional_evolution_residual(&tl, &phi, field, t)?);
            }
            Ok(rows)
        })?;
        for r in &rows {
            exec.report.push(format!("t = {}: functional evolution relative residual {:.3e}", r.t, r.relative));
        }
        exec.files.push(DataFile::csv("residuals.csv", &rows)?);
    }

    exec.assertions.push(Assertion::new(
        "k0 = 1 in every recorded state",
        tl.normalization_violations() == 0,
        format!("{} violations in {} states", tl.normalization_violations(), tl.states.len()),
    ));
    exec.assertions.push(Assertion::new(
        "k2 symmetric in every recorded state",
        tl.max_asymmetry() == 0.0,
        format!("max asymmetry {:e}", tl.max_asymmetry()),
    ));
    exec.files.push(DataFile::csv("k1_profile.csv", &k1_rows)?);
    exec.files.push(DataFile::csv("k2_profile.csv", &k2_rows)?);
    exec.files.push(DataFile::csv("ruelle.csv", &ruelle)?);
    Ok(())
}

fn run_verify(cfg: &VerifyConfig, prep: &Prepared, exec: &mut Execution) -> Result<(), HarnessError> {
    let ids = suites::parse_suite(&cfg.suite).map_err(HarnessError::Config)?;
    let ctx = SuiteContext { seed: prep.seed, tolerance_scale: prep.tolerance_scale };
    for id in ids {
        let outcome = suites::run_criterion(id, &ctx)?;
        exec.stages.push(Stage { name: format!("criterion {id} ({})", outcome.name), wall_seconds: outcome.wall_seconds });
        exec.report.push(format!(
            "criterion {id} {:<22} {} ({:.1} s)",
            outcome.name,
            if outcome.passed() { "PASS" } else { "FAIL" },
            outcome.wall_seconds
        ));
        for a in outcome.failures() {
            exec.report.push(format!("    failed: {}: {}", a.name, a.detail));
        }
        for a in &outcome.assertions {
            exec.assertions.push(Assertion::new(format!("criterion {id} ({}): {}", outcome.name, a.name), a.passed, a.detail.clone()));
        }
        exec.files.extend(outcome.all_files()?);
    }
    Ok(())
}
