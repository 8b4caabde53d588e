//! Acceptance suites. Each criterion builds its own random instances from
//! the run seed, produces assertions plus data files, and reports wall time.
//! The same code backs `bogo verify` and the `acceptance` test target.

mod dynamics;
mod identities;
mod sampling;
mod uniqueness;

pub(crate) use sampling::gnz_rows;
pub use sampling::{default_gnz_family, g_first_order};

use std::sync::Arc;
use std::time::Instant;

use bogo_core::calculus::{Field, Role, SetFunction, SiteSpace};
use bogo_core::equilibrium::{DiscretePotential, Energy, PairPotential};
use bogo_core::rng::{self, StreamRng};
use bogo_core::Complex64;
use rand::Rng;

use crate::manifest::Assertion;
use crate::output::DataFile;
use crate::plot::RunResults;
use crate::HarnessError;

/// Seed and tolerance scaling shared by every criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteContext {
    pub seed: u64,
    pub tolerance_scale: f64,
}

impl SuiteContext {
    pub fn new(seed: u64) -> Self {
        SuiteContext { seed, tolerance_scale: 1.0 }
    }

    pub(crate) fn tol(&self, base: f64) -> f64 {
        base * self.tolerance_scale
    }

    /// Independent stream for `(criterion, part, instance)`.
    pub(crate) fn stream(&self, criterion: u8, part: u64, instance: u64) -> StreamRng {
        let salt = (u64::from(criterion) << 48) ^ (part << 32);
        rng::stream(self.seed ^ salt, instance)
    }

    /// Seed for engines that take a seed rather than a stream.
    pub(crate) fn derived_seed(&self, criterion: u8, part: u64) -> u64 {
        self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add((u64::from(criterion) << 16) | part)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub title: &'static str,
    /// Wall-time budget in seconds, if the criterion has one.
    pub budget: Option<f64>,
}

pub const CRITERIA: [Criterion; 9] = [
    Criterion { id: 1, name: "exact", title: "exact identities on finite spaces", budget: Some(60.0) },
    Criterion { id: 2, name: "gnz", title: "GNZ equation for exact Gibbs measures", budget: Some(60.0) },
    Criterion { id: 3, name: "bogoliubov", title: "Bogoliubov equation forms", budget: Some(120.0) },
    Criterion { id: 4, name: "uniqueness", title: "fixed-point uniqueness and contraction", budget: Some(300.0) },
    Criterion { id: 5, name: "gcmc", title: "grand-canonical sampler", budget: Some(300.0) },
    Criterion { id: 6, name: "dynamics-free", title: "free dynamics against heat flow", budget: Some(180.0) },
    Criterion { id: 7, name: "dynamics-interacting", title: "interacting desk case", budget: Some(600.0) },
    Criterion { id: 8, name: "conservation", title: "triangularity and conservation", budget: None },
    Criterion { id: 9, name: "reproducibility", title: "byte-identical reruns", budget: None },
];

pub fn criterion(id: u8) -> Option<&'static Criterion> {
    CRITERIA.iter().find(|c| c.id == id)
}

/// Resolves a suite name (`all`, a criterion name, or its number) to criterion ids.
pub fn parse_suite(name: &str) -> Result<Vec<u8>, String> {
    if name == "all" {
        return Ok(CRITERIA.iter().map(|c| c.id).collect());
    }
    CRITERIA.iter().find(|c| c.name == name || c.id.to_string() == name).map(|c| vec![c.id]).ok_or_else(|| {
        let names: Vec<&str> = CRITERIA.iter().map(|c| c.name).collect();
        format!("unknown suite `{name}`; expected all, {} or a number 1-9", names.join(", "))
    })
}

/// Everything one criterion produced.
#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub assertions: Vec<Assertion>,
    pub files: Vec<DataFile>,
    pub results: RunResults,
    pub wall_seconds: f64,
}

impl CriterionOutcome {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn failures(&self) -> Vec<&Assertion> {
        self.assertions.iter().filter(|a| !a.passed).collect()
    }

    /// Data files plus the plot series, in a fixed order.
    pub fn all_files(&self) -> Result<Vec<DataFile>, HarnessError> {
        let mut files = self.files.clone();
        for kind in self.results.available_kinds() {
            let mut f = self.results.plot_file(kind)?;
            f.name = format!("c{}_{}", self.id, f.name);
            files.push(f);
        }
        Ok(files)
    }
}

/// Partial result handed back by the criterion bodies.
#[derive(Debug, Default)]
pub(crate) struct Body {
    pub assertions: Vec<Assertion>,
    pub files: Vec<DataFile>,
    pub results: RunResults,
}

impl Body {
    pub fn check(&mut self, a: Assertion) {
        self.assertions.push(a);
    }
}

/// Runs criterion `id` under `ctx`.
pub fn run_criterion(id: u8, ctx: &SuiteContext) -> Result<CriterionOutcome, HarnessError> {
    let c = criterion(id).ok_or_else(|| HarnessError::Config(format!("no criterion {id}")))?;
    let start = Instant::now();
    let mut body = match id {
        1 => identities::exact_suite(ctx)?,
        2 => identities::gnz_suite(ctx)?,
        3 => identities::bogoliubov_suite(ctx)?,
        4 => uniqueness::uniqueness_suite(ctx)?,
        5 => sampling::gcmc_suite(ctx)?,
        6 => dynamics::free_suite(ctx)?,
        7 => dynamics::interacting_suite(ctx)?,
        8 => dynamics::conservation_suite(ctx)?,
        _ => reproducibility_suite(ctx)?,
    };
    let wall_seconds = start.elapsed().as_secs_f64();
    if let Some(budget) = c.budget {
        body.check(Assertion::at_most("runtime seconds", wall_seconds, budget));
    }
    Ok(CriterionOutcome { id, name: c.name, assertions: body.assertions, files: body.files, results: body.results, wall_seconds })
}

/// Criteria rerun by the reproducibility check: one exact, one Monte Carlo
/// and one SDE-driven criterion.
pub const REPRODUCIBILITY_TARGETS: [u8; 3] = [1, 5, 7];

/// Reruns the targets twice with the same seed, once in a single-threaded
/// pool, and compares every data file byte for byte.
fn reproducibility_suite(ctx: &SuiteContext) -> Result<Body, HarnessError> {
    let mut body = Body::default();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| HarnessError::Runtime(format!("thread pool: {e}")))?;
    let mut rows = Vec::new();
    for id in REPRODUCIBILITY_TARGETS {
        let a = run_criterion(id, ctx)?.all_files()?;
        let b = single.install(|| run_criterion(id, ctx))?.all_files()?;
        let names_match = a.iter().map(|f| &f.name).eq(b.iter().map(|f| &f.name));
        let mut differing = Vec::new();
        for (fa, fb) in a.iter().zip(&b) {
            let same = fa.bytes == fb.bytes;
            if !same {
                differing.push(fa.name.clone());
            }
            rows.push(ReproRow { criterion: id, file: fa.name.clone(), bytes: fa.bytes.len(), sha256: fa.sha256(), identical: same });
        }
        let detail = if differing.is_empty() && names_match {
            format!("{} files identical", a.len())
        } else {
            format!("differing: {}", differing.join(", "))
        };
        body.check(Assertion::new(format!("criterion {id} rerun is byte-identical"), names_match && differing.is_empty(), detail));
    }
    body.files.push(DataFile::csv("c9_reproducibility.csv", &rows)?);
    Ok(body)
}

#[derive(serde::Serialize)]
struct ReproRow {
    criterion: u8,
    file: String,
    bytes: usize,
    sha256: String,
    identical: bool,
}

// ------------------------------------------------------------ random instances

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub(crate) fn random_complex(r: &mut StreamRng) -> Complex64 {
    Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
}

/// `n` sites with weights in `[0.2, 2)`.
pub(crate) fn random_space(r: &mut StreamRng, n: usize) -> Result<Arc<SiteSpace>, HarnessError> {
    Ok(Arc::new(SiteSpace::with_sigma((0..n).map(|_| r.random_range(0.2..2.0)).collect())?))
}

pub(crate) fn random_table(r: &mut StreamRng, space: &Arc<SiteSpace>, role: Role) -> Result<SetFunction, HarnessError> {
    let values = (0..1usize << space.len()).map(|_| random_complex(r)).collect();
    Ok(SetFunction::from_values(space.clone(), space.full(), role, values)?)
}

pub(crate) fn random_field(r: &mut StreamRng, n: usize) -> Field {
    Field((0..n).map(|_| random_complex(r)).collect())
}

/// Probability table with every weight positive.
pub(crate) fn random_measure(r: &mut StreamRng, space: &Arc<SiteSpace>) -> Result<SetFunction, HarnessError> {
    let w: Vec<f64> = (0..1usize << space.len()).map(|_| r.random_range(0.01..1.0)).collect();
    let total: f64 = w.iter().sum();
    let values = w.into_iter().map(|v| c(v / total)).collect();
    Ok(SetFunction::from_values(space.clone(), space.full(), Role::Measure, values)?)
}

/// Symmetric pair matrix with entries in `[lo, hi)`, a fraction `p_inf` of
/// hard-core pairs and a random inverse temperature in `[0, 2)`.
pub(crate) fn random_potential(
    r: &mut StreamRng,
    space: &Arc<SiteSpace>,
    lo: f64,
    hi: f64,
    p_inf: f64,
) -> Result<(DiscretePotential, f64), HarnessError> {
    let n = space.len();
    let beta = r.random_range(0.0..2.0);
    let mut m = vec![vec![Energy::ZERO; n]; n];
    for i in 0..n {
        for j in 0..i {
            let e = if r.random::<f64>() < p_inf { Energy::Infinite } else { Energy::Finite(r.random_range(lo..hi)) };
            m[i][j] = e;
            m[j][i] = e;
        }
    }
    let p = PairPotential::matrix(m, beta)?;
    Ok((DiscretePotential::new(&p, space.clone(), None)?, beta))
}

/// Largest entry of `values`, or 0 for an empty list.
pub(crate) fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}
