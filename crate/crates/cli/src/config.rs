//! Experiment configuration files.
//!
//! A config is a JSON object with optional `seed`, `output_dir` and
//! `tolerance_scale` keys and exactly one subcommand block, for example
//! `{"seed": 7, "fixedpoint": {"sites": 8, "sigma": 0.1, "potential": {...}}}`.

use std::path::PathBuf;

use bogo_core::dynamics::{Bump, Closure, InitRule};
use bogo_core::equilibrium::{PotentialSpec, RadialPotential};
use bogo_core::gcmc::{Bins, GnzTestFunction, PeriodicBox};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

/// Seed used when neither the config nor the command line sets one.
pub const DEFAULT_SEED: u64 = 20_240_611;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Subcommand {
    Exact,
    Fixedpoint,
    Gcmc,
    Sde,
    Hierarchy,
    Verify,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Exact => "exact",
            Subcommand::Fixedpoint => "fixedpoint",
            Subcommand::Gcmc => "gcmc",
            Subcommand::Sde => "sde",
            Subcommand::Hierarchy => "hierarchy",
            Subcommand::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Multiplies every assertion tolerance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixedpoint: Option<FixedPointConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gcmc: Option<GcmcConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sde: Option<SdeRunConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hierarchy: Option<HierarchyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyConfig>,
}

impl ExperimentConfig {
    /// Config with only the default block of `sub`.
    pub fn default_for(sub: Subcommand) -> Self {
        let mut c = ExperimentConfig {
            seed: None,
            output_dir: None,
            tolerance_scale: None,
            exact: None,
            fixedpoint: None,
            gcmc: None,
            sde: None,
            hierarchy: None,
            verify: None,
        };
        match sub {
            Subcommand::Exact => c.exact = Some(ExactConfig::default()),
            Subcommand::Fixedpoint => c.fixedpoint = Some(FixedPointConfig::default()),
            Subcommand::Gcmc => c.gcmc = Some(GcmcConfig::default()),
            Subcommand::Sde => c.sde = Some(SdeRunConfig::default()),
            Subcommand::Hierarchy => c.hierarchy = Some(HierarchyConfig::default()),
            Subcommand::Verify => c.verify = Some(VerifyConfig::default()),
        }
        c
    }

    /// Parses JSON text, reporting the offending field path and position.
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let inner = e.inner();
            HarnessError::Config(format!("field `{}`: {} (line {}, column {})", e.path(), inner, inner.line(), inner.column()))
        })?;
        cfg.subcommand()?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The single subcommand block present.
    pub fn subcommand(&self) -> Result<Subcommand, HarnessError> {
        let present: Vec<Subcommand> = [
            (self.exact.is_some(), Subcommand::Exact),
            (self.fixedpoint.is_some(), Subcommand::Fixedpoint),
            (self.gcmc.is_some(), Subcommand::Gcmc),
            (self.sde.is_some(), Subcommand::Sde),
            (self.hierarchy.is_some(), Subcommand::Hierarchy),
            (self.verify.is_some(), Subcommand::Verify),
        ]
        .into_iter()
        .filter_map(|(on, s)| on.then_some(s))
        .collect();
        match present.as_slice() {
            [one] => Ok(*one),
            [] => Err(HarnessError::Config(
                "config needs exactly one subcommand block (exact, fixedpoint, gcmc, sde, hierarchy or verify); found none".into(),
            )),
            many => Err(HarnessError::Config(format!(
                "config needs exactly one subcommand block; found {}",
                many.iter().map(|s| s.name()).collect::<Vec<_>>().join(", ")
            ))),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if let Some(s) = self.tolerance_scale {
            if !(s.is_finite() && s > 0.0) {
                return Err(HarnessError::Config("field `tolerance_scale`: must be positive".into()));
            }
        }
        if let Some(v) = &self.verify {
            crate::suites::parse_suite(&v.suite).map_err(|e| HarnessError::Config(format!("field `verify.suite`: {e}")))?;
        }
        Ok(())
    }
}

/// A 1-D lattice of sites with uniform weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub sites: usize,
    #[serde(default = "one")]
    pub spacing: f64,
    pub sigma: f64,
    /// Ring circumference; open chain when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

fn default_chain_potential() -> PotentialSpec {
    PotentialSpec::Radial { v: bogo_core::equilibrium::RadialForm::Poly { amplitude: 1.5, power: 3 }, beta: 1.0, cutoff: 2.5 }
}

/// Exact enumeration of a discrete Gibbs measure with identity checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactConfig {
    pub lattice: LatticeSpec,
    pub potential: PotentialSpec,
    /// Test field for the Bogoliubov and GNZ checks; a fixed ramp when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
}

impl Default for ExactConfig {
    fn default() -> Self {
        ExactConfig {
            lattice: LatticeSpec { sites: 8, spacing: 1.0, sigma: 0.3, period: None },
            potential: default_chain_potential(),
            theta: None,
        }
    }
}

/// Fixed-point solution of `L = 1 + JL`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedPointConfig {
    pub lattice: LatticeSpec,
    pub potential: PotentialSpec,
    /// Overrides `potential.beta` with the inverse temperature giving this Mayer norm.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mayer_norm: Option<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Compare with the enumerated Gibbs correlation function.
    #[serde(default = "yes")]
    pub compare_exact: bool,
}

fn default_tol() -> f64 {
    1e-10
}

fn default_max_iter() -> usize {
    1000
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        FixedPointConfig {
            lattice: LatticeSpec { sites: 8, spacing: 1.0, sigma: 0.1, period: None },
            potential: default_chain_potential(),
            mayer_norm: Some(0.3),
            tol: default_tol(),
            max_iter: default_max_iter(),
            alpha: None,
            compare_exact: true,
        }
    }
}

/// Grand-canonical sampling with correlation and GNZ estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GcmcConfig {
    pub sim_box: PeriodicBox,
    pub z: f64,
    pub beta: f64,
    pub potential: RadialPotential,
    pub n_sweeps: usize,
    pub burn_in: usize,
    pub thinning: usize,
    #[serde(default = "default_chains")]
    pub n_chains: usize,
    pub bins: Bins,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gnz: Option<GnzConfig>,
}

fn default_chains() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GnzConfig {
    /// Test functions; a 20-function family of interval indicators is used when absent (1-D only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Vec<GnzTestFunction>>,
    #[serde(default = "default_grid")]
    pub grid_per_side: usize,
    /// Activity multiplier of the negative control (skipped when absent).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wrong_activity_factor: Option<f64>,
}

fn default_grid() -> usize {
    1000
}

impl Default for GcmcConfig {
    fn default() -> Self {
        GcmcConfig {
            sim_box: PeriodicBox { dim: 1, side: 10.0 },
            z: 0.3,
            beta: 1.0,
            potential: RadialPotential::poly(1.0, 1.0).expect("valid"),
            n_sweeps: 100_000,
            burn_in: 1000,
            thinning: 10,
            n_chains: 4,
            bins: Bins { r_max: 2.0, n_bins: 10 },
            gnz: Some(GnzConfig { family: None, grid_per_side: 1000, wrong_activity_factor: Some(1.2) }),
        }
    }
}

/// Euler-Maruyama simulation of interacting Brownian particles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdeRunConfig {
    pub sim_box: PeriodicBox,
    pub init: InitRule,
    pub beta: f64,
    pub potential: RadialPotential,
    pub dt: f64,
    pub t_end: f64,
    pub n_replicas: usize,
    #[serde(default = "default_force_cap")]
    pub force_cap: f64,
    #[serde(default = "yes")]
    pub noise: bool,
    pub record_times: Vec<f64>,
    pub bins: Bins,
    #[serde(default = "default_density_bins")]
    pub density_bins: usize,
}

fn default_force_cap() -> f64 {
    100.0
}

fn default_density_bins() -> usize {
    10
}

impl Default for SdeRunConfig {
    fn default() -> Self {
        SdeRunConfig {
            sim_box: PeriodicBox { dim: 1, side: 10.0 },
            init: InitRule::Poisson { z: 0.3 },
            beta: 1.0,
            potential: RadialPotential::poly_power(2.0, 4, 1.0).expect("valid"),
            dt: 1e-3,
            t_end: 0.5,
            n_replicas: 500,
            force_cap: 100.0,
            noise: true,
            record_times: vec![0.0, 0.1, 0.5],
            bins: Bins { r_max: 2.0, n_bins: 5 },
            density_bins: 10,
        }
    }
}

/// Initial data of the hierarchy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum HierarchyInit {
    /// `k1 = z`, `k2 = z^2`; translation-invariant storage unless `full`.
    Poisson {
        z: f64,
        #[serde(default)]
        full: bool,
    },
    /// `k1 = z (1 + amplitude cos(2 pi mode x / side))` with `k2 = k1 (x) k1`.
    Cosine { z: f64, amplitude: f64, mode: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchyConfig {
    pub side: f64,
    pub points: usize,
    pub init: HierarchyInit,
    pub closure: Closure,
    pub potential: PotentialSpec,
    pub t_end: f64,
    /// Defaults to the stability limit `h^2 / 4`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub record_times: Vec<f64>,
    /// Test field for functional-evolution residuals at the record times.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_field: Option<Bump>,
}

impl Default for HierarchyConfig {
    fn default() -> Self {
        HierarchyConfig {
            side: 10.0,
            points: 200,
            init: HierarchyInit::Poisson { z: 0.2, full: false },
            closure: Closure::Product,
            potential: PotentialSpec::Radial {
                v: bogo_core::equilibrium::RadialForm::Poly { amplitude: 2.0, power: 4 },
                beta: 1.0,
                cutoff: 1.0,
            },
            t_end: 0.6,
            dt: None,
            record_times: vec![0.1, 0.5],
            residual_field: Some(Bump { center: 5.0, width: 4.0, amplitude: 0.5, period: Some(10.0) }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_suite")]
    pub suite: String,
}

fn default_suite() -> String {
    "all".into()
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { suite: default_suite() }
    }
}
