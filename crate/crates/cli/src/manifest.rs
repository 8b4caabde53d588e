//! Run manifest, written once at the end of every run that got past config
//! parsing. It is the only output that contains wall-clock times.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::output::write_atomic;
use crate::HarnessError;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Assertion { name: name.into(), passed, detail: detail.into() }
    }

    /// `value <= limit`, with both numbers in the detail.
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::new(name, value <= limit, format!("{value:.3e} <= {limit:.3e}"))
    }

    /// `value >= limit`.
    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::new(name, value >= limit, format!("{value:.3e} >= {limit:.3e}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub name: String,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub seed: u64,
    pub rng_algorithm: String,
    pub jobs: usize,
    pub tolerance_scale: f64,
    /// Effective configuration, with defaults and command-line overrides applied.
    pub config: serde_json::Value,
    /// SHA-256 of every input file, keyed by path.
    pub input_hashes: BTreeMap<String, String>,
    pub stages: Vec<Stage>,
    pub assertions: Vec<Assertion>,
    pub outputs: Vec<OutputRecord>,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<(), HarnessError> {
        let mut bytes = serde_json::to_vec_pretty(self).map_err(|e| HarnessError::Runtime(format!("manifest: {e}")))?;
        bytes.push(b'\n');
        write_atomic(&dir.join(MANIFEST_NAME), &bytes)
    }

    pub fn read(dir: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(dir.join(MANIFEST_NAME))
            .map_err(|e| HarnessError::Runtime(format!("{}: {e}", dir.join(MANIFEST_NAME).display())))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Runtime(format!("manifest: {e}")))
    }
}
