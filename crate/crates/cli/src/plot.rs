//! Plot-ready CSV series. No plotting happens here; the files are meant for
//! gnuplot, matplotlib or a spreadsheet.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::output::{write_atomic, DataFile};
use crate::HarnessError;

/// One solver iteration: the weighted step and the geometric envelope
/// `delta_1 * rate^(n - 1)` implied by the contraction bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub series: u32,
    pub iteration: usize,
    pub delta: f64,
    pub bound: f64,
}

/// One bin of a pair correlation estimate, with an optional reference value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrRow {
    pub t: Option<f64>,
    pub lo: f64,
    pub hi: f64,
    pub g: f64,
    pub se: f64,
    pub reference: Option<f64>,
}

/// A sample of `k_t^(1)(x)` (level 1) or of `k_t^(2)` at separation `x` (level 2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KtRow {
    pub source: String,
    pub t: f64,
    pub level: u8,
    pub x: f64,
    pub value: f64,
    pub se: Option<f64>,
}

/// Error or residual of a discretization at spacing `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub study: String,
    pub h: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunResults {
    pub convergence: Vec<ConvergenceRow>,
    pub g_r: Vec<GrRow>,
    pub kt_profiles: Vec<KtRow>,
    pub residual_vs_h: Vec<ResidualRow>,
}

pub const PLOT_KINDS: [&str; 4] = ["convergence", "g_r", "kt_profiles", "residual_vs_h"];

impl RunResults {
    pub fn is_empty(&self) -> bool {
        self.convergence.is_empty() && self.g_r.is_empty() && self.kt_profiles.is_empty() && self.residual_vs_h.is_empty()
    }

    /// Kinds with at least one row.
    pub fn available_kinds(&self) -> Vec<&'static str> {
        PLOT_KINDS.into_iter().filter(|k| self.rows(k).is_some_and(|n| n > 0)).collect()
    }

    fn rows(&self, kind: &str) -> Option<usize> {
        Some(match kind {
            "convergence" => self.convergence.len(),
            "g_r" => self.g_r.len(),
            "kt_profiles" => self.kt_profiles.len(),
            "residual_vs_h" => self.residual_vs_h.len(),
            _ => return None,
        })
    }

    pub fn extend(&mut self, other: RunResults) {
        self.convergence.extend(other.convergence);
        self.g_r.extend(other.g_r);
        self.kt_profiles.extend(other.kt_profiles);
        self.residual_vs_h.extend(other.residual_vs_h);
    }

    /// The CSV for `kind`, in memory.
    pub fn plot_file(&self, kind: &str) -> Result<DataFile, HarnessError> {
        let n = self
            .rows(kind)
            .ok_or_else(|| HarnessError::Plot(format!("unknown plot kind `{kind}`; supported kinds: {}", PLOT_KINDS.join(", "))))?;
        if n == 0 {
            return Err(HarnessError::Plot(format!("no `{kind}` data in these results")));
        }
        let name = format!("plot_{kind}.csv");
        match kind {
            "convergence" => DataFile::csv(name, &self.convergence),
            "g_r" => DataFile::csv(name, &self.g_r),
            "kt_profiles" => DataFile::csv(name, &self.kt_profiles),
            _ => DataFile::csv(name, &self.residual_vs_h),
        }
    }
}

/// Writes the CSV series for `kind` into `dir` and returns its path.
pub fn emit_plotdata(results: &RunResults, kind: &str, dir: &Path) -> Result<PathBuf, HarnessError> {
    if results.is_empty() {
        return Err(HarnessError::Plot("results are empty; nothing to plot".into()));
    }
    let file = results.plot_file(kind)?;
    let path = dir.join(&file.name);
    write_atomic(&path, &file.bytes)?;
    Ok(path)
}
