//! Result files: CSV and JSON serialization, atomic writes, content hashes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::HarnessError;

/// A named result file held in memory until the run writes it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl DataFile {
    pub fn csv<T: Serialize>(name: impl Into<String>, rows: &[T]) -> Result<Self, HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r).map_err(|e| HarnessError::Runtime(format!("csv: {e}")))?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Runtime(format!("csv: {e}")))?;
        Ok(DataFile { name: name.into(), bytes })
    }

    pub fn json<T: Serialize>(name: impl Into<String>, value: &T) -> Result<Self, HarnessError> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| HarnessError::Runtime(format!("json: {e}")))?;
        bytes.push(b'\n');
        Ok(DataFile { name: name.into(), bytes })
    }

    pub fn text(name: impl Into<String>, text: String) -> Self {
        DataFile { name: name.into(), bytes: text.into_bytes() }
    }

    pub fn sha256(&self) -> String {
        sha256_hex(&self.bytes)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Writes `bytes` to `path` through a temporary sibling and a rename, so
/// readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    let io = |e: std::io::Error| HarnessError::Runtime(format!("{}: {e}", path.display()));
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(bytes).map_err(io)?;
        f.sync_all().map_err(io)?;
    }
    fs::rename(&tmp, path).map_err(io)
}

pub fn write_files(dir: &Path, files: &[DataFile]) -> Result<Vec<PathBuf>, HarnessError> {
    files
        .iter()
        .map(|f| {
            let p = dir.join(&f.name);
            write_atomic(&p, &f.bytes)?;
            Ok(p)
        })
        .collect()
}
