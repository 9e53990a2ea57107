//! Output bookkeeping. Every file goes through [`Outputs`], which records
//! its checksum; the manifest is written last, via rename, so a directory
//! holding a manifest holds a complete run.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use kpzlab::io::{sha256_hex, CODE_VERSION};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliError;

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: RunConfig,
    pub code_version: String,
    pub wall_time_s: f64,
    pub outputs: Vec<OutputEntry>,
    pub warnings: Vec<String>,
}

pub struct Outputs {
    dir: PathBuf,
    started: Instant,
    entries: Vec<OutputEntry>,
    warnings: Vec<String>,
}

impl Outputs {
    /// Creates `dir` and removes any manifest left by an earlier run.
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        match fs::remove_file(dir.join(MANIFEST)) {
            Err(e) if e.kind() != std::io::ErrorKind::NotFound => return Err(e.into()),
            _ => {}
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            started: Instant::now(),
            entries: Vec::new(),
            warnings: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        fs::write(&path, bytes)?;
        self.record(name)?;
        Ok(path)
    }

    /// Record a file some other writer has already produced.
    pub fn record(&mut self, name: &str) -> Result<(), CliError> {
        let bytes = fs::read(self.path(name))?;
        self.entries.retain(|e| e.path != name);
        self.entries.push(OutputEntry {
            path: name.into(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        log::warn!("{msg}");
        if !self.warnings.contains(&msg) {
            self.warnings.push(msg);
        }
    }

    pub fn finish(self, config: &RunConfig) -> Result<RunManifest, CliError> {
        let manifest = RunManifest {
            config: config.clone(),
            code_version: CODE_VERSION.into(),
            wall_time_s: self.started.elapsed().as_secs_f64(),
            outputs: self.entries,
            warnings: self.warnings,
        };
        let tmp = self.dir.join(format!(".{MANIFEST}.tmp"));
        fs::write(&tmp, serde_json::to_string_pretty(&manifest)? + "\n")?;
        fs::rename(&tmp, self.dir.join(MANIFEST))?;
        Ok(manifest)
    }
}
