use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

use super::config::RunConfig;

/// Summary of a run directory, stored as `manifest.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub code_version: String,
    pub seed: u64,
    /// Canonical `key=value` text of the configuration.
    pub config: String,
    pub started_unix_s: f64,
    pub finished_unix_s: f64,
    pub grid: GridSummary,
    pub physics: PhysicsSummary,
    pub steps: usize,
    /// `completed`, or `aborted: <reason>`.
    pub status: String,
    pub files: Vec<ManifestFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub dim: usize,
    pub points_per_axis: usize,
    pub box_length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicsSummary {
    pub mu: f64,
    pub nu: f64,
    pub dt: f64,
    pub t_end: f64,
    pub integrator: String,
}

/// An output file, named relative to the run directory. The hash ties the
/// file contents to this manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestFile {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

/// First 16 hex digits of the SHA-256 of the canonical configuration. The
/// seed is one of the configuration keys.
pub fn run_id(config: &RunConfig) -> String {
    let digest = Sha256::digest(config.canonical().as_bytes());
    hex::encode(&digest[..8])
}

impl ManifestFile {
    pub fn describe(dir: &Path, name: &str) -> Result<Self> {
        let path = dir.join(name);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        Ok(ManifestFile {
            name: name.to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
            bytes: bytes.len() as u64,
        })
    }
}

impl RunManifest {
    pub fn new(config: &RunConfig) -> Self {
        let g = &config.solver.grid;
        RunManifest {
            run_id: run_id(config),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            config: config.canonical(),
            started_unix_s: 0.0,
            finished_unix_s: 0.0,
            grid: GridSummary {
                dim: g.dim(),
                points_per_axis: g.points_per_axis(),
                box_length: g.box_length(),
            },
            physics: PhysicsSummary {
                mu: config.solver.mu,
                nu: config.solver.nu,
                dt: config.solver.dt,
                t_end: config.solver.t_end,
                integrator: config.solver.integrator.to_string(),
            },
            steps: 0,
            status: String::new(),
            files: Vec::new(),
        }
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Series(format!("cannot serialize manifest: {e}")))?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })
    }

    /// Checks that every listed file exists in `dir` with the recorded hash.
    pub fn verify(&self, dir: impl AsRef<Path>) -> Result<()> {
        for f in &self.files {
            let now = ManifestFile::describe(dir.as_ref(), &f.name)?;
            if now.sha256 != f.sha256 {
                return Err(Error::Series(format!(
                    "{} does not match the manifest of run {}",
                    f.name, self.run_id
                )));
            }
        }
        Ok(())
    }
}
