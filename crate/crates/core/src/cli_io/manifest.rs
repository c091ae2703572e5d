use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestFile {
    /// Path relative to the run directory.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

impl ManifestFile {
    pub fn describe(dir: &Path, rel: &str) -> Result<Self, CliError> {
        let path = dir.join(rel);
        let data = fs::read(&path).map_err(|e| CliError::io(&path, e, None))?;
        Ok(ManifestFile {
            path: rel.to_owned(),
            bytes: data.len() as u64,
            sha256: hex::encode(Sha256::digest(&data)),
        })
    }
}

/// Provenance record written next to the outputs of a pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// SHA-256 of the canonical effective config.
    pub config_sha256: String,
    pub seed: u64,
    /// RFC 3339, UTC.
    pub started_at: String,
    pub finished_at: String,
    pub inputs: Vec<ManifestFile>,
    pub outputs: Vec<ManifestFile>,
}
