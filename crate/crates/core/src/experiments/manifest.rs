//! Run manifests: written when a run starts and finalized with output
//! checksums when it ends.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::{sha256_hex, ExperimentId, RunError};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "state")]
pub enum RunStatus {
    Running,
    Completed,
    Failed { cause: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputChecksum {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: ExperimentId,
    pub artifact_version: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub started_unix: u64,
    pub finished_unix: Option<u64>,
    pub status: RunStatus,
    /// Sorted by file name.
    pub outputs: Vec<OutputChecksum>,
}

pub(crate) fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

impl RunManifest {
    pub fn start(experiment: ExperimentId, config_hash: String, master_seed: u64) -> Self {
        Self {
            experiment,
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash,
            master_seed,
            started_unix: unix_now(),
            finished_unix: None,
            status: RunStatus::Running,
            outputs: Vec::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<(), RunError> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        let path = dir.join(MANIFEST_FILE);
        std::fs::write(&path, text).map_err(|e| RunError::io(&path, e))
    }

    pub fn load(dir: &Path) -> Result<Self, RunError> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| RunError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| RunError::Runtime(format!("{}: {e}", path.display())))
    }

    /// Re-hashes every listed output and returns the files whose contents
    /// no longer match.
    pub fn verify(&self, dir: &Path) -> Result<Vec<String>, RunError> {
        let mut bad = Vec::new();
        for o in &self.outputs {
            let path = dir.join(&o.file);
            let bytes = std::fs::read(&path).map_err(|e| RunError::io(&path, e))?;
            if sha256_hex(&bytes) != o.sha256 || bytes.len() as u64 != o.bytes {
                bad.push(o.file.clone());
            }
        }
        Ok(bad)
    }
}
