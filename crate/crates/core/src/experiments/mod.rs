//! Seeded, reproducible experiment runs.
//!
//! A run reads an [`ExperimentConfig`], writes `manifest.json` into the
//! output directory, produces its result files and finally rewrites the
//! manifest with per-file SHA-256 checksums. Given the same config and master
//! seed every result file is byte-identical; only the manifest timestamps
//! differ.

mod config;
mod manifest;
mod plot;
mod run;

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::automata::{AutomataError, CorpusEntry, TmSpecFile};

pub use config::{
    parse_config, AgentChoice, AutonomyReportConfig, BuiltAgent, ComplexitySweepConfig, ConfigError, EcaRunConfig,
    EmbedCheckConfig, ExperimentConfig, ExperimentId, HaltingSweepConfig, InitialRow, PredictSweepConfig,
};
pub use manifest::{OutputChecksum, RunManifest, RunStatus, MANIFEST_FILE};
pub use plot::{emit_plot_data, PLOT_DIR};
pub use run::{config_hash, run_experiment};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Runtime(String),
}

impl RunError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        RunError::Io { path: path.to_path_buf(), source }
    }

    pub(crate) fn runtime(e: impl std::fmt::Display) -> Self {
        RunError::Runtime(e.to_string())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

const BUNDLED: [(&str, &str); 10] = [
    ("anbn.toml", include_str!("../../corpus/anbn.toml")),
    ("bb3.toml", include_str!("../../corpus/bb3.toml")),
    ("bb4.toml", include_str!("../../corpus/bb4.toml")),
    ("binary-increment.toml", include_str!("../../corpus/binary-increment.toml")),
    ("binary-mod3.toml", include_str!("../../corpus/binary-mod3.toml")),
    ("bouncer3.toml", include_str!("../../corpus/bouncer3.toml")),
    ("count-mod3.toml", include_str!("../../corpus/count-mod3.toml")),
    ("eraser.toml", include_str!("../../corpus/eraser.toml")),
    ("sweeper4.toml", include_str!("../../corpus/sweeper4.toml")),
    ("unary-add.toml", include_str!("../../corpus/unary-add.toml")),
];

/// The hand-built machines shipped with the crate.
pub fn bundled_corpus() -> Vec<CorpusEntry> {
    BUNDLED
        .iter()
        .map(|(file, text)| {
            let spec = TmSpecFile::parse(text).map_err(|e| AutomataError::SpecFile(format!("{file}: {e}")))?;
            let (machine, input) = spec.build()?;
            let name = spec.name.unwrap_or_else(|| file.trim_end_matches(".toml").to_string());
            Ok(CorpusEntry { name, machine, input })
        })
        .collect::<Result<_, AutomataError>>()
        .expect("bundled corpus is well formed")
}
