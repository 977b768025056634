//! Orchestration behind the `snnfc` binary: layered run configuration,
//! per-system presets, the commands themselves, run manifests and result
//! tables.

mod commands;
mod config;
mod report;

pub use commands::{eval, hw_eval, load_dataset, prepare, report, sweep_noise, train, Context, Outcome};
pub use config::{layered_config, model_label, preset, DataConfig, HardwareConfig, RunConfig, System};
pub use report::{read_rows, render_report, write_rows, Report, ResultRow};

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::uci::DatasetManifest;
use crate::learning::{EpochLog, Evaluation, MODEL_VERSION};
use crate::{Error, Result};

/// What a command did, with enough context to redo it bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub config: RunConfig,
    pub dataset: Option<DatasetManifest>,
    pub model_file: Option<PathBuf>,
    pub model_sha256: Option<String>,
    /// Crate and model-format version that produced the artifacts.
    pub artifact_version: String,
    pub metrics: Option<Evaluation>,
    pub rows: Vec<ResultRow>,
    pub loss_curve: Vec<EpochLog>,
    pub wall_clock_ms: u64,
}

impl RunManifest {
    pub fn new(command: &str, ctx: &Context) -> Self {
        Self {
            command: command.to_string(),
            argv: ctx.argv.clone(),
            config: ctx.config.clone(),
            dataset: None,
            model_file: None,
            model_sha256: None,
            artifact_version: format!("snnfc {} / model format v{MODEL_VERSION}", env!("CARGO_PKG_VERSION")),
            metrics: None,
            rows: Vec::new(),
            loss_curve: Vec::new(),
            wall_clock_ms: 0,
        }
    }

    /// Path of the manifest describing `artifact`.
    pub fn path_for(artifact: &Path) -> PathBuf {
        let mut s = artifact.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_file(path, serde_json::to_string_pretty(self)?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
