//! Append-only JSON-lines record of every command invocation.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::ExperimentConfig;

pub const MANIFEST_FILE: &str = "manifest.jsonl";

/// Metrics of one (SNR point, method, trial) cell.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct TrialRecord {
    pub method: String,
    pub snr: f64,
    pub sigma: f64,
    pub trial: usize,
    /// Seed of the trial's dataset; every other stream is derived from it.
    pub seed: u64,
    pub relative_error: f64,
    pub iterations: usize,
    pub converged: bool,
    pub wall_time_s: f64,
    pub sync_time_s: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub command: &'a str,
    pub code_version: &'a str,
    pub started_at: f64,
    pub finished_at: f64,
    pub config: &'a ExperimentConfig,
    pub seeds: Vec<(String, u64)>,
    pub trials: &'a [TrialRecord],
    pub outputs: Vec<PathBuf>,
}

pub fn unix_time() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

pub fn append(dir: &Path, manifest: &RunManifest<'_>) -> anyhow::Result<()> {
    let line = serde_json::to_string(manifest)?;
    let mut f = OpenOptions::new().create(true).append(true).open(dir.join(MANIFEST_FILE))?;
    writeln!(f, "{line}")?;
    Ok(())
}
