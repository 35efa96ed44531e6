use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use qvlms::experiment::{CellResult, ExperimentConfig};
use serde::{Deserialize, Serialize};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Protocol1,
    Protocol2,
    Run,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Protocol1 => "protocol1",
            Command::Protocol2 => "protocol2",
            Command::Run => "run",
        }
    }
}

/// Step size and bound resolved for one `(algorithm, q, SNR)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedCell {
    pub algorithm: String,
    pub q: Option<f64>,
    pub snr_db: f64,
    pub step_size: f64,
    pub mu_bound: f64,
    pub lambda_max: f64,
    pub divergence_count: usize,
}

impl From<&CellResult> for ResolvedCell {
    fn from(c: &CellResult) -> Self {
        Self {
            algorithm: c.algorithm.label().to_string(),
            q: c.q,
            snr_db: c.snr_db,
            step_size: c.step_size,
            mu_bound: c.mu_bound,
            lambda_max: c.lambda_max,
            divergence_count: c.divergence_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Record of one CLI run. `command` and `config` alone reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    pub out_dir: PathBuf,
    pub out_dir_created: bool,
    /// File names relative to `out_dir`.
    pub outputs: Vec<String>,
    pub cells: Vec<ResolvedCell>,
    pub warnings: Vec<String>,
    pub checks: Vec<Check>,
}

impl RunManifest {
    pub fn new(
        command: Command,
        config: ExperimentConfig,
        out_dir: &Path,
        out_dir_created: bool,
    ) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            seed: config.seed,
            config,
            started_unix_ms: now_ms(),
            finished_unix_ms: 0,
            out_dir: out_dir.to_path_buf(),
            out_dir_created,
            outputs: Vec::new(),
            cells: Vec::new(),
            warnings: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn all_checks_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn read(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(std::io::Error::other)
    }

    /// Stamps the finish time and writes `manifest.json` into `out_dir`.
    pub fn finish(&mut self) -> std::io::Result<PathBuf> {
        self.finished_unix_ms = now_ms();
        let path = self.out_dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}
