use std::path::{Path, PathBuf};

use clap::Args;
use qvlms::experiment::{Algorithm, ExperimentConfig};
use qvlms::volterra::RegressorMode;
use serde::de::DeserializeOwned;
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("config key `{key}`: {message}")]
    Key { key: String, message: String },
    #[error("invalid config: {0}")]
    Invalid(#[from] qvlms::Error),
}

fn key_error(key: &str, message: impl std::fmt::Display) -> ConfigError {
    ConfigError::Key {
        key: key.to_string(),
        message: message.to_string(),
    }
}

/// Command-line overrides, applied on top of the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Memory length M of the Volterra filter.
    #[arg(long = "m", alias = "memory-length", value_name = "M")]
    pub memory_length: Option<usize>,
    /// Regressor expansion: `raw` or `orthonormalized`.
    #[arg(long)]
    pub mode: Option<RegressorMode>,
    /// Uniform q value(s), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<f64>>,
    /// Absolute step size.
    #[arg(long, conflicts_with = "mu_frac")]
    pub mu: Option<f64>,
    /// Step size as a fraction of 1/λ_max(A).
    #[arg(long)]
    pub mu_frac: Option<f64>,
    /// SNR value(s) in dB, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub snr_db: Option<Vec<f64>>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Algorithm(s): `vlms`, `qvlms`, `whitened`.
    #[arg(long, value_delimiter = ',')]
    pub algorithm: Option<Vec<Algorithm>>,
    /// Standard deviation of the initial weights; 0 starts from zeros.
    #[arg(long)]
    pub init_std: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(m) = self.memory_length {
            cfg.memory_length = m;
        }
        if let Some(mode) = self.mode {
            cfg.regressor_mode = mode;
        }
        if let Some(q) = &self.q {
            cfg.q_values = q.clone();
        }
        if let Some(mu) = self.mu {
            cfg.mu = Some(mu);
            cfg.mu_frac = None;
        }
        if let Some(frac) = self.mu_frac {
            cfg.mu_frac = Some(frac);
            cfg.mu = None;
        }
        if let Some(snr) = &self.snr_db {
            cfg.snr_db = snr.clone();
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(i) = self.iterations {
            cfg.iterations = i;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(a) = &self.algorithm {
            cfg.algorithms = a.clone();
        }
        if let Some(std) = self.init_std {
            cfg.init_std = Some(std);
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> From<OneOrMany<T>> for Vec<T> {
    fn from(v: OneOrMany<T>) -> Self {
        match v {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(xs) => xs,
        }
    }
}

fn typed<T: DeserializeOwned>(key: &str, value: toml::Value) -> Result<T, ConfigError> {
    value
        .try_into()
        .map_err(|e: toml::de::Error| key_error(key, e.message()))
}

fn list<T: DeserializeOwned>(key: &str, value: toml::Value) -> Result<Vec<T>, ConfigError> {
    typed::<OneOrMany<T>>(key, value).map(Vec::from)
}

/// Applies flat `key = value` pairs to `cfg`.
pub fn apply_table(cfg: &mut ExperimentConfig, table: toml::Table) -> Result<(), ConfigError> {
    if table.contains_key("mu") && table.contains_key("mu_frac") {
        return Err(key_error("mu", "cannot be combined with `mu_frac`"));
    }
    for (key, value) in table {
        match key.as_str() {
            "memory_length" => cfg.memory_length = typed(&key, value)?,
            "regressor_mode" => cfg.regressor_mode = typed(&key, value)?,
            "q_values" | "q" => cfg.q_values = list(&key, value)?,
            "mu" => {
                cfg.mu = Some(typed(&key, value)?);
                cfg.mu_frac = None;
            }
            "mu_frac" => {
                cfg.mu_frac = Some(typed(&key, value)?);
                cfg.mu = None;
            }
            "snr_db" => cfg.snr_db = list(&key, value)?,
            "trials" => cfg.trials = typed(&key, value)?,
            "iterations" => cfg.iterations = typed(&key, value)?,
            "seed" => cfg.seed = typed(&key, value)?,
            "algorithms" => cfg.algorithms = list(&key, value)?,
            "init_std" => cfg.init_std = Some(typed(&key, value)?),
            "steady_state_fraction" => cfg.steady_state_fraction = typed(&key, value)?,
            "nwd_targets_db" => cfg.nwd_targets_db = list(&key, value)?,
            _ => return Err(key_error(&key, "unknown key")),
        }
    }
    Ok(())
}

/// Checks beyond [`ExperimentConfig::validate`] that the CLI needs: every
/// number must survive a JSON round trip through the manifest.
pub fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    cfg.validate()?;
    if let Some(s) = cfg.snr_db.iter().find(|s| !s.is_finite()) {
        return Err(key_error("snr_db", format!("must be finite, got {s}")));
    }
    Ok(())
}

/// Layers `base`, the optional config file and `overrides`, then validates.
pub fn load(
    base: ExperimentConfig,
    path: Option<&Path>,
    overrides: &Overrides,
) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = base;
    if let Some(path) = path {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
        apply_table(&mut cfg, table)?;
    }
    overrides.apply(&mut cfg);
    validate(&cfg)?;
    Ok(cfg)
}

/// Defaults for `qvlms run`.
pub fn run_default() -> ExperimentConfig {
    ExperimentConfig {
        q_values: vec![1.0],
        mu: Some(0.01),
        mu_frac: None,
        snr_db: vec![20.0],
        trials: 100,
        iterations: 1000,
        algorithms: vec![Algorithm::Qvlms],
        ..ExperimentConfig::protocol1_default()
    }
}
