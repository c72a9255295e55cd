//! TOML run configurations and their diagnostics.

use std::f64::consts::PI;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::experiment::presets::{
    binary_kappa_inverse_grid, held_binary_noise, clustering_kappa_inverse_fractions, per_pulse_pi_telegraph, CLUSTERING_TOTAL_TIME,
};
use crate::experiment::{FcsConfig, NoiseModel, SweepConfig};
use crate::protocol::Protocol;

/// A configuration problem, located by key and line where possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub key: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error in {}", self.path)?;
        if let Some(line) = self.line {
            write!(f, " at line {line}")?;
        }
        if let Some(key) = &self.key {
            write!(f, ", key `{key}`")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of the first `key = …` assignment.
pub fn locate_key(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| {
        l.trim_start()
            .strip_prefix(key)
            .is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

fn key_on_line(text: &str, line: usize) -> Option<String> {
    let l = text.lines().nth(line - 1)?;
    let (key, _) = l.split_once('=')?;
    let key = key.trim();
    (!key.is_empty() && !key.starts_with('[')).then(|| key.to_string())
}

fn backticked(message: &str) -> Option<String> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(message[start..start + len].to_string())
}

pub fn parse_toml<T: DeserializeOwned>(path: &str, text: &str) -> Result<T, ConfigError> {
    toml::from_str(text).map_err(|e| {
        let message = e.message().trim().to_string();
        let line = e.span().map(|s| line_of(text, s.start));
        let key = if message.contains("missing field") || message.contains("unknown field") {
            backticked(&message)
        } else {
            line.and_then(|l| key_on_line(text, l))
        };
        // a missing key has no line of its own; report where its table starts
        ConfigError {
            path: path.to_string(),
            key,
            line,
            message,
        }
    })
}

/// Turns a validation error into a config error pointing at the offending key.
pub fn semantic_error(path: &str, text: &str, err: Error) -> ConfigError {
    let mut root = &err;
    while let Error::GridPoint { source, .. } = root {
        root = source;
    }
    let key = match root {
        Error::InvalidParameter { name, .. } => Some(name.to_string()),
        _ => None,
    };
    let line = key.as_deref().and_then(|k| locate_key(text, k));
    ConfigError {
        path: path.to_string(),
        key,
        line,
        message: err.to_string(),
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ProtocolField {
    One(String),
    Many(Vec<String>),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    #[default]
    Sweep,
    KappaN,
    Clustering,
}

fn default_name() -> String {
    "sweep".to_string()
}

/// Contents of a `sweep` configuration file.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub mode: SweepMode,
    pub protocol: ProtocolField,
    pub realizations: usize,
    pub seed: Option<u64>,
    pub n_values: Option<Vec<usize>>,
    pub n_min: Option<usize>,
    pub n_max: Option<usize>,
    pub params: Option<Vec<f64>>,
    pub delta_theta: Option<f64>,
    pub noise: Option<NoiseModel>,
}

/// A sweep file with defaults filled in; its JSON form is what gets hashed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolvedSweep {
    pub name: String,
    pub mode: SweepMode,
    pub protocols: Vec<Protocol>,
    pub noise: NoiseModel,
    pub n_values: Vec<usize>,
    pub params: Vec<f64>,
    pub realizations: usize,
    pub master_seed: u64,
}

impl ResolvedSweep {
    pub fn configs(&self) -> Vec<SweepConfig> {
        self.protocols
            .iter()
            .map(|&protocol| SweepConfig {
                protocol,
                noise: self.noise.clone(),
                n_values: self.n_values.clone(),
                params: self.params.clone(),
                realizations: self.realizations,
                master_seed: self.master_seed,
            })
            .collect()
    }
}

fn err_at(path: &str, text: &str, key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        path: path.to_string(),
        key: Some(key.to_string()),
        line: locate_key(text, key),
        message: message.into(),
    }
}

fn protocols(path: &str, text: &str, field: &ProtocolField) -> Result<Vec<Protocol>, ConfigError> {
    let names: Vec<&str> = match field {
        ProtocolField::One(s) => vec![s.as_str()],
        ProtocolField::Many(v) => v.iter().map(String::as_str).collect(),
    };
    if names.is_empty() {
        return Err(err_at(path, text, "protocol", "no protocol given"));
    }
    if names.len() == 1 && names[0].eq_ignore_ascii_case("all") {
        return Ok(Protocol::ALL.to_vec());
    }
    names
        .iter()
        .map(|n| {
            n.parse::<Protocol>().map_err(|_| {
                err_at(path, text, "protocol", format!("unknown protocol `{n}` (expected qubit, cifm, pifm or all)"))
            })
        })
        .collect()
}

impl SweepFile {
    pub fn resolve(&self, path: &str, text: &str, seed: u64) -> Result<ResolvedSweep, ConfigError> {
        let protocols = protocols(path, text, &self.protocol)?;
        let n_values = match (&self.n_values, self.n_min, self.n_max) {
            (Some(v), None, None) => v.clone(),
            (None, Some(lo), Some(hi)) if lo <= hi => (lo..=hi).collect(),
            (None, Some(_), Some(_)) => return Err(err_at(path, text, "n_min", "n_min exceeds n_max")),
            (None, None, None) if self.mode == SweepMode::KappaN => (1..=40).collect(),
            (None, None, None) => {
                return Err(err_at(path, text, "n_values", "give n_values or n_min and n_max"))
            }
            _ => {
                return Err(err_at(path, text, "n_values", "use either n_values or n_min/n_max"))
            }
        };
        let (noise, params) = match self.mode {
            SweepMode::Sweep => {
                let noise = self.noise.clone().ok_or_else(|| ConfigError {
                    path: path.to_string(),
                    key: Some("noise".into()),
                    line: None,
                    message: "missing [noise] section".into(),
                })?;
                (noise, self.params.clone().unwrap_or_else(|| vec![0.0]))
            }
            SweepMode::KappaN => {
                let dt = self.delta_theta.unwrap_or(PI / 250.0);
                (held_binary_noise(dt), self.params.clone().unwrap_or_else(binary_kappa_inverse_grid))
            }
            SweepMode::Clustering => {
                let fractions = self.params.clone().unwrap_or_else(clustering_kappa_inverse_fractions);
                (per_pulse_pi_telegraph(), fractions.iter().map(|f| f * CLUSTERING_TOTAL_TIME).collect())
            }
        };
        if self.mode != SweepMode::Sweep && self.noise.is_some() {
            return Err(ConfigError {
                path: path.to_string(),
                key: Some("noise".into()),
                line: None,
                message: "the [noise] section is fixed by this mode and must be omitted".into(),
            });
        }
        let resolved = ResolvedSweep {
            name: self.name.clone(),
            mode: self.mode,
            protocols,
            noise,
            n_values,
            params,
            realizations: self.realizations,
            master_seed: seed,
        };
        for c in resolved.configs() {
            c.validate().map_err(|e| semantic_error(path, text, e))?;
        }
        Ok(resolved)
    }
}

fn default_fcs_name() -> String {
    "fcs".to_string()
}

fn default_h() -> f64 {
    0.01
}

/// Contents of an `fcs` configuration file.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FcsFile {
    #[serde(default = "default_fcs_name")]
    pub name: String,
    pub kappa: f64,
    pub theta: f64,
    pub total_time: f64,
    pub n_slots: Option<usize>,
    pub realizations: usize,
    pub seed: Option<u64>,
    #[serde(default = "default_h")]
    pub h: f64,
    pub lambdas: Option<Vec<f64>>,
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub lambda_count: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolvedFcs {
    pub name: String,
    pub h: f64,
    pub fcs: FcsConfig,
}

/// `count` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => (0..count)
            .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
            .collect(),
    }
}

impl FcsFile {
    pub fn resolve(&self, path: &str, text: &str, seed: u64) -> Result<ResolvedFcs, ConfigError> {
        let lambdas = match (&self.lambdas, self.lambda_min, self.lambda_max, self.lambda_count) {
            (Some(l), None, None, None) => l.clone(),
            (None, Some(lo), Some(hi), Some(n)) if n >= 1 && lo <= hi => linspace(lo, hi, n),
            (None, Some(_), Some(_), Some(_)) => {
                return Err(err_at(path, text, "lambda_count", "need lambda_count ≥ 1 and lambda_min ≤ lambda_max"))
            }
            _ => {
                return Err(err_at(
                    path,
                    text,
                    "lambdas",
                    "give lambdas or all of lambda_min, lambda_max, lambda_count",
                ))
            }
        };
        if !(self.h > 0.0) {
            return Err(err_at(path, text, "h", "finite-difference step must be positive"));
        }
        let fcs = FcsConfig {
            kappa: self.kappa,
            theta: self.theta,
            total_time: self.total_time,
            n_slots: self.n_slots.unwrap_or(64),
            lambdas,
            realizations: self.realizations,
            master_seed: seed,
        };
        fcs.validate().map_err(|e| semantic_error(path, text, e))?;
        Ok(ResolvedFcs {
            name: self.name.clone(),
            h: self.h,
            fcs,
        })
    }
}
