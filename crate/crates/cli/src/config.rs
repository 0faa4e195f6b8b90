//! Flat `key = value` scenario files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chiral_qubit::Chirality;

use crate::CliError;

/// Parsed scenario configuration. Keys are checked against the subcommand's
/// allow-list before any value is read.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScenarioConfig {
    values: BTreeMap<String, String>,
    /// Directory relative paths are resolved against.
    base_dir: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", idx + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(CliError::Config(format!("line {}: empty key or value", idx + 1)));
            }
            if values.insert(key.to_string(), value.to_string()).is_some() {
                return Err(CliError::Config(format!("line {}: duplicate key `{key}`", idx + 1)));
            }
        }
        Ok(ScenarioConfig { values, base_dir: None })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    /// Fails on the first key outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), CliError> {
        match self.values.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(CliError::Config(format!("unknown key `{k}`"))),
            None => Ok(()),
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => parse_finite(key, v),
        }
    }

    pub fn f64_opt(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.raw(key).map(|v| parse_finite(key, v)).transpose()
    }

    pub fn usize_opt(&self, key: &str) -> Result<Option<usize>, CliError> {
        self.raw(key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| CliError::Config(format!("`{key}` must be a non-negative integer, got `{v}`")))
            })
            .transpose()
    }

    pub fn u64_opt(&self, key: &str) -> Result<Option<u64>, CliError> {
        self.raw(key)
            .map(|v| {
                v.parse::<u64>()
                    .map_err(|_| CliError::Config(format!("`{key}` must be a non-negative integer, got `{v}`")))
            })
            .transpose()
    }

    pub fn chirality_or(&self, key: &str, default: Chirality) -> Result<Chirality, CliError> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => match v.replace('\u{2212}', "-").as_str() {
                "+1" | "1" | "+" => Ok(Chirality::Plus),
                "-1" | "-" => Ok(Chirality::Minus),
                _ => Err(CliError::Config(format!("`{key}` must be +1 or -1, got `{v}`"))),
            },
        }
    }

    /// Comma-separated list of finite numbers.
    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.raw(key)
            .map(|v| v.split(',').map(|item| parse_finite(key, item.trim())).collect())
            .transpose()
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.raw(key).map(|v| {
            let p = PathBuf::from(v);
            match (&self.base_dir, p.is_relative()) {
                (Some(base), true) => base.join(p),
                _ => p,
            }
        })
    }
}

fn parse_finite(key: &str, v: &str) -> Result<f64, CliError> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(CliError::Config(format!("`{key}` must be a finite number, got `{v}`"))),
    }
}
