//! Scenario runner for the chiral qubit simulator.
//!
//! Each subcommand reads a flat `key = value` config, runs one experiment and
//! renders a deterministic text report (CSV for trajectories). Failures map to
//! fixed exit codes, see [`CliError::exit_code`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::path::Path;

use thiserror::Error;

pub mod commands;
pub mod config;

pub use commands::{run_beat, run_chain, run_chern, run_damp, run_device, run_rabi, Subcommand};
pub use config::ScenarioConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Gapless(String),
    #[error("{0}")]
    NotConverged(String),
    #[error("{0}")]
    StepTooLarge(String),
    #[error("script parse error: {0}")]
    ScriptParse(String),
    #[error("{0}")]
    LinkOff(String),
    #[error("{0}")]
    Runtime(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Runtime(_) | CliError::Io(_) => 1,
            CliError::Gapless(_) => 2,
            CliError::NotConverged(_) => 3,
            CliError::StepTooLarge(_) => 4,
            CliError::ScriptParse(_) => 5,
            CliError::LinkOff(_) => 6,
        }
    }
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory followed by a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let file_name = path
        .file_name()
        .ok_or_else(|| CliError::Config(format!("invalid output path {}", path.display())))?
        .to_string_lossy();
    let tmp = dir.join(format!(".{file_name}.tmp-{}", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })?;
    Ok(())
}
