//! Verification pipelines behind the command-line tool.

pub mod commands;
pub mod config;
pub mod format;
pub mod reference;
pub mod report;
pub mod validate;

use std::path::Path;

use thiserror::Error;

pub use commands::{cmd_compare, cmd_eval, cmd_figure, cmd_recurrence, EvalRequest, Regime};
pub use config::{Format, Overrides, RunConfig};
pub use validate::cmd_validate;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure in stage {stage}: {message}")]
    Numerical { stage: String, message: String },
    #[error("cannot write {path}: {message}")]
    Io { path: String, message: String },
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Io { .. } => 2,
            HarnessError::Numerical { .. } => 3,
        }
    }
}

/// Wraps any numerical error with the name of the stage it came from.
pub fn stage<T, E: std::fmt::Display>(name: &str, r: Result<T, E>) -> Result<T, HarnessError> {
    r.map_err(|e| HarnessError::Numerical { stage: name.into(), message: e.to_string() })
}

/// A named output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub content: String,
}

/// Result of one command: the primary artifact first, then any extra files and the report.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub pass: bool,
    /// Human-readable summary lines for stderr.
    pub summary: Vec<String>,
}

impl Outcome {
    pub fn primary(&self) -> &Artifact {
        &self.artifacts[0]
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }

    pub fn write_all(&self, dir: &Path) -> Result<(), HarnessError> {
        let io =
            |p: &Path, e: std::io::Error| HarnessError::Io { path: p.display().to_string(), message: e.to_string() };
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        for a in &self.artifacts {
            let p = dir.join(&a.name);
            std::fs::write(&p, &a.content).map_err(|e| io(&p, e))?;
        }
        Ok(())
    }
}
