//! Command-line front end: configuration, dispatch, acceptance checks and
//! CSV/JSON emission.

pub mod checks;
pub mod commands;
pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::{Command, RunConfig};
use crate::output::{Artifact, Header};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub checks: Vec<checks::CheckOutcome>,
}

impl RunReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Validates `cfg` for `command`, computes every artifact, then writes them
/// under `out`. Nothing is written when validation or computation fails.
pub fn run(command: Command, cfg: &RunConfig, out: &Path) -> Result<RunReport, CliError> {
    cfg.validate_for(command)?;
    let mut outcomes = Vec::new();
    let artifacts: Vec<Artifact> = match command {
        Command::Tf => commands::tf(cfg)?,
        Command::Scatter => commands::scatter(cfg)?,
        Command::Semiclass => commands::semiclass(cfg)?,
        Command::Spectra => commands::spectra(cfg)?,
        Command::Husimi => commands::husimi(cfg)?,
        Command::Predict => commands::predict(cfg)?,
        Command::Boxes => commands::boxes(cfg)?,
        Command::Budget => commands::budget(cfg)?,
        Command::VerifyAll => {
            outcomes = checks::run_all();
            vec![checks::artifact(&outcomes)]
        }
    };
    let header = Header::new(command.name(), cfg);
    let files = output::write_all(out, &header, &artifacts, cfg.json)?;
    Ok(RunReport { files, checks: outcomes })
}
