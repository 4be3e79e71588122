//! Experiment harness behind the `edafs` binary.

pub mod commands;
pub mod config;
pub mod report;
pub mod stats_report;

use std::process::ExitCode;

/// Failure of a subcommand, carrying its exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] edafs::Error),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    /// 1 usage, 2 data, 3 internal invariant violation.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(edafs::Error::Config(_)) => 1,
            CliError::Core(edafs::Error::Invariant(_)) => 3,
            CliError::Core(_) | CliError::Data(_) => 2,
        }
    }
}

impl From<CliError> for ExitCode {
    fn from(e: CliError) -> Self {
        ExitCode::from(e.exit_code())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Writes `contents` via a sibling temporary file so that a failed command
/// never leaves a truncated output behind.
pub fn write_atomic(path: &std::path::Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("partial");
    std::fs::write(&tmp, contents)
        .and_then(|_| std::fs::rename(&tmp, path))
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}
