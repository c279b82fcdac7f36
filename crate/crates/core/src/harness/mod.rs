//! Config ingestion, experiment orchestration and report emission behind
//! the `lavgap` command line.

mod config;
mod report;
mod run;

use std::path::PathBuf;

pub use config::{
    parse_config, ChecksConfig, CustomProblem, NuSchedule, OutputsConfig, ProblemRef, RunConfig, TuningConfig,
};
pub use report::{emit_report, emit_samples, format_float, Format, CSV_COLUMNS};
pub use run::{check_settings, run, run_checks, study_tuning, ClaimVerdicts, ReportFile};

/// Process exit status for success.
pub const EXIT_OK: i32 = 0;
/// A hypothesis required by the requested claim was falsified.
pub const EXIT_FALSIFIED: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;
/// Reading the config or writing a report failed.
pub const EXIT_IO: i32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A precondition of the construction that the config violates, such
    /// as `λ` not exceeding `‖y'‖₁/(T−t)`.
    #[error("{0}")]
    Rejected(crate::Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config { .. } | HarnessError::Rejected(_) => EXIT_CONFIG,
            HarnessError::Io { .. } => EXIT_IO,
            HarnessError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl From<crate::Error> for HarnessError {
    fn from(err: crate::Error) -> Self {
        match err {
            crate::Error::Numeric(msg) => HarnessError::Numeric(msg),
            other => HarnessError::Rejected(other),
        }
    }
}

/// Reads and parses a config file.
pub fn load_config(path: &std::path::Path) -> Result<RunConfig, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}
