use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical failure in {run}{}: {source}", at.map(|t| format!(" at t = {t}")).unwrap_or_default())]
    Numerical {
        run: String,
        at: Option<f64>,
        source: nhskin_core::Error,
    },

    #[error("run {run} failed at t = {time}: {reason}")]
    RunFailed { run: String, time: f64, reason: String },

    #[error("{failed} of {total} sweep points failed")]
    PartialSweep { failed: usize, total: usize },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("baseline mismatch: {0}")]
    Baseline(String),
}

impl CliError {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical { .. } | CliError::RunFailed { .. } => 3,
            CliError::PartialSweep { .. } => 4,
            CliError::Io { .. } | CliError::Baseline(_) => 1,
        }
    }
}
