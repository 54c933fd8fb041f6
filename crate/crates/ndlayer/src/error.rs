use std::path::PathBuf;

/// Errors surfaced by file handling and the command-line tool.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] ndlayer_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: row {row}, column {column}: {message}")]
    Csv {
        path: PathBuf,
        /// 1-based data row (the header is row 0).
        row: usize,
        column: String,
        message: String,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    /// The command ran but its contract did not hold (e.g. a failed check).
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// Short stable tag used on the error line.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(_) => "invalid",
            CliError::Io { .. } => "io",
            CliError::Csv { .. } => "csv",
            CliError::Format { .. } => "format",
            CliError::Usage(_) => "usage",
            CliError::Failed(_) => "failed",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
