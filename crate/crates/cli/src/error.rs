use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}:{column}: {message}")]
    Config { path: String, line: usize, column: usize, message: String },

    #[error("{path}: {message}")]
    Family { path: String, message: String },

    #[error("{path}: {message}")]
    Report { path: String, message: String },

    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Core(#[from] eigenlimit_core::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
