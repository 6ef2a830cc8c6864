use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, malformed or invalid scenario.
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] cachealloc::Error),
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
    #[error("output error: {0}")]
    Csv(#[from] csv::Error),
    #[error("thread pool: {0}")]
    Threads(String),
}

impl CliError {
    /// Prefixes a core validation error with the config path of its source.
    pub(crate) fn field(prefix: &str, err: cachealloc::Error) -> Self {
        match err {
            cachealloc::Error::InvalidParameter { name, reason } => {
                CliError::Config(format!("{prefix}.{name}: {reason}"))
            }
            other => CliError::Config(format!("{prefix}: {other}")),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}
