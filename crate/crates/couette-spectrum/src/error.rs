use serde::Serialize;

/// Failures of a run, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical error: {0}")]
    Numerical(couette_core::Error),

    #[error("cache error: {0}")]
    Cache(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl From<couette_core::Error> for AppError {
    fn from(e: couette_core::Error) -> Self {
        match e.root() {
            couette_core::Error::Config(m) => AppError::Config(m.clone()),
            _ => AppError::Numerical(e),
        }
    }
}

impl AppError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => 2,
            AppError::Numerical(_) => 3,
            AppError::Cache(_) | AppError::Io { .. } => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            AppError::Config(_) => "config",
            AppError::Numerical(_) => "numerical",
            AppError::Cache(_) => "cache",
            AppError::Io { .. } => "io",
        }
    }

    pub fn record(&self) -> ErrorRecord {
        ErrorRecord {
            kind: self.kind(),
            exit_code: self.exit_code(),
            message: self.to_string(),
        }
    }
}

/// Machine-readable form written to the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorRecord {
    pub kind: &'static str,
    pub exit_code: i32,
    pub message: String,
}
