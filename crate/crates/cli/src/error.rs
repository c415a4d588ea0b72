use std::path::PathBuf;

use thiserror::Error;

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const RESOURCE_CAP: i32 = 3;
    pub const NUMERICAL: i32 = 4;
    pub const IO: i32 = 5;
    pub const TOLERANCE: i32 = 6;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("resource cap: {0}")]
    ResourceCap(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("comparison outside tolerance: total variation {tv} > {tolerance}")]
    Tolerance { tv: f64, tolerance: f64 },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::ResourceCap(_) => exit::RESOURCE_CAP,
            CliError::Numerical(_) => exit::NUMERICAL,
            CliError::Io { .. } => exit::IO,
            CliError::Tolerance { .. } => exit::TOLERANCE,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<crsos::Error> for CliError {
    fn from(e: crsos::Error) -> Self {
        use crsos::Error as E;
        match e {
            E::ResourceCap { .. } => CliError::ResourceCap(e.to_string()),
            E::InvalidConfig(_) | E::RateTable(_) | E::SiteOutOfRange { .. } | E::Json(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
