use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {file}: {source}")]
    Io {
        file: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{file}: truncated while reading {what}")]
    Truncated { file: String, what: String },

    #[error("{file}: {detail}")]
    Structural { file: String, detail: String },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("unknown submodel `{0}`")]
    UnknownSubmodel(String),

    #[error("submodel `{0}` appears in more than one group")]
    OverlappingGroups(String),

    #[error("{what} out of bounds: {detail}")]
    Bounds { what: &'static str, detail: String },

    #[error("node {0} has no temperature")]
    MissingTemperature(usize),

    #[error("cache does not match dataset (cached fingerprint {cached:#018x}, dataset {actual:#018x})")]
    StaleCache { cached: u64, actual: u64 },

    #[error("corrupt cache file {file}: {detail}")]
    CorruptCache { file: PathBuf, detail: String },

    #[error("{0} is not a project directory (no manifest.json)")]
    NotAProject(PathBuf),
}

impl Error {
    pub(crate) fn io(file: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            file: file.into(),
            source,
        }
    }

    pub(crate) fn structural(file: &str, detail: impl Into<String>) -> Self {
        Error::Structural {
            file: file.to_owned(),
            detail: detail.into(),
        }
    }

    pub(crate) fn truncated(file: &str, what: impl Into<String>) -> Self {
        Error::Truncated {
            file: file.to_owned(),
            what: what.into(),
        }
    }

    /// Stable machine-readable code, used by the HTTP service.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io_error",
            Error::Truncated { .. } => "truncated",
            Error::Structural { .. } => "structural",
            Error::Validation(_) => "invalid_request",
            Error::UnknownSubmodel(_) => "unknown_submodel",
            Error::OverlappingGroups(_) => "overlapping_groups",
            Error::Bounds { what, .. } if *what == "timestep" => "bad_timestep",
            Error::Bounds { .. } => "out_of_bounds",
            Error::MissingTemperature(_) => "missing_temperature",
            Error::StaleCache { .. } => "stale_cache",
            Error::CorruptCache { .. } => "corrupt_cache",
            Error::NotAProject(_) => "not_a_project",
        }
    }
}
