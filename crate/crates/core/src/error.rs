use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Ray origin is outside the room or inside an obstacle.
    #[error("invalid ray origin ({x:.4}, {y:.4}): not in free space")]
    InvalidOrigin { x: f64, y: f64 },

    /// A document or config value broke a schema rule or invariant.
    #[error("{path}: {message}")]
    Validation { path: String, message: String },

    #[error("position ({x:.4}, {y:.4}) is outside the occupancy grid")]
    OutOfBounds { x: f64, y: f64 },

    #[error("invalid start pose ({x:.4}, {y:.4}): not in free space")]
    InvalidStartPose { x: f64, y: f64 },

    #[error("detection rate undefined: arena has no target objects")]
    NoObjects,

    #[error("configuration {config}: {source}")]
    InConfiguration {
        config: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Corrupt or unreadable artifact.
    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    /// Unreadable or malformed configuration file or override.
    #[error("config {path}: {message}")]
    Config { path: String, message: String },
}

impl Error {
    pub fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by bad user input (config, schema, validation).
    pub fn is_usage(&self) -> bool {
        match self {
            Error::Validation { .. } | Error::InvalidStartPose { .. } | Error::Config { .. } => true,
            Error::InConfiguration { source, .. } => source.is_usage(),
            _ => false,
        }
    }
}
