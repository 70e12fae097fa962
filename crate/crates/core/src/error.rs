//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Modulation class name not present in the registry.
    #[error("unknown modulation class: {0}")]
    UnknownModClass(String),

    /// Scene sampler exhausted its rejection budget.
    #[error("rejection budget exhausted after {attempts} attempts; last violated constraint: {constraint}")]
    RejectionBudget { attempts: u32, constraint: String },

    /// Unsupported technology/link combination or otherwise invalid configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Input buffer or argument shape is invalid for the operation.
    #[error("invalid input: {0}")]
    Input(String),

    /// Benchmark could not be built from the available scenes.
    #[error("benchmark build error: {0}")]
    BenchBuild(String),

    /// Prompt assembly was asked for a caption level the record does not carry.
    #[error("prompt assembly error: {0}")]
    Assembly(String),

    /// Pipeline stage invoked before its upstream artifacts exist.
    #[error("stage dependency error: {0}")]
    StageDependency(String),

    /// Remote text-generation transport failure (after retries).
    #[error("text-generation client error: {0}")]
    Client(String),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
