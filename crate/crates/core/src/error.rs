use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown function `{id}` (registered: {})", .registered.join(", "))]
    UnknownFunction { id: String, registered: Vec<String> },

    #[error("function `{0}` is already registered")]
    DuplicateFunction(String),

    #[error("invalid search domain: {0}")]
    InvalidDomain(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("point out of bounds at dimension {index}: {value} not in [{lower}, {upper}]")]
    OutOfBounds {
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("invalid GA parameters: {0}")]
    InvalidParams(String),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("invalid cluster parameters: {0}")]
    InvalidClusterParams(String),

    #[error("fingerprint is complete: {0} snapshots already recorded")]
    FingerprintComplete(usize),

    #[error("fingerprints are not comparable: {0}")]
    Incomparable(String),

    #[error("invalid fingerprint: {0}")]
    InvalidFingerprint(String),

    #[error("knowledge base is empty")]
    EmptyKnowledgeBase,

    #[error("unknown pilot `{0}`")]
    UnknownPilot(String),

    #[error("duplicate pilot `{0}`")]
    DuplicatePilot(String),

    #[error("incompatible pilot record: {0}")]
    IncompatiblePilot(String),

    #[error("unsupported knowledge base version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
