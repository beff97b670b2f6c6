use thiserror::Error;

/// Unified error type for descriptor ingestion, configuration checking and
/// transform application.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// The file is not valid JSON or does not match the descriptor schema.
    /// The message names the offending field and constraint.
    #[error("schema violation in {path}: {message}")]
    Schema { path: String, message: String },

    /// One or more type invariants failed at construction.
    #[error("validation failed: {}", issues.join("; "))]
    Validation { issues: Vec<String> },

    /// An operation was called outside its contract.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A transform does not apply to this kernel; carries the reason that
    /// refinement traces record.
    #[error("{strategy} is inapplicable: {reason}")]
    Inapplicable { strategy: String, reason: String },

    /// A design point exceeds a platform budget; names the binding budget.
    #[error("resource budget exceeded: {0}")]
    Resource(String),
}

impl Error {
    pub fn validation(issues: Vec<String>) -> Self {
        Error::Validation { issues }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
