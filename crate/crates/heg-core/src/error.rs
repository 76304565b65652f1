use thiserror::Error;

/// Errors produced by instance construction, checkers, and solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// The instance data itself is malformed (duplicate ids, bad kappa, negative expertise, ...).
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// A referenced agent or skill id does not exist in the instance.
    #[error("invalid reference: {0}")]
    InvalidReference(String),

    /// An argument violates an operation's contract.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A partition does not form a valid feasible partition of the agent set.
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    /// The request exceeds a configured enumeration budget or size limit.
    #[error("capability exceeded: {0}")]
    Capability(String),

    /// Input text could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Wraps a JSON error with its source context and input position.
    pub fn parse_json(context: &str, err: &serde_json::Error) -> Error {
        Error::Parse(format!(
            "{context}: {err} (line {}, column {})",
            err.line(),
            err.column()
        ))
    }
}
