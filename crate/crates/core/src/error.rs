use thiserror::Error;

/// Errors raised by the bound evaluators and the instance generators.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Matrix dimensions disagree or an input is not symmetric.
    #[error("shape error: {0}")]
    Shape(String),

    /// Non-finite input or a failed decomposition.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Neither spectrum lies strictly below the other.
    #[error("sandwich violation: spectra overlap on [{low}, {high}]")]
    SandwichViolation { low: f64, high: f64 },

    /// A fuzz trial failed; carries the fingerprint needed to replay it.
    #[error("trial {trial} (seed {seed}): {source}")]
    Trial {
        seed: u64,
        trial: u64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
