use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter domain error: {0}")]
    ParameterDomain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("data validation error: {0}")]
    DataValidation(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("empty sample")]
    EmptySample,

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("degenerate reference: {0}")]
    DegenerateReference(String),

    /// Internal inconsistency of the simulation kernel.
    #[error("engine error: {0}")]
    Engine(String),

    /// A point could not be evaluated (e.g. a KPI cell stayed empty in every replication).
    #[error("evaluation failure: {0}")]
    EvaluationFailure(String),

    #[error("index mismatch: {0}")]
    IndexMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by bad input rather than by the engine.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::ParameterDomain(_)
                | Error::Config(_)
                | Error::DataValidation(_)
                | Error::Parse { .. }
                | Error::Json(_)
                | Error::Csv(_)
                | Error::Io(_)
        )
    }
}
