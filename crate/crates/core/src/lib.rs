//! Driver identification from in-vehicle CAN-bus / OBD-II telemetry.
//!
//! The pipeline runs [`ingest`] → [`preprocess`] (feature selection, sliding
//! windows, min-max scaling) → [`models`] → [`eval`]. [`obd`] decodes raw
//! service 01 payloads into engineering units; [`pipeline`] wires a whole
//! run from a serializable [`pipeline::RunConfig`].

pub mod eval;
pub mod ingest;
pub mod matrix;
pub mod models;
pub mod obd;
pub mod pipeline;
pub mod preprocess;

use std::path::PathBuf;

use thiserror::Error;

pub use eval::EvalError;
pub use ingest::IngestError;
pub use matrix::{FeatureMatrix, MatrixError};
pub use models::ModelError;
pub use obd::ObdError;
pub use preprocess::PreprocessError;

/// Any failure, prefixed with the module it came from.
#[derive(Debug, Error)]
pub enum Error {
    #[error("obd: {0}")]
    Obd(#[from] ObdError),
    #[error("ingest: {0}")]
    Ingest(#[from] IngestError),
    #[error("matrix: {0}")]
    Matrix(#[from] MatrixError),
    #[error("preprocess: {0}")]
    Preprocess(#[from] PreprocessError),
    #[error("models: {0}")]
    Model(ModelError),
    #[error("eval: {0}")]
    Eval(EvalError),
    #[error("config: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<ModelError> for Error {
    fn from(e: ModelError) -> Self {
        Error::Model(e)
    }
}

impl From<EvalError> for Error {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Model(m) => Error::Model(m),
            EvalError::Preprocess(p) => Error::Preprocess(p),
            other => Error::Eval(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad arguments or configuration.
    Usage,
    /// Input that cannot be read, parsed or learned from.
    Data,
    Internal,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) => ErrorKind::Usage,
            Error::Model(ModelError::InvalidConfig(_) | ModelError::UnknownKind(_)) => {
                ErrorKind::Usage
            }
            Error::Preprocess(
                PreprocessError::InvalidWindow(_) | PreprocessError::UnknownStatistic(_),
            ) => ErrorKind::Usage,
            Error::Eval(EvalError::InvalidPlan(_) | EvalError::NoBaselineDesignated(_)) => {
                ErrorKind::Usage
            }
            Error::Obd(ObdError::InvalidHex(_)) => ErrorKind::Usage,
            Error::Obd(_)
            | Error::Ingest(_)
            | Error::Matrix(_)
            | Error::Preprocess(_)
            | Error::Model(_)
            | Error::Eval(_)
            | Error::Io { .. } => ErrorKind::Data,
            Error::Json(e) if e.is_data() || e.is_syntax() || e.is_eof() => ErrorKind::Data,
            Error::Json(_) => ErrorKind::Internal,
        }
    }
}
