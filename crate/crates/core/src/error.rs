use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("{what} exceeds the supported size (limit {limit}, got {got})")]
    TooLarge {
        what: &'static str,
        limit: usize,
        got: usize,
    },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("unit is not strictly interior to the effect cone")]
    NotInterior,

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("inconsistent H-representation: {0}")]
    InconsistentHRep(String),

    #[error("polytope is empty")]
    EmptyPolytope,

    #[error("circuit output is the constant {0}")]
    ConstantOutput(bool),

    #[error("circuit is cyclic or references an undefined wire: {0}")]
    Cyclic(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("iteration limit reached after {iterations} iterations: {diagnostics}")]
    IterationLimit {
        iterations: usize,
        diagnostics: String,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable tag used in CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ShapeMismatch { .. } => "shape_mismatch",
            Error::NotSymmetric(_) => "not_symmetric",
            Error::TooLarge { .. } => "too_large",
            Error::Unsupported(_) => "unsupported",
            Error::NotInterior => "not_interior",
            Error::InvalidMeasurement(_) => "invalid_measurement",
            Error::InvalidInput(_) => "invalid_input",
            Error::Infeasible => "infeasible",
            Error::Unbounded => "unbounded",
            Error::InconsistentHRep(_) => "inconsistent_hrep",
            Error::EmptyPolytope => "empty_polytope",
            Error::ConstantOutput(_) => "constant_output",
            Error::Cyclic(_) => "cyclic",
            Error::Parse { .. } => "parse",
            Error::Invariant(_) => "invariant",
            Error::IterationLimit { .. } => "iteration_limit",
            Error::Json(_) => "json",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape_err(expected: impl Into<String>, got: impl Into<String>) -> Error {
    Error::ShapeMismatch {
        expected: expected.into(),
        got: got.into(),
    }
}
