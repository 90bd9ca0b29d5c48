use thiserror::Error;

use crate::svm::SvmModel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("argument {value} is outside the domain of {function}")]
    Domain { function: &'static str, value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("column {0} has zero variance")]
    DegenerateColumn(usize),

    #[error("cannot build {k} folds over {n} items")]
    BadFoldCount { n: usize, k: usize },

    #[error("a class is missing from the data: {0}")]
    EmptyClass(&'static str),

    #[error("invalid kernel spec `{0}`")]
    KernelSpec(String),

    #[error("SMO did not converge within {iterations} iterations")]
    NoConvergence {
        iterations: usize,
        best: Box<SvmModel>,
    },

    #[error("Newton system is singular at iteration {iteration}")]
    SingularHessian { iteration: usize },

    #[error("unknown method `{name}` (valid: {valid})")]
    UnknownMethod { name: String, valid: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
