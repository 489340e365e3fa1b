use thiserror::Error;

/// Errors shared by the graph, solver, tracker and data modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("weight matrix is not square: {rows} x {cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("asymmetric weights at ({i}, {j}): {forward} vs {backward}")]
    AsymmetricWeight {
        i: usize,
        j: usize,
        forward: f64,
        backward: f64,
    },

    #[error("negative weight {weight} at ({i}, {j})")]
    NegativeWeight { i: usize, j: usize, weight: f64 },

    #[error("nonzero diagonal weight {weight} at node {i} (self-loops are not allowed)")]
    NonzeroDiagonal { i: usize, weight: f64 },

    #[error("non-finite value at ({i}, {j})")]
    NonFinite { i: usize, j: usize },

    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue:.3e} below -{tolerance:.3e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64, tolerance: f64 },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: String,
        found: String,
    },

    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: String, message: String },

    #[error(
        "solver did not converge: residual {achieved:.3e} above tolerance {tolerance:.3e} after {iterations} iterations"
    )]
    DidNotConverge {
        achieved: f64,
        tolerance: f64,
        iterations: usize,
    },

    #[error("numerical failure in {context}: {message}")]
    Numerical { context: String, message: String },

    #[error("value out of domain at ({i}, {j}): {message}")]
    Domain { i: usize, j: usize, message: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate edge ({i}, {j}) at line {line}")]
    DuplicateEdge { i: usize, j: usize, line: usize },

    #[error("unknown link index {index} (stream has {links} links)")]
    UnknownLink { index: usize, links: usize },

    #[error("unsupported mode: {0}")]
    UnsupportedMode(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(
        context: impl Into<String>,
        expected: impl Into<String>,
        found: impl Into<String>,
    ) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
            expected: expected.into(),
            found: found.into(),
        }
    }

    pub(crate) fn param(name: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            message: message.into(),
        }
    }
}
