use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeomError {
    /// A finite-difference stencil or sample left a non-periodic chart axis.
    #[error("domain error: coordinate {coord} on axis {axis} outside [{lower}, {upper}]")]
    Domain {
        axis: usize,
        coord: f64,
        lower: f64,
        upper: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate metric: smallest eigenvalue {min_eigenvalue:e}")]
    DegenerateMetric { min_eigenvalue: f64 },

    #[error("dimension error: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    /// A geometric hypothesis (adapted chart, eigenvalue pattern, fiber
    /// constancy) failed at a sample point.
    #[error("assumption violated: {0}")]
    Assumption(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("non-finite value {value} in {what}")]
    NonFinite { what: String, value: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GeomError>;
