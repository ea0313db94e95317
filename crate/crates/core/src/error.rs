use thiserror::Error;

/// Errors raised anywhere in the high-fidelity / reduced-order pipeline.
#[derive(Debug, Error)]
pub enum SeamError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("division by zero while evaluating `{0}`")]
    DivisionByZero(String),

    #[error("field evaluation produced a non-finite value in `{0}`")]
    NonFinite(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("scenario `{scenario}` has no forcing variant `{variant}`")]
    UnknownVariant { scenario: String, variant: String },

    #[error("conjugate gradients did not converge after {iterations} iterations (relative residual {residual:e})")]
    SolverFailure { iterations: usize, residual: f64 },

    #[error(
        "power iteration stagnated after {iterations} iterations (last relative change {change:e})"
    )]
    Stagnation { iterations: usize, change: f64 },

    #[error("problem specification mismatch: {0}")]
    SpecMismatch(String),

    #[error("{columns} snapshot columns cannot be split into segments of {segment} columns")]
    Divisibility { columns: usize, segment: usize },

    #[error("degenerate snapshot block: principal eigenvalue {lambda0:e} is not positive relative to trace {trace:e}")]
    DegenerateSnapshot { lambda0: f64, trace: f64 },

    #[error("reference solution has zero norm; relative error is undefined")]
    DegenerateReference,

    #[error("numerical fault: {0}")]
    NumericalFault(String),

    #[error("malformed data file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SeamError>;
