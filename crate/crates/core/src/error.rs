use crate::expr::ExprError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("operation requires a {expected} system, got {got}")]
    KindMismatch { expected: &'static str, got: &'static str },
    #[error("invalid control: {0}")]
    InvalidControl(String),
    #[error("unknown example `{0}` (expected one of ex1..ex6)")]
    UnknownExample(String),
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("integration diverged at t = {time}")]
    IntegrationDiverged { time: f64, last_state: Vec<f64> },
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is symmetric; the witness must come from its eigenvectors instead")]
    SymmetricInput,
    #[error("a fit needs at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("every residual is below the roundoff floor")]
    DegenerateFit,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}
