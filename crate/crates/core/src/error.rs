use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid network shape {m}x{n}: both dimensions must be at least 2")]
    InvalidShape { m: usize, n: usize },

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no finite threshold: coefficient is zero")]
    NoThreshold,

    #[error("ambiguous quantization: cluster around {center} spans {diameter} (> 10 x tol = {limit})")]
    AmbiguousQuantization { center: f64, diameter: f64, limit: f64 },

    #[error("coloring is not balanced: cells {first:?} and {second:?} share a color but have different {arrow} inputs")]
    Unbalanced {
        first: (usize, usize),
        second: (usize, usize),
        arrow: &'static str,
    },

    #[error("search budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("values are not generic for the coloring: {0}")]
    NotGeneric(String),

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
