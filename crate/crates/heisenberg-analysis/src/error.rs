use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: n = {left} vs n = {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite coordinate in group element")]
    NonFinite,

    #[error("quadrature did not converge: {0}")]
    NonConvergent(String),

    #[error("no sample landed in the ball ({drawn} drawn)")]
    NoSamples { drawn: usize },

    #[error("tolerance {requested:e} needs {needed} nodes, budget is {budget}")]
    ToleranceUnreachable { requested: f64, needed: usize, budget: usize },

    #[error("potential takes the negative value {value} at a sampled point")]
    NegativePotential { value: f64 },

    #[error("potential is identically zero; use classical mode")]
    ZeroPotential,

    #[error("kernel is singular at coincident points")]
    Singular,

    #[error("exponent relation violated: {0}")]
    ExponentRelation(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("mass leakage {leak:.3e} exceeds threshold {threshold:.3e}; enlarge the node cloud")]
    MassLeakage { leak: f64, threshold: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
