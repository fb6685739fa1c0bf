//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid rank {requested}: must be in 1..={max}")]
    InvalidRank { requested: usize, max: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("QP iteration cap reached (residual {residual:.3e})")]
    QpIterationCap {
        best: Vec<f64>,
        residual: f64,
    },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("trajectory diverged at sample {last_finite}")]
    DivergedTrajectory { last_finite: usize },

    #[error("unknown system `{0}`")]
    UnknownSystem(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("backward operator singular on the retained subspace")]
    BackwardSingular,

    #[error("rank deficient regression: achieved rank {achieved}, need {needed}")]
    RankDeficient { achieved: usize, needed: usize },

    #[error("ill-posed regression: {0}")]
    IllPosed(String),

    #[error("dictionary has no gradient")]
    NoGradient,

    #[error("schema version mismatch: expected {expected}, found {found}")]
    VersionError { expected: String, found: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
