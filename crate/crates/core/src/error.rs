use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("normalization error: {0}")]
    Normalization(String),

    #[error("empty sample window")]
    EmptyWindow,

    #[error("window too small: {0}")]
    WindowTooSmall(String),

    #[error("inconclusive decay classification: {0}")]
    Inconclusive(String),

    #[error("Poisson consistency failure: time and Fourier pipelines differ by {deviation:e} (tolerance {tol:e})")]
    PoissonConsistency { deviation: f64, tol: f64 },

    #[error("degenerate exponent: factor vanishes at z = 1 for lambda = {0}")]
    DegenerateLambda(String),

    #[error("least-squares fit is rank deficient: {0}")]
    RankDeficient(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("zero vector has no invariant subspace")]
    ZeroVector,

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
