use thiserror::Error;

/// Errors shared by all modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("matrix is not symmetric (relative asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("quadratic form is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositiveSemidefinite(f64),

    #[error("functionals do not span the space (rank {rank} < dim {dim})")]
    NonSpanning { rank: usize, dim: usize },

    #[error("weighted functionals do not decompose the form (residual {residual:.3e} > tol {tol:.3e})")]
    InexactPartition { residual: f64, tol: f64 },

    #[error("map is near-singular: |det| = {det:.3e}")]
    NearSingular { det: f64 },

    #[error("partial data is not {lambda}-Lipschitz (worst violation {violation:.3e})")]
    NotLipschitz { lambda: f64, violation: f64 },

    #[error("net is not {0}-separated (closest pair at distance {1:.6e})")]
    NetNotSeparated(f64, f64),

    #[error("window budget exceeded: {needed} nodes > budget {budget}")]
    WindowBudget { needed: usize, budget: usize },

    #[error("inconsistent stable-norm samples: {0}")]
    InconsistentSamples(String),

    #[error("fixture violation: {0}")]
    FixtureViolation(String),

    #[error("polytope is empty or unbounded: {0}")]
    Degenerate(String),

    #[error("iteration limit reached: {0}")]
    IterationLimit(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("schema error: {0}")]
    Schema(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
