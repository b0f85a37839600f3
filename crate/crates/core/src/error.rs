use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("geometric graph with radius {radius} stayed disconnected after {attempts} attempts (infeasible radius)")]
    InfeasibleRadius { radius: f64, attempts: usize },

    #[error("graph is not connected")]
    Disconnected,

    #[error("invalid weight matrix: {0}")]
    InvalidWeights(String),

    #[error("spectral gap {lambda2:e} is below tolerance (disconnected or degenerate network)")]
    DegenerateSpectrum { lambda2: f64 },

    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    #[error("iteration cap exceeded: {needed} iterations needed, cap is {cap}")]
    IterationCapExceeded { needed: u64, cap: u64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("rate conditions violated: {0}")]
    ConditionsViolated(String),

    #[error("degenerate reference solution: f(0) - f* = {gap:e}")]
    DegenerateReference { gap: f64 },

    #[error("stage `{stage}` failed")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("config serialize error: {0}")]
    TomlSer(#[from] toml::ser::Error),
}

impl Error {
    pub(crate) fn at(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }
}
