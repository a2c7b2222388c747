use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid quantum numbers J={j}, K={k}, M={m}")]
    InvalidQuantumNumbers { j: i64, k: i64, m: i64 },

    #[error("unsupported basis mode: {0}")]
    UnsupportedBasis(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("propagation failed: {0}")]
    Propagation(String),

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("singular Jacobian: parameter {0} is not determined by the data")]
    SingularJacobian(usize),

    #[error("peak unbracketed: maximum at scan edge {0} GHz")]
    Unbracketed(f64),

    #[error("no convergence after {iterations} iterations (cost {cost:.6e})")]
    NotConverged { iterations: usize, cost: f64, best: Vec<f64> },

    #[error("config error: {0}")]
    Config(String),

    #[error("missing config key `{0}`")]
    MissingKey(String),

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context { context: context.into(), source: Box::new(self) }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
