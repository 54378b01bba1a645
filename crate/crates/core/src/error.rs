use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("refused: {0}")]
    Refused(String),

    #[error("filter exhausted: {survivors} survivor(s) left after {iterations} removal(s)")]
    FilterExhausted { survivors: usize, iterations: usize },

    #[error("all filter scores are zero while the stop condition is unmet")]
    DegenerateScores,

    #[error("no second-half value lies in [{a}, {b}]")]
    EmptySecondHalf { a: f64, b: f64 },

    #[error("oracle pruned every sample (radius {radius})")]
    EmptyOracle { radius: f64 },

    #[error("geometric median did not converge after {iterations} iterations")]
    Convergence { iterations: usize, last: Vec<f64> },

    #[error("minimax solve failed: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the CLI: 2 for bad input or configuration,
    /// 3 for an estimator that ran and failed.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::FilterExhausted { .. }
            | Error::DegenerateScores
            | Error::EmptySecondHalf { .. }
            | Error::EmptyOracle { .. }
            | Error::Convergence { .. }
            | Error::Solver(_) => 3,
            _ => 2,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
