use thiserror::Error;

use crate::evolution::Genome;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Shapes of tensors, matrices or vectors do not line up.
    #[error("structural error: {0}")]
    Structural(String),

    /// The instance or solver configuration cannot support the request.
    #[error("configuration error: {0}")]
    Config(String),

    /// No feasible solution was found (or none exists).
    #[error("infeasible: {reason}")]
    Infeasible {
        reason: String,
        best_violation: Option<f64>,
        best_genome: Option<Genome>,
    },

    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown atom `{name}` at offset {offset}")]
    UnknownAtom { offset: usize, name: String },

    #[error("search space of {size:.3e} nodes exceeds the cap of {cap:.3e}")]
    SearchSpaceTooLarge { size: f64, cap: f64 },

    #[error("roster generation failed on day {day}: {reason}")]
    GenerationFailed { day: usize, reason: String },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("invalid instance: {}", .0.join("; "))]
    InvalidInstance(Vec<String>),

    #[error("instance format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn infeasible(reason: impl Into<String>) -> Self {
        Error::Infeasible {
            reason: reason.into(),
            best_violation: None,
            best_genome: None,
        }
    }
}
