use thiserror::Error;

/// Errors shared by every layer of the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QfcError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("parameter `{field}` out of range: {value}")]
    OutOfRange { field: &'static str, value: f64 },

    #[error("integration failure: {0}")]
    Integration(String),

    #[error("trajectory {index}: {source}")]
    Trajectory {
        index: u64,
        #[source]
        source: Box<QfcError>,
    },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("impossible outcome {outcome} sampled (p = {prob:e})")]
    ImpossibleOutcome { outcome: usize, prob: f64 },

    #[error("outcome range too narrow: completeness error {0:e}")]
    RangeTooNarrow(f64),

    /// The run ended before its thresholds were met. `last` is the
    /// tracked figure of merit at the end of the horizon.
    #[error("horizon exhausted at t = {t}: {what} (last value {last})")]
    HorizonExhausted { t: f64, what: &'static str, last: f64 },

    #[error("estimate undefined: {0}")]
    Undefined(String),
}

pub type Result<T> = std::result::Result<T, QfcError>;

impl QfcError {
    pub fn in_trajectory(self, index: u64) -> Self {
        QfcError::Trajectory {
            index,
            source: Box::new(self),
        }
    }
}
