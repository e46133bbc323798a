use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    /// A state entry became NaN or infinite.
    #[error("integration diverged at step {step} (t = {time:.6} s)")]
    IntegrationDiverged { step: usize, time: f64 },

    #[error("harmonic gain undefined: mutual inhibition weight a is zero")]
    UndefinedGain,

    #[error("natural frequency undefined: radicand {radicand} is not positive")]
    NoNaturalFrequency { radicand: f64 },

    /// `K(r) = target` has no solution on `[-1, 1]`.
    #[error("no root of K(r) = {target} on [-1, 1]")]
    NoRoot { target: f64 },

    /// The forcing frequency coincides with the natural frequency, where the
    /// entrainment threshold tends to zero.
    #[error("entrainment threshold singular at omega = {omega} (limit is 0)")]
    SingularThreshold { omega: f64 },

    #[error("singular denominator in {0}")]
    SingularDenominator(&'static str),

    #[error("signal is not oscillating")]
    NotOscillating,

    #[error("config error: {0}")]
    Config(String),

    #[error("training diverged at update {update}: {reason}")]
    TrainingDiverged { update: usize, reason: String },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by numerical blow-up rather than bad input.
    pub fn is_divergence(&self) -> bool {
        matches!(
            self,
            Error::IntegrationDiverged { .. } | Error::TrainingDiverged { .. }
        )
    }
}
