use thiserror::Error;

use crate::atlas::ChartId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {x:?} is not in the overlap of chart {from} and chart {to}")]
    NotInOverlap { from: ChartId, to: ChartId, x: Vec<f64> },

    #[error("unknown chart {0}")]
    UnknownChart(ChartId),

    #[error("arguments live in different charts ({0} vs {1})")]
    ChartMismatch(ChartId, ChartId),

    #[error("arguments sit over different base points (distance {0:e})")]
    BasePointMismatch(f64),

    #[error("syntax error at byte {position}: expected one of {}", expected.join(", "))]
    Syntax { position: usize, expected: Vec<String> },

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("unbound symbol `{0}`")]
    Unbound(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular Hessian (condition number {condition:e})")]
    SingularHessian { condition: f64 },

    #[error("Newton iteration did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },

    #[error("step size underflow at s = {s} (step {step:e})")]
    StepUnderflow { s: f64, step: f64 },

    #[error("state at s = {s} lies outside every chart")]
    ChartExhausted { s: f64 },

    #[error("section kind mismatch: expected {expected}, got {actual}")]
    KindMismatch { expected: &'static str, actual: &'static str },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("Legendre map is degenerate on the sampled region (condition {condition_max:e}, {injectivity_violations} collisions)")]
    Degenerate { condition_max: f64, injectivity_violations: usize },

    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { field: field.into(), message: message.into() }
    }

    /// Numerical failures map to CLI exit status 2, everything else to 1.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::SingularHessian { .. }
                | Error::NoConvergence { .. }
                | Error::StepUnderflow { .. }
                | Error::ChartExhausted { .. }
                | Error::NotInOverlap { .. }
                | Error::Degenerate { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
