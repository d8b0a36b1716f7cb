use thiserror::Error;

/// Errors raised by the simulators, the analytic routines and the estimators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum RatchetError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument {value} outside supported range [{lo}, {hi}] for {what}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("unbounded window: {0}")]
    UnboundedWindow(String),

    #[error("insufficient data: need at least {needed}, got {got} ({what})")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("shooting bracket failure: both ends of [{lo}, {hi}] classify as {class}")]
    BracketFailure { lo: f64, hi: f64, class: String },

    #[error("equilibrium window underflow at t = {time}: increase window_factor")]
    WindowUnderflow { time: f64 },

    #[error("internal consistency violation: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, RatchetError>;
