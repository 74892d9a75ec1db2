use chrono::NaiveDate;
use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input for `{field}`: {reason}")]
    InvalidInput { field: String, reason: String },

    #[error("date ordering violated: {earlier} must not be after {later}")]
    DateOrder { earlier: NaiveDate, later: NaiveDate },

    #[error("time ordering violated: t = {t} exceeds T = {horizon}")]
    TimeOrder { t: f64, horizon: f64 },

    #[error("extrapolation beyond last curve pillar: t = {t}, last pillar at {max_t}")]
    Extrapolation { t: f64, max_t: f64 },

    #[error("schedule error: {0}")]
    Schedule(String),

    #[error("solver `{what}` failed to converge after {iterations} iterations (last residual {residual})")]
    SolverDiverged {
        what: String,
        iterations: usize,
        residual: f64,
    },

    #[error("no root bracketed for `{what}` on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoBracket {
        what: String,
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("simulation produced a non-finite state on path {path}")]
    Simulation { path: usize },

    #[error("data error: {0}")]
    Data(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn invalid(field: &str, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
