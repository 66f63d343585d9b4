use thiserror::Error;

/// Errors produced by the estimation, bound and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("x = {x} is outside the support of {family}")]
    OutOfSupport { family: &'static str, x: f64 },

    #[error("theta = {theta} is outside the parameter space [{lower}, {upper}]")]
    OutOfParameterSpace { theta: f64, lower: f64, upper: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("moment of order {order} does not exist")]
    MomentNonexistence { order: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    #[error("no sign change on [{lower}, {upper}]: f(lower) = {f_lower}, f(upper) = {f_upper}")]
    NoRoot {
        lower: f64,
        upper: f64,
        f_lower: f64,
        f_upper: f64,
    },

    #[error("{failed} of {trials} trials failed (limit is 1%)")]
    FailureRate { failed: usize, trials: usize },
}

impl Error {
    /// True for errors caused by a configuration that cannot be satisfied,
    /// as opposed to a numerical breakdown.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::Infeasible(_)
                | Error::Config(_)
                | Error::Usage(_)
                | Error::OutOfParameterSpace { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
