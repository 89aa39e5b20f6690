use thiserror::Error;

/// Errors raised by the laboratory.
///
/// The variants line up with the CLI exit codes: input and precondition
/// problems map to exit code 2, everything else is reported in-band.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GzError {
    #[error("input error: {0}")]
    Input(String),

    #[error("precondition not met: {0}")]
    Precondition(String),

    #[error("body is not of class C2+: curvature radius {rho:.3e} below {rho_min:.1e} at angle {angle:.6}")]
    NotC2Plus { angle: f64, rho: f64, rho_min: f64 },

    #[error("perturbed family invalid at s = {s}: {reason}")]
    InvalidFamily { s: f64, reason: String },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("declared curvature bounds violated at {point:?}: {detail}")]
    BoundViolation { point: Vec<f64>, detail: String },

    #[error("log-concavity violated: first variation vanishes but second variation is {second:.3e}")]
    LogConcavityViolation { second: f64 },

    #[error("search degenerate: {0}")]
    SearchDegenerate(String),
}

pub type Result<T> = std::result::Result<T, GzError>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(GzError::Input(msg.into()))
}

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(GzError::Precondition(msg.into()))
}
