use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HeunError {
    /// A parameter sits on a pole of a gamma function or of a recurrence
    /// denominator.
    #[error("pole: {0}")]
    Pole(String),

    /// An argument is outside the contract of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series hit its term cap before reaching the requested tolerance.
    #[error("no convergence after {terms} terms (error estimate {estimate:e})")]
    NoConvergence { terms: usize, estimate: f64 },

    /// The adaptive integrator could not make progress.
    #[error("integrator step failure at z = {z}: {reason}")]
    StepFailure { z: f64, reason: String },

    /// The polynomial root finder did not converge.
    #[error("root finding failed: {0}")]
    RootFailure(String),

    /// A supposedly terminating expansion left non-zero coefficients behind.
    #[error("termination failure: {0}")]
    TerminationFailure(String),
}

pub type Result<T> = std::result::Result<T, HeunError>;
