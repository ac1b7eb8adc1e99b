use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid spin label j = {0}: 2j must be a positive integer")]
    InvalidSpin(f64),

    #[error("magnetic quantum number m = {m} is not in {{j, j-1, ..., -j}} for j = {j}")]
    InvalidM { m: f64, j: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("generator is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("no exact invariant track exists for the Landau-Zener protocol")]
    NoExactTrack,

    #[error("singular track at t = {t}: -dtheta/sin(phi) has no finite limit")]
    SingularTrack { t: f64 },

    #[error("track leaves the domain at t = {t}: sin(theta) = 0 with divergent cot(theta) term")]
    DomainError { t: f64 },

    #[error("field vanishes at t = {t}; orientation undefined")]
    ZeroField { t: f64 },

    #[error("field has omega_x < 0 at t = {t}; outside the theta_h convention")]
    NegativeXField { t: f64 },

    #[error("t = {t} outside tabulated range [{min}, {max}]")]
    OutOfRange { t: f64, min: f64, max: f64 },

    #[error("malformed samples at line {line}: {reason}")]
    MalformedSamples { line: usize, reason: String },

    #[error("non-monotonic time column at line {line}")]
    NonMonotonic { line: usize },

    #[error("quadrature did not converge: achieved error {achieved:e}, requested {requested:e}")]
    QuadratureNonConvergence { achieved: f64, requested: f64 },

    #[error("Landau-Zener window too small: nu*T = {sweep} < 50*delta = {required}")]
    WindowTooSmall { sweep: f64, required: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
