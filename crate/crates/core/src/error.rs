use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Every variant maps to a stable name through [`Error::name`], which the
/// command-line driver reports in its JSON error output.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {p} lies outside the domain ({p0}, 0)")]
    DomainError { p: f64, p0: f64 },

    #[error("vorticity is singular at p = {p}")]
    SingularPoint { p: f64 },

    #[error("invalid vorticity model: {0}")]
    InvalidModel(String),

    #[error("invalid parameter: {0}")]
    ParameterError(String),

    #[error("quadrature on [{a}, {b}] did not reach tolerance (error estimate {estimate:e})")]
    QuadratureFailure { a: f64, b: f64, estimate: f64 },

    #[error("L_{r} norm diverges: truncated integrals grow without bound")]
    DivergentNorm { r: f64 },

    #[error("ODE integration failed at p = {p}: {reason}")]
    IntegrationFailure { p: f64, reason: String },

    #[error("fixed-point iteration did not converge after {sweeps} sweeps (last update {update:e})")]
    NoConvergence { sweeps: usize, update: f64 },

    #[error("W_mu cross-check failed at a dispersion root: variational {variational:e}, quadrature {quadrature:e}")]
    CollinearityViolation { variational: f64, quadrature: f64 },

    #[error("W(0; lambda, 0) is still non-positive at lambda = {lambda_max}")]
    ScanExhausted { lambda_max: f64 },

    #[error("no sign change of the dispersion function found up to {limit:e}")]
    BracketFailure { limit: f64 },

    #[error("estimates of inf mu are not monotone: {estimates:?}")]
    InfimumUnresolved { estimates: Vec<f64> },

    #[error("h_p = {hp:e} <= 0 at p = {p}: stagnation point")]
    StagnationDetected { p: f64, hp: f64 },

    #[error("Newton iteration failed after {iterations} iterations (residual {residual:e})")]
    NewtonDivergence { iterations: usize, residual: f64 },

    #[error("interpolation failed: {0}")]
    InterpolationFailure(String),

    #[error("root finder did not converge: {0}")]
    RootNotFound(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),
}

impl Error {
    /// Variant name, used as a machine-readable error code.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DomainError { .. } => "DomainError",
            Error::SingularPoint { .. } => "SingularPoint",
            Error::InvalidModel(_) => "InvalidModel",
            Error::ParameterError(_) => "ParameterError",
            Error::QuadratureFailure { .. } => "QuadratureFailure",
            Error::DivergentNorm { .. } => "DivergentNorm",
            Error::IntegrationFailure { .. } => "IntegrationFailure",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::CollinearityViolation { .. } => "CollinearityViolation",
            Error::ScanExhausted { .. } => "ScanExhausted",
            Error::BracketFailure { .. } => "BracketFailure",
            Error::InfimumUnresolved { .. } => "InfimumUnresolved",
            Error::StagnationDetected { .. } => "StagnationDetected",
            Error::NewtonDivergence { .. } => "NewtonDivergence",
            Error::InterpolationFailure(_) => "InterpolationFailure",
            Error::RootNotFound(_) => "RootNotFound",
            Error::NonFinite(_) => "NonFinite",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
