use thiserror::Error;

/// Errors produced anywhere in the pricing engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Feller condition violated: {0}")]
    FellerViolation(String),
    #[error("correlation {name} = {value} outside [-1, 1] or not positive semi-definite")]
    CorrelationOutOfRange { name: &'static str, value: f64 },
    #[error("initial state {name} = {value} must be positive")]
    NonPositiveInitialState { name: &'static str, value: f64 },
    #[error("degenerate parameter: {0}")]
    DegenerateParameter(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("exponent u = {0} outside the variance-gamma moment domain")]
    OutsideMomentDomain(f64),
    #[error("quadrature did not converge: {0}")]
    NonConvergent(String),
    #[error("invalid time window: t = {t} > T = {maturity}")]
    InvalidWindow { t: f64, maturity: f64 },
    #[error("inadmissible exponent: {0}")]
    InadmissibleExponent(String),
    #[error("ODE integration failed: {0}")]
    OdeNonConvergence(String),
    #[error("F vanished at tau = {0} in the linearised rate system")]
    SingularF(f64),
    #[error("moment generating function overflow (exponent {0})")]
    Overflow(f64),
    #[error("series did not converge after {0} terms")]
    SeriesNonConvergent(usize),
    #[error("negative radicand {0} in square-root moment approximation")]
    NegativeRadicand(f64),
    #[error("exponential fit domain error: {0}")]
    FitDomainError(String),
    #[error("finite-difference stencil reaches {node}, below the admissible bound {bound}")]
    StencilOutsideAdmissibleRegion { node: f64, bound: f64 },
    #[error("no HJB root found (best residual {best_residual:e})")]
    NoRootFound { best_residual: f64 },
    #[error("configuration error: {0}")]
    ConfigError(String),
    #[error("sampling grid does not align with the simulation grid: {0}")]
    GridMismatch(String),
    #[error("invalid contract: {0}")]
    InvalidContract(String),
}

impl Error {
    /// True for errors caused by bad inputs rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::FellerViolation(_)
                | Error::CorrelationOutOfRange { .. }
                | Error::NonPositiveInitialState { .. }
                | Error::DegenerateParameter(_)
                | Error::DomainError(_)
                | Error::OutsideMomentDomain(_)
                | Error::InvalidWindow { .. }
                | Error::InadmissibleExponent(_)
                | Error::StencilOutsideAdmissibleRegion { .. }
                | Error::FitDomainError(_)
                | Error::ConfigError(_)
                | Error::GridMismatch(_)
                | Error::InvalidContract(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
