use thiserror::Error;

/// Errors raised by the numerical modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("singular quadrature: a sample sits at |x| = 0")]
    SingularQuadrature,
    #[error("zero denominator: I(u) = 0")]
    ZeroDenominator,
    #[error("degenerate exponent: 2 sigma + 2 = N sigma + b")]
    DegenerateExponent,
    #[error("aliasing: scaled bandwidth {scaled} exceeds target Nyquist {nyquist}")]
    AliasingError { scaled: f64, nyquist: f64 },
    #[error("adaptive step collapsed to {step:e} at r = {r:e}")]
    StepUnderflow { r: f64, step: f64 },
    #[error("non-finite value encountered at {at}")]
    NonFinite { at: f64 },
    #[error("no undershoot/overshoot bracket for alpha in [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("domain too small: {0}")]
    DomainTooSmall(String),
    #[error("parameters are not supercritical (sigma = {sigma}, critical sigma = {critical})")]
    NotSupercritical { sigma: f64, critical: f64 },
    #[error("degenerate barrier: B = {0} <= 0")]
    DegenerateBarrier(f64),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("x = {x} outside [{lo}, {hi}]")]
    OutOfInterval { x: f64, lo: f64, hi: f64 },
    #[error("spectral tail mass fraction {fraction:e} exceeds {limit:e} at t = {t}")]
    AliasDetected { t: f64, fraction: f64, limit: f64 },
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "InvalidParams",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::SingularQuadrature => "SingularQuadrature",
            Error::ZeroDenominator => "ZeroDenominator",
            Error::DegenerateExponent => "DegenerateExponent",
            Error::AliasingError { .. } => "AliasingError",
            Error::StepUnderflow { .. } => "StepUnderflow",
            Error::NonFinite { .. } => "NonFinite",
            Error::BracketFailure { .. } => "BracketFailure",
            Error::NoConvergence(_) => "NoConvergence",
            Error::DomainTooSmall(_) => "DomainTooSmall",
            Error::NotSupercritical { .. } => "NotSupercritical",
            Error::DegenerateBarrier(_) => "DegenerateBarrier",
            Error::HypothesisViolated(_) => "HypothesisViolated",
            Error::OutOfInterval { .. } => "OutOfInterval",
            Error::AliasDetected { .. } => "AliasDetected",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
