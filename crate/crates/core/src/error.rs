use thiserror::Error;

/// Failures shared by every module. `token()` gives the short machine
/// identifier that the command line reports verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pole: {0}")]
    Pole(String),
    #[error("invalid-order: {0}")]
    InvalidOrder(String),
    #[error("invalid-params: {0}")]
    InvalidParams(String),
    #[error("unsupported-beta: beta = {0}")]
    UnsupportedBeta(u32),
    #[error("nonexistent-cumulant: K_{index} does not exist (q = {q})")]
    NonexistentCumulant { index: usize, q: i64 },
    #[error("lattice-order-shortfall: dimension {dim} supports order {available}, needs {needed}")]
    LatticeOrderShortfall { dim: i64, available: i64, needed: usize },
    #[error("lattice-radius: dimension shift {shift} exceeds bound {bound}")]
    LatticeRadius { shift: i64, bound: i64 },
    #[error("boundary-unavailable: {0}")]
    BoundaryUnavailable(String),
    #[error("excluded-index: ({0}, {1})")]
    ExcludedIndex(usize, usize),
    #[error("insufficient-order: {0}")]
    InsufficientOrder(String),
    #[error("invalid-gamma-argument: {0}")]
    InvalidGammaArgument(f64),
    #[error("quadrature-failure: error estimate {estimate:e} above tolerance {tolerance:e}")]
    QuadratureFailure { estimate: f64, tolerance: f64 },
    #[error("ill-conditioned: {0}")]
    IllConditioned(String),
    #[error("invalid-count: {0}")]
    InvalidCount(usize),
    #[error("insufficient-samples: {count} samples for order {order}")]
    InsufficientSamples { count: usize, order: usize },
    #[error("invalid-variance: {0}")]
    InvalidVariance(f64),
    #[error("envelope-failure: acceptance rate {0:e}")]
    EnvelopeFailure(f64),
    #[error("integrality-violation: coefficient {0}")]
    IntegralityViolation(usize),
    #[error("nonzero-constant-term")]
    NonzeroConstantTerm,
}

impl Error {
    pub fn token(&self) -> &'static str {
        match self {
            Error::Pole(_) => "pole",
            Error::InvalidOrder(_) => "invalid-order",
            Error::InvalidParams(_) => "invalid-params",
            Error::UnsupportedBeta(_) => "unsupported-beta",
            Error::NonexistentCumulant { .. } => "nonexistent-cumulant",
            Error::LatticeOrderShortfall { .. } => "lattice-order-shortfall",
            Error::LatticeRadius { .. } => "lattice-radius",
            Error::BoundaryUnavailable(_) => "boundary-unavailable",
            Error::ExcludedIndex(..) => "excluded-index",
            Error::InsufficientOrder(_) => "insufficient-order",
            Error::InvalidGammaArgument(_) => "invalid-gamma-argument",
            Error::QuadratureFailure { .. } => "quadrature-failure",
            Error::IllConditioned(_) => "ill-conditioned",
            Error::InvalidCount(_) => "invalid-count",
            Error::InsufficientSamples { .. } => "insufficient-samples",
            Error::InvalidVariance(_) => "invalid-variance",
            Error::EnvelopeFailure(_) => "envelope-failure",
            Error::IntegralityViolation(_) => "integrality-violation",
            Error::NonzeroConstantTerm => "nonzero-constant-term",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
