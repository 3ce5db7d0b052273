use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised across the toolkit.
///
/// Validation failures (bad parameters, malformed input) are separated from
/// numerical failures (non-convergence, branch mis-tracking) so the command
/// line can map them to distinct exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("series order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("series must have order at least 1")]
    EmptySeries,

    #[error("inner series of a composition must have zero constant term")]
    NonzeroConstantTerm,

    #[error("series reversion needs zero constant term and nonzero linear coefficient")]
    VanishingLinearTerm,

    #[error("series has zero constant term and is not invertible")]
    ZeroConstantTerm,

    #[error("moment sequence is not normalized (m0 = {0})")]
    NotNormalized(String),

    #[error("first moment is zero; S-transform undefined")]
    ZeroFirstMoment,

    #[error("not enough moments: need {needed}, have {available}")]
    NotEnoughMoments { needed: usize, available: usize },

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    #[error("point x = {0} lies outside the open support")]
    OutsideSupport(f64),

    #[error("root finder did not converge after {0} iterations")]
    RootsNoConvergence(usize),

    #[error("path tracking failed: {0}")]
    Tracking(String),

    #[error("path passes within tolerance of a branch point at x = {0}")]
    NearBranchPoint(f64),

    #[error("negative density {rho} at x = {x}; branch mis-tracked")]
    NegativeDensity { x: f64, rho: f64 },

    #[error("quadrature did not converge at level {level} (estimate change {change:e})")]
    QuadratureNoConvergence { level: usize, change: f64 },

    #[error("numerically singular sample")]
    SingularSample,

    #[error("{0}")]
    Io(String),
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RootsNoConvergence(_)
                | Error::Tracking(_)
                | Error::NearBranchPoint(_)
                | Error::NegativeDensity { .. }
                | Error::QuadratureNoConvergence { .. }
                | Error::SingularSample
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
