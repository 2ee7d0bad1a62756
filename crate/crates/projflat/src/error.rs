use thiserror::Error;

/// Failure modes shared by all modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("zero vector where a nonzero direction is required")]
    ZeroVector,
    #[error("evaluation produced a non-finite value")]
    NonFinite,
    #[error("function is not positive at a sampled nonzero direction")]
    NotPositive,
    #[error("point lies outside the domain")]
    OutsideDomain,
    #[error("root iteration did not converge after {iterations} steps")]
    NoConvergence { iterations: usize },
    #[error("requested root branch has no root in the search bracket")]
    BranchMissing,
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("initial data match no admissible case: {0}")]
    Inadmissible(String),
    #[error("distance formula is degenerate at this segment")]
    DegenerateFormula,
    #[error("segment leaves the domain")]
    SegmentExitsDomain,
    #[error("geodesic left the domain at t = {t}")]
    LeftDomain { t: f64 },
    #[error("ODE integration failed")]
    IntegrationFailure,
    #[error("spherical coordinates are singular at this point")]
    CoordinateSingularity,
    #[error("point is not in the open upper hemisphere")]
    NotUpperHemisphere,
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("the origin is excluded")]
    OriginExcluded,
    #[error("operation requires a family that is not backward complete")]
    WrongClass,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Coarse grouping used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Input violates a precondition or lies outside a domain.
    Domain,
    /// A numerical procedure failed.
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NonFinite
            | Error::NoConvergence { .. }
            | Error::IntegrationFailure
            | Error::DegenerateFormula => ErrorClass::Numerical,
            _ => ErrorClass::Domain,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
