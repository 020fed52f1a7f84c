use thiserror::Error;

/// Every failure mode surfaced by the toolkit.
///
/// Variant names double as the machine-readable error name written into
/// CLI manifests, so keep them stable.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("curve is not simple: {0}")]
    NonSimpleCurve(String),
    #[error("reparametrization did not reach tolerance {tol:e} (achieved {achieved:e})")]
    ToleranceNotMet { tol: f64, achieved: f64 },
    #[error("jet order {requested} unavailable (max {available})")]
    OrderUnavailable { requested: usize, available: usize },
    #[error("invalid curve specification: {0}")]
    InvalidCurve(String),

    #[error("singular polygon configuration: cyclic gap {gap:e} below {limit:e}")]
    SingularConfig { gap: f64, limit: f64 },
    #[error("grazing ray: |p| = {0}")]
    GrazingRay(f64),
    #[error("ray has no transversal intersection with the boundary")]
    NoIntersection,
    #[error("no seed converged to a periodic orbit")]
    NoConvergence,
    #[error("degenerate orbit: |det H| = {0:e}")]
    DegenerateOrbit(f64),
    #[error("curve is not convex (min curvature {0:e})")]
    NonConvexCurve(f64),

    #[error("domain error: {0}")]
    DomainError(String),
    #[error("order or index out of range: {0}")]
    RangeError(String),
    #[error("Green's function evaluated on the diagonal")]
    DiagonalError,

    #[error("insufficient resolution: {0}")]
    ResolutionError(String),
    #[error("target point too close to the boundary: distance {dist:e} < {limit:e}")]
    TargetTooClose { dist: f64, limit: f64 },
    #[error("linear solve failed: {0}")]
    SolveFailure(String),

    #[error("spectral truncation too small: lambda_max {lambda_max} < required {required}")]
    TruncationError { lambda_max: f64, required: f64 },
    #[error("ill-conditioned fit: {0}")]
    IllConditionedFit(String),
    #[error("trace window not isolated: length {0} inside the window support")]
    WindowNotIsolated(f64),

    #[error("degenerate Hessian: |det| = {0:e}")]
    DegenerateHessian(f64),
    #[error("separation precondition violated: {0}")]
    RegimeError(String),
    #[error("degenerate rotation angle {0}")]
    DegenerateAngle(f64),
    #[error("jet order unavailable: {0}")]
    JetOrderUnavailable(String),

    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable variant name used in manifests.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NonSimpleCurve(_) => "NonSimpleCurve",
            Error::ToleranceNotMet { .. } => "ToleranceNotMet",
            Error::OrderUnavailable { .. } => "OrderUnavailable",
            Error::InvalidCurve(_) => "InvalidCurve",
            Error::SingularConfig { .. } => "SingularConfig",
            Error::GrazingRay(_) => "GrazingRay",
            Error::NoIntersection => "NoIntersection",
            Error::NoConvergence => "NoConvergence",
            Error::DegenerateOrbit(_) => "DegenerateOrbit",
            Error::NonConvexCurve(_) => "NonConvexCurve",
            Error::DomainError(_) => "DomainError",
            Error::RangeError(_) => "RangeError",
            Error::DiagonalError => "DiagonalError",
            Error::ResolutionError(_) => "ResolutionError",
            Error::TargetTooClose { .. } => "TargetTooClose",
            Error::SolveFailure(_) => "SolveFailure",
            Error::TruncationError { .. } => "TruncationError",
            Error::IllConditionedFit(_) => "IllConditionedFit",
            Error::WindowNotIsolated(_) => "WindowNotIsolated",
            Error::DegenerateHessian(_) => "DegenerateHessian",
            Error::RegimeError(_) => "RegimeError",
            Error::DegenerateAngle(_) => "DegenerateAngle",
            Error::JetOrderUnavailable(_) => "JetOrderUnavailable",
            Error::Config(_) => "Config",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
