use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("quadrature did not converge: estimated error {estimate:e} exceeds tolerance {tol:e}")]
    NonConvergent { estimate: f64, tol: f64 },

    #[error("evaluation point {0} lies outside the domain")]
    EvaluationOutsideDomain(Complex64),

    #[error("non-finite value encountered at {0}")]
    NonFinite(Complex64),

    #[error("no mesh path between {from} and {to}")]
    PathNotFound { from: Complex64, to: Complex64 },

    #[error("point {point} is too close to the boundary (distance {distance:e})")]
    TooCloseToBoundary { point: Complex64, distance: f64 },

    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("pole/zero mismatch near {point}: {detail}")]
    PoleMismatch { point: Complex64, detail: String },

    #[error("real periods do not vanish on cycle {cycle}: residual {residual:e}")]
    RealPeriodsNonzero { cycle: usize, residual: f64 },

    #[error("metric degenerates at {0}")]
    MetricDegenerate(Complex64),

    #[error("no ideal-boundary vertex is reachable")]
    UnreachableBoundary,

    #[error("spray construction failed: rank {rank} < required {required}; enlarge the generator family")]
    ConstructionFailed { rank: usize, required: usize },

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("singular Jacobian in period solver")]
    SingularJacobian,

    #[error("function vanishes on the contour near {0}")]
    ZeroOnContour(Complex64),

    #[error("winding integral {0} is not close to an integer")]
    NonIntegerResult(f64),

    #[error("divisor orders differ: {0}")]
    OrderMismatch(String),

    #[error("divisor point {0} lies outside every chart neighborhood")]
    PointOutsideNeighborhood(Complex64),

    #[error("zero counts differ in a disc: {0}")]
    ProximityTooLarge(String),

    #[error("reference component is degenerate: {0}")]
    ReferenceComponentDegenerate(String),

    #[error("symmetry violated: {0}")]
    SymmetryViolated(String),

    #[error("invalid labyrinth schedule: {0}")]
    ScheduleInvalid(String),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("expression parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
