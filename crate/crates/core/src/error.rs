use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("mesh generation failed: {0}")]
    MeshFailure(String),
    #[error("integrand is not finite at ({x}, {y})")]
    NonFiniteIntegrand { x: f64, y: f64 },
    #[error("ball of radius {delta} around the source leaves the domain (admissible radius {max})")]
    DeltaTooLarge { delta: f64, max: f64 },
    #[error("singular linear system: {0}")]
    SingularSystem(String),
    #[error("source point at distance {distance} from the boundary (minimum {required})")]
    SourceTooCloseToBoundary { distance: f64, required: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("maximizer lies within two edges of the boundary at ({x}, {y})")]
    MaximizerOnBoundaryRing { x: f64, y: f64 },
    #[error("point is not critical: gradient norm {grad_norm:e} exceeds {tolerance:e}")]
    NotCritical { grad_norm: f64, tolerance: f64 },
    #[error("D = {d} ≤ 0 but the Hessian at the maximizer is not negative definite: {hessian:?}")]
    DegenerateMaximizer { d: f64, hessian: [[f64; 2]; 2] },
    #[error("exponential overflow (max u = {max_u})")]
    Overflow { max_u: f64 },
    #[error("blow-up tail has {found} admissible points, need {required}")]
    InsufficientTail { found: usize, required: usize },
    #[error("canonical ball around the source does not fit in the domain")]
    BallDoesNotFit,
    #[error("threshold {0} sits on a nodal plateau")]
    DegenerateThreshold(f64),
    #[error("field has no positive part")]
    EmptyPositivePart,
    #[error("branch has no points")]
    EmptyBranch,
    #[error("table has {rows} rows, need at least {required}")]
    TableTooSmall { rows: usize, required: usize },
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
