use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("period must be positive and finite, got {0}")]
    InvalidPeriod(f64),

    #[error("cosine coefficient list is empty")]
    EmptyCoefficients,

    #[error("non-finite value in potential descriptor")]
    NonFiniteCoefficient,

    #[error("tolerance {0} outside the supported range [1e-14, 1e-3]")]
    InvalidTolerance(f64),

    #[error("step size underflow at x = {x} (h = {h:e})")]
    StepUnderflow { x: f64, h: f64 },

    #[error("integrator exceeded {steps} steps before reaching x = {target}")]
    TooManySteps { steps: usize, target: f64 },

    #[error("lambda = {lambda} is not strictly inside a spectral gap (discriminant {discriminant})")]
    NotInGap { lambda: f64, discriminant: f64 },

    #[error("could not bracket {what} below search ceiling {ceiling}")]
    BracketFailure { what: String, ceiling: f64 },

    #[error("band edge {edge} is not within {tol:e} of any Dirichlet or Neumann eigenvalue (nearest {nearest})")]
    EdgeCertification { edge: f64, nearest: f64, tol: f64 },

    #[error("eigenfunction changes monotonicity {count} times on the half period")]
    MultipleMonotonicityChanges { count: usize },

    #[error("potential is not strictly monotone on the half period")]
    NonMonotonePotential,

    #[error("{count} poles detected in gap {gap_index}; at most one is possible")]
    TooManyPoles { gap_index: usize, count: usize },

    #[error("{count} interface eigenvalues found in gap {gap_index}; at most two are possible")]
    TooManyEigenvalues { gap_index: usize, count: usize },

    #[error("root existence ({found}) disagrees with polarity prediction ({predicted}) on overlap ({lo}, {hi})")]
    PredictionMismatch {
        predicted: bool,
        found: bool,
        lo: f64,
        hi: f64,
    },

    #[error("gaps do not overlap")]
    EmptyOverlap,

    #[error("invalid finite-difference grid: {0}")]
    InvalidGrid(String),

    #[error("factorization broke down at shift {shift} after perturbation retries")]
    FactorizationBreakdown { shift: f64 },

    #[error("invalid interface problem: {0}")]
    InvalidProblem(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
