use thiserror::Error;

/// Errors raised by the computational modules.
///
/// The CLI maps these onto exit codes: parse problems to 2, invariant
/// violations to 3 and convergence failures to 4.
#[derive(Debug, Error)]
pub enum Error {
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("degenerate loop: determinant vanishes identically")]
    DegenerateLoop,

    #[error("undefined order: vector is identically zero")]
    UndefinedOrder,

    #[error("empty weight list")]
    EmptyWeights,

    #[error("invalid weight system: {0}")]
    InvalidWeights(String),

    #[error("not eventually polynomial: sample at k = {k} disagrees with the fitted polynomial")]
    NotPolynomial { k: u64 },

    #[error("hilbert data mismatch between relative invariants")]
    HilbertMismatch,

    #[error("Chow form unavailable: {0}")]
    ChowFormUnavailable(String),

    #[error("transformed form vanishes identically")]
    ZeroForm,

    #[error("parametrization has base points: {0}")]
    BasePoints(String),

    #[error("quadrature did not converge: error estimate {estimate:e} above tolerance {tol:e}")]
    Quadrature { estimate: f64, tol: f64 },

    #[error("Kähler positivity fails: density {value:e} at s = {s}")]
    Positivity { s: f64, value: f64 },

    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),

    #[error("no convergence after {steps} steps, residual {residual:e}")]
    NoConvergence { steps: usize, residual: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
