use thiserror::Error;

/// Errors raised by the library.
///
/// Every variant carries a stable machine-readable tag (see [`Error::tag`]),
/// which the command-line front end prints on failure.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("degenerate parameters: {0}")]
    DegenerateParams(String),
    #[error("adaptive step size underflow near w = {re:.6}{im:+.6}i")]
    StepFailure { re: f64, im: f64 },
    #[error("solution data vanish identically")]
    ZeroSolution,
    #[error("monodromy matrix has a repeated eigenvalue")]
    NonDiagonalizable,
    #[error("series coefficients do not decay up to N = {0}")]
    NoDecay(usize),
    #[error("banded system is singular")]
    SingularSystem,
    #[error("denominator vanishes (pole) at the requested point")]
    PoleHit,
    #[error("square-root branch lost: phase increment {0:.3} exceeds the guard")]
    BranchLoss(f64),
    #[error("initial phase yields a vanishing eigenfunction ({0})")]
    DegenerateInitial(&'static str),
    #[error("secant factor is singular: {0}")]
    SecantSingular(String),
    #[error("lambda + mu^2 must be real and positive")]
    NonPositiveSum,
    #[error("operation requires a negative integer order, got l = {0}")]
    NonIntegerOrder(f64),
    #[error("phase-map constants are degenerate")]
    DegenerateConstants,
}

impl Error {
    /// Short snake_case identifier used in machine-readable diagnostics.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "invalid_params",
            Error::DegenerateParams(_) => "degenerate_params",
            Error::StepFailure { .. } => "step_failure",
            Error::ZeroSolution => "zero_solution",
            Error::NonDiagonalizable => "non_diagonalizable",
            Error::NoDecay(_) => "no_decay",
            Error::SingularSystem => "singular_system",
            Error::PoleHit => "pole_hit",
            Error::BranchLoss(_) => "branch_loss",
            Error::DegenerateInitial(_) => "degenerate_initial",
            Error::SecantSingular(_) => "secant_singular",
            Error::NonPositiveSum => "non_positive_sum",
            Error::NonIntegerOrder(_) => "non_integer_order",
            Error::DegenerateConstants => "degenerate_constants",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
