use thiserror::Error;

/// Errors raised by construction, validation and solving.
#[derive(Debug, Error)]
pub enum QotError {
    #[error("block shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("state is not faithful (min eigenvalue {min_eig:.3e} < {floor:.1e})")]
    NotFaithful { min_eig: f64, floor: f64 },

    #[error("state validation failed: {0}")]
    InvalidState(String),

    #[error("map is not unital (residual {0:.3e})")]
    NotUnital(f64),

    #[error("map is not completely positive (Choi min eigenvalue {0:.3e})")]
    NotCp(f64),

    #[error("map is not positive: {0}")]
    NotPositive(String),

    #[error("map is not anti-multiplicative (residual {0:.3e})")]
    NotAntiMultiplicative(f64),

    #[error("state invariance violated (residual {0:.3e})")]
    InvarianceViolated(f64),

    #[error("coupling marginal mismatch (residual {0:.3e})")]
    MarginalMismatch(f64),

    #[error("coupling validation failed: {0}")]
    InvalidCoupling(String),

    #[error("not a reversing operation: {0}")]
    NotReversing(String),

    #[error("system has no reversing operation")]
    NoReversingOperation,

    #[error("operation requires abelian algebras")]
    NotAbelian,

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("problem too large for the brute-force oracle: {0}")]
    TooLarge(String),

    #[error("solver did not converge: {0}")]
    NotConverged(String),

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("system fails detailed balance required here (residual {0:.3e})")]
    SqdbViolated(f64),

    #[error("wrong system shape: {0}")]
    WrongShape(String),
}

pub type Result<T> = std::result::Result<T, QotError>;
