use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("field specification mismatch: expected {expected} coordinates, got {got}")]
    MismatchedField { expected: usize, got: usize },

    #[error("malformed multiplication table: {0}")]
    MalformedTable(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("embedding precision {requested:e} unachievable (certified bound {achieved:e})")]
    PrecisionUnderflow { requested: f64, achieved: f64 },

    #[error("degenerate equation: {0}")]
    DegenerateEquation(String),

    #[error("zero denominator")]
    ZeroDenominator,

    #[error("element is not integral")]
    NotIntegral,

    #[error("ideal is not prime: {0}")]
    NotPrime(String),

    #[error("budget exceeded: {what} needs {needed}, limit {limit}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        limit: u128,
    },

    #[error("inconsistent local data: {0}")]
    InconsistentLocalData(String),

    #[error("singular box centre: {0}")]
    SingularCenter(String),

    #[error("centre fails the equation: residual {residual:e} exceeds tolerance {tol:e}")]
    CenterNotSolution { residual: f64, tol: f64 },

    #[error("congruence ideal is not duality compatible; exponential-sum form unavailable")]
    DualityIncompatible,

    #[error("missing estimate: {0}")]
    MissingEstimate(&'static str),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn budget(what: &'static str, needed: u128, limit: u128) -> Self {
        Error::BudgetExceeded { what, needed, limit }
    }
}
