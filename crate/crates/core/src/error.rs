use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of the requested transform or functional.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("enumeration cap exceeded: n = {n} but at most {cap} spins can be enumerated")]
    CapExceeded { n: usize, cap: usize },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// The replica-symmetry predicate takes the same value at both ends of the search interval.
    #[error("no transition on [{lo}, {hi}]: predicate is {value} at both ends")]
    NoTransition { lo: f64, hi: f64, value: bool },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
