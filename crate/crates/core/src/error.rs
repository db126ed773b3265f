use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TgpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("point is not on the manifold: {0}")]
    Infeasible(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported direction: {0}")]
    UnsupportedSpec(String),
    #[error("not a descent direction: <grad, H> = {0}")]
    NotDescent(f64),
}

pub type Result<T> = std::result::Result<T, TgpError>;
