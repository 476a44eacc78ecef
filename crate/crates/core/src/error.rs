use alloc::string::String;
use thiserror::Error;

/// Errors surfaced by construction, assembly, and solving.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid coefficient data: {0}")]
    InvalidCoefficient(String),

    #[error("invalid measure data: {0}")]
    InvalidMeasure(String),

    #[error("sign constraint violated: {0}")]
    SignViolation(String),

    #[error("tail model not supported here: {0}")]
    UnsupportedTail(String),

    #[error("Cesaro mean of the anti-derivative does not exist (tail grows); zero lies in the essential spectrum")]
    CesaroUndefined,

    #[error("discretization precondition violated: {0}")]
    InvalidNodes(String),

    #[error("integral required for assembly diverges: {0}")]
    DivergentIntegral(String),

    #[error("matrix expected symmetric positive semi-definite: {0}")]
    NotPsd(String),

    #[error("Cholesky factorization failed; energy Gram matrix not positive definite")]
    CholeskyFailed,

    #[error("pencil eigenvalue {re}+{im}i has imaginary part beyond the round-off budget")]
    ComplexEigenvalue { re: f64, im: f64 },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("internal consistency violation: {0}")]
    Inconsistent(String),
}
