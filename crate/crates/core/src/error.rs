use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("inadmissible parameters: {0}")]
    Admissibility(String),
    #[error("degenerate parameters: {0}")]
    Degenerate(String),
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),
    #[error("division by zero: {0}")]
    DivisionByZero(String),
    #[error("special-case display does not reduce to the general family: {0}")]
    Recovery(String),
    #[error("kernel has a pole at z = 0")]
    Pole,
    #[error("kernel is singular at 0; use the principal-value routine")]
    SingularKernel,
    #[error("kernel is regular at 0; operation needs a simple pole")]
    RegularKernel,
    #[error("gauge normalization required: {0}")]
    Gauge(String),
    #[error("gauge transform broke the commutation identity (residual {0:e})")]
    GaugeBroken(f64),
    #[error("invalid residual grid: {0}")]
    Grid(String),
    #[error("grid needs at least 2 nodes, got {0}")]
    Size(usize),
    #[error("operation requires a Legendre-Gauss-Lobatto grid")]
    GridKind,
    #[error("operators live on different grids")]
    GridMismatch,
    #[error("point outside the domain: {0}")]
    Domain(String),
    #[error("eigensolver failed: {0}")]
    EigFailure(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
