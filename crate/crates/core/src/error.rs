use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("polynomial is not exactly divisible")]
    NotDivisible,
    #[error("operation is undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("operation needs a polynomial of degree at least 1")]
    ConstantPolynomial,
    #[error("root iteration did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("certified root disks {0} and {1} overlap")]
    ClusterDetected(usize, usize),
    #[error("|p| underflows at a quadrature node")]
    NodeOnRoot,
    #[error("polynomial is not primitive (content {0})")]
    NotPrimitive(String),
    #[error("polynomial is not squarefree")]
    NotSquarefree,
    #[error("degree bound {degree} must exceed {needed}")]
    DegreeTooSmall { degree: usize, needed: usize },
    #[error("zero is a root, sets must avoid the origin")]
    ZeroIsRoot,
    #[error("constant or leading coefficient vanishes")]
    VanishingEndCoefficient,
    #[error("no gap of width 2e-9 between point arguments for N = {0}")]
    NoGap(usize),
    #[error("window width {0} is outside (0, 1/2]")]
    BadWindow(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
