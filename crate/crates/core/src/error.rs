use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("degree {k} outside 0..={max}")]
    DegreeOutOfRange { k: usize, max: usize },
    #[error("exponential needs an even-graded argument")]
    OddGraded,
    #[error("exponential of a nonzero exact scalar part is not exact")]
    InexactExponential,
    #[error("matrix is not antisymmetric")]
    NotAntisymmetric,
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("exact series did not terminate; use float entries")]
    SeriesNotTerminated,
    #[error("limit diverges: even coefficient of degree {degree} below 2i = {bound} is nonzero")]
    DivergentLimit { degree: usize, bound: usize },
    #[error("filtration bound {bound} violated by a monomial of degree {degree}")]
    FiltrationBound { degree: usize, bound: usize },
    #[error("element must be supported on indices {0}.. only")]
    SupportViolation(usize),
    #[error("1 is an eigenvalue of the normal isometry")]
    FixedPointDegeneracy,
    #[error("matrix is singular")]
    Singular,
    #[error("ill-conditioned spectrum: nonkernel eigenvalue {0:e} below threshold")]
    IllConditioned(f64),
    #[error("kernel dimension changed along the family: {0} vs {1}")]
    ConstantKernelViolation(usize, usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
