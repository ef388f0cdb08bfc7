use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error("only {found} of {wanted} roots found below k = {ceiling}")]
    BracketingFailure { found: usize, wanted: usize, ceiling: f64 },
    #[error("singular slope denominator {0:e}")]
    SingularSlope(f64),
    #[error("lost track of root {index} near k = {k}")]
    ContinuationLost { index: usize, k: f64 },
    #[error("degenerate mode normalization at k = {0}")]
    DegenerateNorm(f64),
    #[error("x = {x} outside [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },
    #[error("integration blew up at t = {0}")]
    StabilityFailure(f64),
    #[error("extraction window {window} shorter than {needed}")]
    WindowTooShort { window: f64, needed: f64 },
    #[error("extraction residual {residual:e} above {bound:e}")]
    PoorFit { residual: f64, bound: f64 },
    #[error("negative occupancy {value} in mode {mode}")]
    NegativeOccupancy { mode: usize, value: f64 },
    #[error("symplectic defect {0:e}")]
    SymplecticViolation(f64),
    #[error("covariance not physical: symplectic eigenvalue {0}")]
    PhysicalityViolation(f64),
    #[error("negative discriminant {0:e} in negativity")]
    NonPositiveDiscriminant(f64),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("Dirichlet approximation invalid: ratio {0}")]
    DirichletApproxInvalid(f64),
    #[error("flux drive fit residual {0:e} too large")]
    PoorDriveFit(f64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

impl Error {
    /// True for errors that come from numerics rather than bad input.
    pub fn is_numeric(&self) -> bool {
        !matches!(
            self,
            Error::InvalidGeometry(_)
                | Error::InvalidOptions(_)
                | Error::OutOfRange(_)
                | Error::OutOfDomain { .. }
                | Error::Dimension(_)
                | Error::DirichletApproxInvalid(_)
        )
    }
}
