use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("root list is empty")]
    EmptyRoots,
    #[error("leading coefficient is zero")]
    ZeroLeading,
    #[error("polynomial must have degree at least {required}, got {actual}")]
    DegreeTooLow { required: usize, actual: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("root list inconsistent with coefficients (relative error {0:e})")]
    InconsistentRoots(f64),
    #[error("operation requires the root list of the polynomial")]
    RootsRequired,
    #[error("point {0} coincides with an atom or zero")]
    AtomCollision(String),
    #[error("index {index} out of range for {len} roots")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("root {0} lies outside the closed unit disk")]
    OutsideUnitDisk(String),
    #[error("f(a) = 0 fails: nearest root at distance {0:e}")]
    NotAZero(f64),
    #[error("parameter out of range: {0}")]
    InvalidParameter(String),
    #[error("root finding did not converge (max backward error {0:e})")]
    NoConvergence(f64),
    #[error("derivative vanishes at {0}; possible multiple root")]
    DerivativeVanishes(String),
    #[error("contour passes within {distance:e} of a zero")]
    ContourTooClose { distance: f64 },
    #[error("angular refinement budget exceeded")]
    RefinementBudget,
    #[error("winding accumulation not integral (off by {0:e} rad)")]
    NonIntegralWinding(f64),
    #[error("no admissible radius in [{r1}, {r2}]")]
    NoAdmissibleRadius { r1: f64, r2: f64 },
    #[error("atom at modulus {modulus} not strictly inside radius {radius}")]
    AtomOnCircle { modulus: f64, radius: f64 },
    #[error("cross-check failed: {what} discrepancy {discrepancy:e}")]
    CrossCheck { what: &'static str, discrepancy: f64 },
    #[error("config error: {0}")]
    Config(String),
    #[error("record is missing field required for plot kind {0}")]
    MissingPlotData(&'static str),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}
