use thiserror::Error;

/// Errors raised by the lattice, model, geometry and estimation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate lattice: determinant is zero")]
    DegenerateLattice,
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix rows are ragged or empty")]
    MalformedMatrix,
    #[error("expected a rank-2 lattice, got rank {0}")]
    WrongRank(usize),
    #[error("form is not hyperbolic (determinant {0} is not negative)")]
    NotHyperbolic(i128),
    #[error("integer overflow in exact arithmetic")]
    Overflow,
    #[error("matrix is not unimodular (determinant {0})")]
    NotUnimodular(i128),
    #[error("empty word")]
    EmptyWord,
    #[error("involution index {index} out of range 1..={len}")]
    InvalidIndex { index: usize, len: usize },
    #[error("y1 must be positive (family of vectors is identically zero)")]
    ZeroFamily,
    #[error("ragged family: vectors have unequal lengths")]
    RaggedFamily,
    #[error("Picard number {0} out of range 1..=3")]
    PicardOutOfRange(i64),
    #[error("invalid slope ({0}, {1})")]
    InvalidSlope(i64, i64),
    #[error("class {0:?} is not ample")]
    NotAmple(Vec<i64>),
    #[error("reduction failed after {0} steps")]
    ReductionBudget(usize),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("map is not hyperbolic (spectral radius 1)")]
    NotHyperbolicMap,
    #[error("invalid cone basis: {0}")]
    InvalidConeBasis(String),
    #[error("class {0:?} is not in the positive cone")]
    NotInPositiveCone(Vec<i64>),
    #[error("point left the affine window: |x| = {0}")]
    LeftAffineWindow(f64),
    #[error("point is off the surface (residual {0:e})")]
    OffSurface(f64),
    #[error("orbit point with max |x_i| = {0} exceeds the real-locus bound 1.5")]
    UnboundedRealLocus(f64),
    #[error("not enough usable lengths for a growth fit ({0} < 3)")]
    TooFewLengths(usize),
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
}

pub type Result<T> = std::result::Result<T, Error>;
