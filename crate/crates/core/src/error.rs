//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("characteristic {0} is not prime")]
    NonPrimeCharacteristic(u32),
    #[error("modulus polynomial is reducible over Z_{0}")]
    ReducibleModulus(u32),
    #[error("characteristic-2 extensions are unsupported (p = 2 requires n = 1)")]
    UnsupportedEvenExtension,
    #[error("division by zero in finite field")]
    DivisionByZero,
    #[error("F_{{p^{0}}} is not a subfield of F_{{p^{1}}}")]
    NotASubfield(u32, u32),
    #[error("gram matrix of the basis is singular")]
    SingularGramMatrix,
    #[error("elements are not linearly independent over the subfield")]
    NotABasis,
    #[error("orbit count requires nonzero phase points")]
    ZeroPointArgument,
    #[error("operation unsupported for dimension {0}")]
    UnsupportedDimension(u32),
    #[error("symplectic matrix is not legal for d = 2")]
    IllegalSymplectic,
    #[error("invalid quantum state: {0}")]
    InvalidState(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("channel is not unital: deviation {0:.3e}")]
    NonUnitalChannel(f64),
    #[error("invalid POVM element: {0}")]
    InvalidPovmElement(String),
    #[error("marginal distribution has negative entry {0:.3e}")]
    NegativeMarginal(f64),
    #[error("displacement-class distribution has negative entry {0:.3e}")]
    NegativeClassProbability(f64),
    #[error("conditional outcome probability out of [0, 1]: {0:.3e}")]
    OutOfRangeConditional(f64),
    #[error("restricted family is inconsistent: {0}")]
    InconsistentMarginals(String),
    #[error("symplectic framework set is incomplete or unverified: {0}")]
    IncompleteFrameworkSet(String),
    #[error("measurement family is inconsistent: {0}")]
    InconsistentConditionals(String),
    #[error("family does not cover every striation: {0}")]
    IncompleteFamily(String),
    #[error("no minimal reconstructing set available: {0}")]
    MrsUnavailable(String),
    #[error("POVM combination weights must sum to at most 1 (got {0})")]
    WeightSumExceedsOne(f64),
    #[error("POVM combination weights must be positive (got {0})")]
    NonPositiveWeight(f64),
    #[error("imaginary residue {0:.3e} exceeds tolerance; input is not a valid {1}")]
    ImaginaryResidue(f64, &'static str),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("objects belong to different fields")]
    FieldMismatch,
    #[error("malformed input: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
