use alloc::string::String;
use thiserror::Error;

/// Failures raised by the algebraic constructions.
///
/// Variants carrying a residual report the measured quantity that broke the
/// tolerance so callers can surface it verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected}x{expected}, got {got_rows}x{got_cols}")]
    ShapeMismatch {
        expected: usize,
        got_rows: usize,
        got_cols: usize,
    },

    #[error("element is not supported on the block diagonal (off-block mass {0:e})")]
    OffBlock(f64),

    #[error("invalid dimension vector: {0}")]
    InvalidDimensions(String),

    #[error("trace is not faithful (smallest Gram eigenvalue {0:e})")]
    TraceNotFaithful(f64),

    #[error("trace weights are not normalized (sum n_j t_j = {0})")]
    TraceNotNormalized(f64),

    #[error("algebra is not a subalgebra of the given source (residual {0:e})")]
    NotSubalgebra(f64),

    #[error("span is not a unital *-algebra (closure residual {0:e})")]
    NotAnAlgebra(f64),

    #[error("inclusion is not unital: {0}")]
    NotUnital(String),

    #[error("quasi-basis construction left residual {0:e}")]
    DegenerateModule(f64),

    #[error("index element is not central (commutator residual {0:e})")]
    NotCentral(f64),

    #[error("index element is not scalar (spread {0:e})")]
    IndexNotScalar(f64),

    #[error("dual expectation is inconsistent (least-squares residual {0:e})")]
    InconsistentExtension(f64),

    #[error("minimal index search did not converge (gradient norm {0:e})")]
    SearchDidNotConverge(f64),

    #[error("Perron eigenvalue is degenerate: {0}")]
    DegeneratePerron(String),

    #[error("operator does not lie in the basic construction (residual {0:e})")]
    NotInBasicConstruction(f64),

    #[error("intermediate coincides with the bottom algebra (A-norm {0:e})")]
    DegenerateIntermediate(f64),

    #[error("not an intermediate subalgebra: {0}")]
    NotIntermediate(String),

    #[error("tensor correspondence violated (subspace distance {0:e})")]
    CorrespondenceViolation(f64),

    #[error("instance exceeds the size cap: {0}")]
    SizeCap(String),

    #[error("not a subgroup: {0}")]
    NotASubgroup(String),

    #[error("invalid group table: {0}")]
    InvalidGroup(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = core::result::Result<T, Error>;
