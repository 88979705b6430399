use thiserror::Error;

/// Errors raised by operator construction, criteria evaluation and the
/// extremal constructions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("entry count {got} does not match shape {rows}x{cols}")]
    ShapeMismatch { rows: usize, cols: usize, got: usize },

    #[error("not Hermitian (max |m - m^dagger| = {0:e})")]
    NotHermitian(f64),

    #[error("not positive semidefinite (most negative eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("trace is not one (got {0})")]
    TraceNotOne(f64),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("dimension {0} exceeds the cap of {1}")]
    DimensionCapExceeded(usize, usize),

    #[error("eigensolver did not converge after {0} sweeps")]
    ConvergenceFailure(usize),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("relative entropy is infinite: q[{0}] = 0 while p[{0}] > 0")]
    Infinite(usize),

    #[error("infeasible construction: {0}")]
    Infeasible(String),

    #[error("root search failed: residual {0:e}")]
    RootSearchFailure(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("state {index}: {source}")]
    InvalidState {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("subset of key bits is empty")]
    EmptySubset,

    #[error("conditioning event has zero prior mass")]
    ZeroMassCondition,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
