use thiserror::Error;

/// Errors raised by the numerical and symbolic layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension {0}: the basis must have at least one state")]
    InvalidDimension(usize),

    #[error("unsupported base operator {0:?}: only position and momentum powers are available")]
    UnsupportedBase(crate::fock::OperatorKind),

    #[error("invalid oscillator spec: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("eigensolver failed to converge for a {dim}x{dim} matrix")]
    SolverFailure { dim: usize },

    #[error("no converged levels to report")]
    EmptyReport,

    #[error("level {level} has an undefined indefinite-norm sign (|norm| = {norm:e})")]
    UndefinedSign { level: usize, norm: f64 },

    #[error("cannot combine polynomials from different sectors")]
    SectorMismatch,

    #[error("{0}")]
    Unsupported(String),

    #[error("degenerate unperturbed level {0}")]
    DegenerateLevel(usize),

    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),

    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
