use crate::linalg::RealMatrix;

/// Errors raised by the analysis routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{op}: dimension mismatch, expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        op: &'static str,
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("data length {got} does not match a {rows}x{cols} matrix")]
    InvalidData { rows: usize, cols: usize, got: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is numerically singular (pivot {pivot:e} below tolerance {tol:e})")]
    Singular { pivot: f64, tol: f64 },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("QR iteration did not converge after {sweeps} sweeps on matrix {matrix:?}")]
    NoConvergence { sweeps: usize, matrix: RealMatrix },

    #[error("Kronecker operator is singular (eigenvalue pairing hits the excluded set)")]
    SingularPencil,

    #[error("degenerate polynomial: {0}")]
    DegeneratePolynomial(String),

    #[error("pair (A, B) is not controllable (Kalman rank {rank} < {n})")]
    NotControllable { rank: usize, n: usize },

    #[error("system has no output matrix C")]
    MissingOutput,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("bilinear transform has a pole: M - I is singular")]
    BilinearPole,

    #[error("closed loop is not stable (margin {margin:e})")]
    NotStabilizing { margin: f64 },

    #[error("target spectrum is not closed under conjugation")]
    NotConjugateClosed,

    #[error("construction infeasible: {0}")]
    Infeasible(String),

    #[error("region sampling supports at most 3 parameters, got {0}; slice the subspace")]
    Dimensionality(usize),

    #[error("path sample on segment {segment} at t = {t} is not stabilizing (margin {margin:e})")]
    PathVerification { segment: usize, t: f64, margin: f64 },

    #[error("structural precondition unmet: {0}")]
    Structural(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
