//! Dense real linear algebra for small matrices.

mod decomp;
mod eigen;
mod kron;
mod matrix;
mod spectrum;

pub use decomp::{
    cholesky_pd, default_rank_tolerance, inverse, is_positive_definite, null_space, pd_tolerance,
    rank, solve_linear, Lu, PivotedQr,
};
pub use eigen::eigenvalues;
pub use kron::{kron_solve, KronEquation, MAX_KRON_UNKNOWNS};
pub use matrix::RealMatrix;
pub use spectrum::Spectrum;
