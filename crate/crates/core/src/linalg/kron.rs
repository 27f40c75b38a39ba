//! Lyapunov- and Stein-type matrix equations solved through `vec`.

use super::{Lu, RealMatrix};
use crate::error::{Error, Result};

/// Largest supported vectorized system, `n² ≤ 4096`.
pub const MAX_KRON_UNKNOWNS: usize = 4096;

/// Left-hand side of a matrix equation in the unknown `P`.
#[derive(Clone, Copy, Debug)]
pub enum KronEquation<'a> {
    /// `A P + P Aᵀ`
    Continuous(&'a RealMatrix),
    /// `A P Aᵀ − P`
    Discrete(&'a RealMatrix),
}

impl KronEquation<'_> {
    fn coefficient(&self) -> &RealMatrix {
        match self {
            KronEquation::Continuous(a) | KronEquation::Discrete(a) => a,
        }
    }

    /// The `n² × n²` operator acting on column-major `vec(P)`.
    pub fn operator(&self) -> RealMatrix {
        let a = self.coefficient();
        let n = a.rows();
        let eye = RealMatrix::identity(n);
        match self {
            KronEquation::Continuous(a) => &eye.kron(a) + &a.kron(&eye),
            KronEquation::Discrete(a) => &a.kron(a) - &RealMatrix::identity(n * n),
        }
    }

    /// Evaluates the left-hand side at `p`.
    pub fn apply(&self, p: &RealMatrix) -> RealMatrix {
        match self {
            KronEquation::Continuous(a) => &(*a * p) + &(p * &a.transpose()),
            KronEquation::Discrete(a) => &(&(*a * p) * &a.transpose()) - p,
        }
    }
}

/// Solves `lhs(P) = rhs` for `P`.
pub fn kron_solve(eq: KronEquation<'_>, rhs: &RealMatrix) -> Result<RealMatrix> {
    let a = eq.coefficient();
    let n = a.ensure_square()?;
    rhs.ensure_shape("kron_solve", (n, n))?;
    if n * n > MAX_KRON_UNKNOWNS {
        return Err(Error::Precondition(format!(
            "vectorized system has {} unknowns, limit {MAX_KRON_UNKNOWNS}",
            n * n
        )));
    }
    let lu = Lu::factor(&eq.operator()).map_err(|e| match e {
        Error::Singular { .. } => Error::SingularPencil,
        other => other,
    })?;
    let x = lu.solve(&rhs.vectorize());
    Ok(RealMatrix::unvectorize(n, n, &x))
}
