use serde::{Deserialize, Serialize};

use super::state_margin;
use crate::canonical::{Domain, LtiSystem};
use crate::error::{Error, Result};
use crate::linalg::{rank, RealMatrix};
use crate::poly::{char_poly, VERDICT_TOLERANCE};

/// Rank of the coefficient map's Jacobian at a gain, with the boundary claim.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRank {
    pub rank: usize,
    /// Spectral abscissa of `A − BM`.
    pub margin: f64,
    /// Full rank and marginal abscissa: `M` lies on the boundary of the
    /// Hurwitz state-feedback set. `false` is not a claim either way.
    pub certified_boundary: bool,
}

/// Central-difference Jacobian of `K ↦ (c₀, …, c_{n−1})`, the non-leading
/// coefficients of `χ_{A−BK}`. Column `i·n + j` holds `∂/∂K_ij`.
pub fn char_poly_jacobian(sys: &LtiSystem, k: &RealMatrix) -> Result<RealMatrix> {
    let (n, m) = (sys.n(), sys.m());
    k.ensure_shape("char_poly_jacobian", (m, n))?;
    let coeffs = |kk: &RealMatrix| -> Result<Vec<f64>> {
        let p = char_poly(&(&sys.a - &(&sys.b * kk)))?;
        Ok(p.coeffs()[..n].to_vec())
    };
    let mut jac = RealMatrix::zeros(n, m * n);
    for i in 0..m {
        for j in 0..n {
            let h = 1e-6 * k[(i, j)].abs().max(1.0);
            let mut plus = k.clone();
            let mut minus = k.clone();
            plus[(i, j)] += h;
            minus[(i, j)] -= h;
            let (cp, cm) = (coeffs(&plus)?, coeffs(&minus)?);
            for r in 0..n {
                jac[(r, i * n + j)] = (cp[r] - cm[r]) / (2.0 * h);
            }
        }
    }
    Ok(jac)
}

/// Boundary certificate for a Hurwitz state-feedback gain `M`.
///
/// Never asserts that `M` is off the boundary: a rank below `n` leaves the
/// question open.
pub fn boundary_rank(sys: &LtiSystem, m: &RealMatrix) -> Result<BoundaryRank> {
    if sys.domain != Domain::Continuous {
        return Err(Error::Precondition("boundary rank applies to continuous systems".into()));
    }
    let jac = char_poly_jacobian(sys, m)?;
    let r = rank(&jac, Some(1e-6 * jac.norm_fro()));
    let margin = state_margin(sys, m)?;
    Ok(BoundaryRank {
        rank: r,
        margin,
        certified_boundary: r == sys.n() && margin.abs() <= VERDICT_TOLERANCE,
    })
}

/// Dimension-counting predicates related to boundedness of the Hurwitz set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnboundednessReport {
    /// `rank(B) < m` or `rank(C) < p`; sufficient for unboundedness.
    pub rank_deficient_bc: bool,
    /// `n ≤ m + p − 1`.
    pub kimura: bool,
    /// `n < mp`.
    pub generic_mp: bool,
}

pub fn unboundedness_predicates(sys: &LtiSystem) -> UnboundednessReport {
    let (n, m, p) = (sys.n(), sys.m(), sys.p());
    let c = sys.output_matrix();
    UnboundednessReport {
        rank_deficient_bc: rank(&sys.b, None) < m || rank(&c, None) < p,
        kimura: n + 1 <= m + p,
        generic_mp: n < m * p,
    }
}
