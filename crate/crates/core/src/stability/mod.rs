//! Membership in the Hurwitz and Schur stabilizing sets, and operations on gains.

mod boundary;
mod placement;
mod scaling;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use boundary::{boundary_rank, char_poly_jacobian, unboundedness_predicates, BoundaryRank, UnboundednessReport};
pub use placement::{pole_place, schur_unbounded_sequence};
pub use scaling::{bilinear, scale_gain, scale_gain_indices, scale_gain_for_system};

use crate::canonical::{Domain, LtiSystem};
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, RealMatrix, Spectrum};
use crate::poly::StabilityVerdict;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetKind {
    HurwitzState,
    HurwitzOutput,
    SchurState,
    SchurOutput,
}

impl SetKind {
    pub fn new(domain: Domain, output: bool) -> Self {
        match (domain, output) {
            (Domain::Continuous, false) => SetKind::HurwitzState,
            (Domain::Continuous, true) => SetKind::HurwitzOutput,
            (Domain::Discrete, false) => SetKind::SchurState,
            (Domain::Discrete, true) => SetKind::SchurOutput,
        }
    }

    pub fn domain(self) -> Domain {
        match self {
            SetKind::HurwitzState | SetKind::HurwitzOutput => Domain::Continuous,
            SetKind::SchurState | SetKind::SchurOutput => Domain::Discrete,
        }
    }

    pub fn is_output(self) -> bool {
        matches!(self, SetKind::HurwitzOutput | SetKind::SchurOutput)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SetKind::HurwitzState => "hurwitz_state",
            SetKind::HurwitzOutput => "hurwitz_output",
            SetKind::SchurState => "schur_state",
            SetKind::SchurOutput => "schur_output",
        }
    }
}

impl fmt::Display for SetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Verdict for one gain against one stabilizing set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainMembership {
    pub gain: RealMatrix,
    pub set_kind: SetKind,
    pub verdict: StabilityVerdict,
    pub spectrum: Spectrum,
}

/// Signed distance of a spectrum from the domain's stability boundary.
pub fn spectral_margin(spectrum: &Spectrum, domain: Domain) -> f64 {
    match domain {
        Domain::Continuous => spectrum.max_real(),
        Domain::Discrete => spectrum.spectral_radius() - 1.0,
    }
}

/// Verdict for an arbitrary matrix in the given domain.
pub fn matrix_verdict(m: &RealMatrix, domain: Domain) -> Result<(StabilityVerdict, Spectrum)> {
    let spectrum = eigenvalues(m)?;
    Ok((StabilityVerdict::from_margin(spectral_margin(&spectrum, domain)), spectrum))
}

/// `A − BK` for state feedback or `A − BKC` for output feedback.
pub fn closed_loop(sys: &LtiSystem, k: &RealMatrix, kind: SetKind) -> Result<RealMatrix> {
    let (m, n) = (sys.m(), sys.n());
    if kind.is_output() {
        let c = sys.c.as_ref().ok_or(Error::MissingOutput)?;
        k.ensure_shape("closed_loop", (m, c.rows()))?;
        Ok(&sys.a - &(&(&sys.b * k) * c))
    } else {
        k.ensure_shape("closed_loop", (m, n))?;
        Ok(&sys.a - &(&sys.b * k))
    }
}

/// Set kind implied by the gain shape: output feedback when `C` is present
/// and `K` has `p` columns, state feedback when `K` has `n` columns.
pub fn infer_kind(sys: &LtiSystem, k: &RealMatrix) -> Result<SetKind> {
    if let Some(c) = &sys.c {
        if k.cols() == c.rows() {
            return Ok(SetKind::new(sys.domain, true));
        }
    }
    if k.cols() == sys.n() {
        return Ok(SetKind::new(sys.domain, false));
    }
    Err(Error::DimensionMismatch {
        op: "membership",
        expected: (sys.m(), sys.p()),
        got: k.shape(),
    })
}

/// Membership of `K` in the stabilizing set selected by the system's domain.
pub fn membership(sys: &LtiSystem, k: &RealMatrix) -> Result<GainMembership> {
    let kind = infer_kind(sys, k)?;
    membership_as(sys, k, kind)
}

pub fn membership_as(sys: &LtiSystem, k: &RealMatrix, kind: SetKind) -> Result<GainMembership> {
    if kind.domain() != sys.domain {
        return Err(Error::Precondition(format!(
            "set kind {kind} does not match a {} system",
            sys.domain.as_str()
        )));
    }
    let acl = closed_loop(sys, k, kind)?;
    let (verdict, spectrum) = matrix_verdict(&acl, sys.domain)?;
    Ok(GainMembership {
        gain: k.clone(),
        set_kind: kind,
        verdict,
        spectrum,
    })
}

/// State-feedback margin of `K`; the hot path for sampling.
pub fn state_margin(sys: &LtiSystem, k: &RealMatrix) -> Result<f64> {
    let acl = closed_loop(sys, k, SetKind::new(sys.domain, false))?;
    Ok(spectral_margin(&eigenvalues(&acl)?, sys.domain))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::StabilityClass;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn bilinear_pair() -> LtiSystem {
        let a = RealMatrix::from_rows(&[
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 0.0, 0.0],
        ]);
        let b = RealMatrix::from_rows(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 0.0], &[0.0, 1.0]]);
        LtiSystem::state_feedback(a, b, Domain::Discrete).unwrap()
    }

    #[test]
    fn zero_gain_on_nilpotent_pair_is_schur() {
        let sys = bilinear_pair();
        let mem = membership(&sys, &RealMatrix::zeros(2, 4)).unwrap();
        assert_eq!(mem.set_kind, SetKind::SchurState);
        assert_eq!(mem.verdict.class, StabilityClass::Stable);
        assert_eq!(mem.verdict.margin, -1.0);
    }

    #[test]
    fn identity_is_not_hurwitz() {
        let sys = LtiSystem::state_feedback(RealMatrix::identity(2), RealMatrix::identity(2), Domain::Continuous).unwrap();
        let mem = membership(&sys, &RealMatrix::zeros(2, 2)).unwrap();
        assert_eq!(mem.verdict.class, StabilityClass::Unstable);
    }

    #[test]
    fn output_feedback_uses_c() {
        let a = RealMatrix::from_diag(&[1.0, 2.0]);
        let b = RealMatrix::identity(2);
        let c = RealMatrix::from_rows(&[&[1.0, 1.0]]);
        let sys = LtiSystem::new(a, b, Some(c), Domain::Continuous).unwrap();
        let k = RealMatrix::from_rows(&[&[3.0], &[3.0]]);
        let mem = membership(&sys, &k).unwrap();
        assert_eq!(mem.set_kind, SetKind::HurwitzOutput);
        // A - BKC = [[-2, -3], [-3, -1]] has a positive eigenvalue.
        assert_eq!(mem.verdict.class, StabilityClass::Unstable);
        assert!(membership(&sys, &RealMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn openness_probe() {
        let mut rng = StdRng::seed_from_u64(21);
        let sys = bilinear_pair();
        for _ in 0..10 {
            let k = RealMatrix::from_fn(2, 4, |_, _| rng.gen_range(-0.3..0.3));
            let mem = membership(&sys, &k).unwrap();
            if mem.verdict.margin >= -1e-6 {
                continue;
            }
            for _ in 0..20 {
                let d = RealMatrix::from_fn(2, 4, |_, _| rng.gen_range(-1.0..1.0));
                let d = d.scale(1e-9 / d.norm_fro());
                assert!(membership(&sys, &(&k + &d)).unwrap().verdict.is_stable());
            }
        }
    }
}
