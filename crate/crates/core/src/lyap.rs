//! Lyapunov and Stein equations, the `(P, Y)` parametrization of Hurwitz
//! gains, and block-LMI witnesses for Schur gains.

use serde::{Deserialize, Serialize};

use crate::canonical::{Domain, LtiSystem};
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, is_positive_definite, kron_solve, KronEquation, Lu, RealMatrix};
use crate::poly::VERDICT_TOLERANCE;
use crate::stability::{closed_loop, SetKind};

fn require_pd(q: &RealMatrix, what: &str) -> Result<()> {
    if !is_positive_definite(q)? {
        return Err(Error::Precondition(format!("{what} must be positive definite")));
    }
    Ok(())
}

/// Symmetric `P ≻ 0` with `Acl P + P Aclᵀ + Q = 0`.
pub fn solve_lyapunov(acl: &RealMatrix, q: &RealMatrix) -> Result<RealMatrix> {
    require_pd(q, "Q")?;
    let margin = eigenvalues(acl)?.max_real();
    if margin >= -VERDICT_TOLERANCE {
        return Err(Error::NotStabilizing { margin });
    }
    let p = kron_solve(KronEquation::Continuous(acl), &q.scale(-1.0))
        .map_err(|_| Error::NotStabilizing { margin })?
        .symmetrize();
    if !is_positive_definite(&p)? {
        return Err(Error::NotStabilizing { margin });
    }
    Ok(p)
}

/// Symmetric `P ≻ 0` with `Acl P Aclᵀ − P + Q = 0`.
pub fn solve_stein(acl: &RealMatrix, q: &RealMatrix) -> Result<RealMatrix> {
    require_pd(q, "Q")?;
    let margin = eigenvalues(acl)?.spectral_radius() - 1.0;
    if margin >= -VERDICT_TOLERANCE {
        return Err(Error::NotStabilizing { margin });
    }
    let p = kron_solve(KronEquation::Discrete(acl), &q.scale(-1.0))
        .map_err(|_| Error::NotStabilizing { margin })?
        .symmetrize();
    if !is_positive_definite(&p)? {
        return Err(Error::NotStabilizing { margin });
    }
    Ok(p)
}

/// A point `(P, Y)` of the solution set of
/// `AP + PAᵀ − BY − YᵀBᵀ + Q = 0` with `P ≻ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovCertificate {
    pub p: RealMatrix,
    pub y: RealMatrix,
    pub q: RealMatrix,
}

impl LyapunovCertificate {
    /// Left-hand side of the defining equation; zero for a valid certificate.
    pub fn defect(&self, sys: &LtiSystem) -> RealMatrix {
        let by = &sys.b * &self.y;
        let ap = &sys.a * &self.p;
        &(&(&(&ap + &ap.transpose()) - &by) - &by.transpose()) + &self.q
    }

    pub fn residual(&self, sys: &LtiSystem) -> f64 {
        self.defect(sys).max_abs()
    }

    /// Residual within `1e-8` of the equation's scale and `P ≻ 0`.
    pub fn is_valid(&self, sys: &LtiSystem) -> Result<bool> {
        let scale = sys.a.norm_fro() * self.p.norm_fro()
            + sys.b.norm_fro() * self.y.norm_fro()
            + self.q.norm_fro();
        Ok(self.residual(sys) <= 1e-8 * scale.max(1.0) && is_positive_definite(&self.p.symmetrize())?)
    }

    /// `(1 − λ)·self + λ·other`; both must share `Q`.
    pub fn blend(&self, other: &Self, lambda: f64) -> Result<Self> {
        if self.q.max_abs_diff(&other.q) > 0.0 {
            return Err(Error::Precondition("blended certificates must share Q".into()));
        }
        Ok(Self {
            p: self.p.lerp(&other.p, lambda),
            y: self.y.lerp(&other.y, lambda),
            q: self.q.clone(),
        })
    }
}

/// `K ↦ (P(K), KP(K))` for a Hurwitz-stabilizing state-feedback gain.
pub fn gain_to_pair(sys: &LtiSystem, k: &RealMatrix, q: &RealMatrix) -> Result<LyapunovCertificate> {
    if sys.domain != Domain::Continuous {
        return Err(Error::Precondition("gain_to_pair needs a continuous system".into()));
    }
    let acl = closed_loop(sys, k, SetKind::HurwitzState)?;
    let p = solve_lyapunov(&acl, q)?;
    let y = k * &p;
    Ok(LyapunovCertificate { p, y, q: q.clone() })
}

/// `(P, Y) ↦ Y P⁻¹`.
pub fn pair_to_gain(cert: &LyapunovCertificate) -> Result<RealMatrix> {
    // K = Y P⁻¹ is the transpose of P⁻¹ Yᵀ since P is symmetric.
    let lu = Lu::factor(&cert.p)?;
    Ok(lu.solve_matrix(&cert.y.transpose()).transpose())
}

/// Feasible point of the block LMI
/// `[[X, AG + BL], [GᵀAᵀ + LᵀBᵀ, G + Gᵀ − X]] ≻ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteinWitness {
    pub x: RealMatrix,
    pub g: RealMatrix,
    pub l: RealMatrix,
}

impl SteinWitness {
    pub fn block(&self, sys: &LtiSystem) -> RealMatrix {
        let off = &(&sys.a * &self.g) + &(&sys.b * &self.l);
        let corner = &(&self.g + &self.g.transpose()) - &self.x;
        let top = RealMatrix::hstack(&[&self.x, &off]);
        let bottom = RealMatrix::hstack(&[&off.transpose(), &corner]);
        RealMatrix::vstack(&[&top, &bottom])
    }

    /// Cholesky test of the (symmetrized) block matrix.
    pub fn is_feasible(&self, sys: &LtiSystem) -> Result<bool> {
        is_positive_definite(&self.block(sys).symmetrize())
    }

    /// `ψ(X, L, G) = L G⁻¹`, the gain in the `A + BK` convention.
    pub fn psi(&self) -> Result<RealMatrix> {
        let lu = Lu::factor(&self.g.transpose())?;
        Ok(lu.solve_matrix(&self.l.transpose()).transpose())
    }

    /// `−ψ`, the gain in the `A − BK` convention used throughout this crate.
    pub fn gain(&self) -> Result<RealMatrix> {
        Ok(self.psi()?.scale(-1.0))
    }

    pub fn blend(&self, other: &Self, lambda: f64) -> Self {
        Self {
            x: self.x.lerp(&other.x, lambda),
            g: self.g.lerp(&other.g, lambda),
            l: self.l.lerp(&other.l, lambda),
        }
    }
}

/// Witness `X = G = P`, `L = −KP` with `P` the Stein solution for `A − BK`
/// and `Q = I`, so that `AG + BL = (A − BK)P`.
pub fn stein_lmi_witness(sys: &LtiSystem, k: &RealMatrix) -> Result<SteinWitness> {
    if sys.domain != Domain::Discrete {
        return Err(Error::Precondition("stein_lmi_witness needs a discrete system".into()));
    }
    let acl = closed_loop(sys, k, SetKind::SchurState)?;
    let p = solve_stein(&acl, &RealMatrix::identity(sys.n()))?;
    let l = (k * &p).scale(-1.0);
    Ok(SteinWitness { x: p.clone(), g: p, l })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::brunovsky_pair;
    use crate::stability::{pole_place, state_margin};
    use crate::linalg::Spectrum;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_matrix(rng: &mut StdRng, r: usize, c: usize) -> RealMatrix {
        RealMatrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0))
    }

    fn stable_matrix(rng: &mut StdRng, n: usize) -> RealMatrix {
        random_matrix(rng, n, n).add_scaled_identity(-(n as f64) - 0.5)
    }

    #[test]
    fn lyapunov_examples() {
        let p = solve_lyapunov(&RealMatrix::identity(3).scale(-1.0), &RealMatrix::identity(3).scale(2.0)).unwrap();
        assert!(p.max_abs_diff(&RealMatrix::identity(3)) < 1e-14);
        let p = solve_lyapunov(&RealMatrix::from_diag(&[-1.0, -2.0]), &RealMatrix::identity(2)).unwrap();
        assert!(p.max_abs_diff(&RealMatrix::from_diag(&[0.5, 0.25])) < 1e-14);
        assert!(matches!(
            solve_lyapunov(&RealMatrix::identity(2), &RealMatrix::identity(2)),
            Err(Error::NotStabilizing { .. })
        ));
    }

    #[test]
    fn lyapunov_random_residual() {
        let mut rng = StdRng::seed_from_u64(61);
        for _ in 0..10 {
            let acl = stable_matrix(&mut rng, 6);
            let q = RealMatrix::identity(6);
            let p = solve_lyapunov(&acl, &q).unwrap();
            let res = KronEquation::Continuous(&acl).apply(&p).max_abs_diff(&q.scale(-1.0));
            assert!(res <= 1e-8 * (acl.norm_fro() * p.norm_fro() + q.norm_fro()));
            assert!(is_positive_definite(&p).unwrap());
        }
    }

    #[test]
    fn stein_examples() {
        let p = solve_stein(&RealMatrix::zeros(2, 2), &RealMatrix::identity(2)).unwrap();
        assert!(p.max_abs_diff(&RealMatrix::identity(2)) < 1e-15);
        let p = solve_stein(&RealMatrix::identity(2).scale(0.5), &RealMatrix::identity(2)).unwrap();
        assert!(p.max_abs_diff(&RealMatrix::identity(2).scale(4.0 / 3.0)) < 1e-14);
        assert!(solve_stein(&RealMatrix::identity(2).scale(1.5), &RealMatrix::identity(2)).is_err());
    }

    #[test]
    fn stein_random_residual() {
        let mut rng = StdRng::seed_from_u64(62);
        for _ in 0..10 {
            let m = random_matrix(&mut rng, 6, 6);
            let rho = eigenvalues(&m).unwrap().spectral_radius();
            let acl = m.scale(0.9 / rho);
            let q = RealMatrix::identity(6);
            let p = solve_stein(&acl, &q).unwrap();
            let res = KronEquation::Discrete(&acl).apply(&p).max_abs_diff(&q.scale(-1.0));
            assert!(res <= 1e-8 * (acl.norm_fro().powi(2) * p.norm_fro() + q.norm_fro()));
            assert!(is_positive_definite(&p).unwrap());
        }
    }

    #[test]
    fn trivial_pair() {
        let sys = LtiSystem::state_feedback(RealMatrix::identity(2).scale(-1.0), RealMatrix::identity(2), Domain::Continuous).unwrap();
        let cert = gain_to_pair(&sys, &RealMatrix::zeros(2, 2), &RealMatrix::identity(2).scale(2.0)).unwrap();
        assert!(cert.p.max_abs_diff(&RealMatrix::identity(2)) < 1e-14);
        assert_eq!(cert.y.max_abs(), 0.0);
        assert_eq!(pair_to_gain(&cert).unwrap().max_abs(), 0.0);
        let again = gain_to_pair(&sys, &RealMatrix::zeros(2, 2), &RealMatrix::identity(2).scale(2.0)).unwrap();
        assert_eq!(cert, again);
    }

    #[test]
    fn roundtrip_and_blend() {
        let mut rng = StdRng::seed_from_u64(63);
        let a = random_matrix(&mut rng, 4, 4);
        let b = random_matrix(&mut rng, 4, 2);
        let sys = LtiSystem::state_feedback(a, b, Domain::Continuous).unwrap();
        let q = RealMatrix::identity(4);
        let k1 = pole_place(&sys, &Spectrum::from_real(&[-1.0, -2.0, -3.0, -4.0])).unwrap();
        let k2 = pole_place(&sys, &Spectrum::from_real(&[-0.5, -1.5, -2.5, -6.0])).unwrap();
        let c1 = gain_to_pair(&sys, &k1, &q).unwrap();
        let c2 = gain_to_pair(&sys, &k2, &q).unwrap();
        assert!(c1.is_valid(&sys).unwrap());
        assert!(pair_to_gain(&c1).unwrap().max_abs_diff(&k1) <= 1e-8 * (1.0 + k1.norm_fro()));
        for i in 0..=20 {
            let blend = c1.blend(&c2, i as f64 / 20.0).unwrap();
            assert!(blend.is_valid(&sys).unwrap());
            let k = pair_to_gain(&blend).unwrap();
            assert!(state_margin(&sys, &k).unwrap() < 0.0);
        }
    }

    #[test]
    fn witness_examples() {
        let sys = LtiSystem::state_feedback(RealMatrix::zeros(3, 3), RealMatrix::identity(3), Domain::Discrete).unwrap();
        let w = stein_lmi_witness(&sys, &RealMatrix::zeros(3, 3)).unwrap();
        assert!(w.x.max_abs_diff(&RealMatrix::identity(3)) < 1e-15);
        assert_eq!(w.l.max_abs(), 0.0);
        assert!(w.block(&sys).max_abs_diff(&RealMatrix::identity(6)) < 1e-15);
        assert!(w.is_feasible(&sys).unwrap());
    }

    #[test]
    fn witness_for_random_schur_gain() {
        let mut rng = StdRng::seed_from_u64(64);
        let (a, b) = brunovsky_pair(&[2, 2], 2);
        let sys = LtiSystem::state_feedback(a, b, Domain::Discrete).unwrap();
        for _ in 0..10 {
            let k = random_matrix(&mut rng, 2, 4).scale(0.3);
            if state_margin(&sys, &k).unwrap() > -1e-3 {
                continue;
            }
            let w = stein_lmi_witness(&sys, &k).unwrap();
            assert!(w.is_feasible(&sys).unwrap());
            assert!(w.gain().unwrap().max_abs_diff(&k) <= 1e-8 * (1.0 + k.norm_fro()));
        }
        let bad = RealMatrix::zeros(2, 4);
        let unstable = LtiSystem::state_feedback(RealMatrix::identity(4).scale(2.0), sys.b.clone(), Domain::Discrete).unwrap();
        assert!(matches!(stein_lmi_witness(&unstable, &bad), Err(Error::NotStabilizing { .. })));
    }
}
