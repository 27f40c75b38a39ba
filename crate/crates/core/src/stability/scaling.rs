use crate::canonical::{detect_brunovsky, BrunovskyForm, LtiSystem};
use crate::error::{Error, Result};
use crate::linalg::{Lu, RealMatrix};

/// `(K)_α` for a Brunovsky pair with the given block sizes.
///
/// Inside a block of size `k`, the column at local position `ℓ` (1-based)
/// is multiplied by `α^{k−ℓ+1}`, so `Sp(A − B(K)_α) = α·Sp(A − BK)`.
pub fn scale_gain_indices(indices: &[usize], k: &RealMatrix, alpha: f64) -> Result<RealMatrix> {
    let n: usize = indices.iter().sum();
    if k.cols() != n || k.rows() != indices.len() {
        return Err(Error::DimensionMismatch {
            op: "scale_gain",
            expected: (indices.len(), n),
            got: k.shape(),
        });
    }
    let mut factors = Vec::with_capacity(n);
    for &size in indices {
        for l in 1..=size {
            factors.push(alpha.powi((size - l + 1) as i32));
        }
    }
    Ok(RealMatrix::from_fn(k.rows(), n, |i, j| k[(i, j)] * factors[j]))
}

/// `(K)_α` in the coordinates of a Brunovsky form with full column rank `B♭`.
pub fn scale_gain(bf: &BrunovskyForm, k: &RealMatrix, alpha: f64) -> Result<RealMatrix> {
    if bf.input_rank() != bf.m() {
        return Err(Error::Precondition(format!(
            "gain scaling needs full column rank B, rank {} < {}",
            bf.input_rank(),
            bf.m()
        )));
    }
    scale_gain_indices(&bf.indices, k, alpha)
}

/// `(K)_α` for a system that is itself exactly in Brunovsky form.
pub fn scale_gain_for_system(sys: &LtiSystem, k: &RealMatrix, alpha: f64) -> Result<RealMatrix> {
    let indices = detect_brunovsky(&sys.a, &sys.b).ok_or_else(|| {
        Error::Precondition("(A, B) is not a full column rank Brunovsky pair".into())
    })?;
    scale_gain_indices(&indices, k, alpha)
}

/// Bilinear transform `(M − I)⁻¹(M + I)`.
pub fn bilinear(m: &RealMatrix) -> Result<RealMatrix> {
    m.ensure_square()?;
    let lu = Lu::factor(&m.add_scaled_identity(-1.0)).map_err(|e| match e {
        Error::Singular { .. } => Error::BilinearPole,
        other => other,
    })?;
    Ok(lu.solve_matrix(&m.add_scaled_identity(1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::{brunovsky_pair, Domain};
    use crate::linalg::{eigenvalues, Spectrum};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn bilinear_examples() {
        let z = bilinear(&RealMatrix::zeros(3, 3)).unwrap();
        assert_eq!(z, RealMatrix::identity(3).scale(-1.0));
        let (a, _) = brunovsky_pair(&[2, 2], 2);
        let expected = RealMatrix::from_rows(&[
            &[-1.0, -2.0, 0.0, 0.0],
            &[0.0, -1.0, 0.0, 0.0],
            &[0.0, 0.0, -1.0, -2.0],
            &[0.0, 0.0, 0.0, -1.0],
        ]);
        assert!(bilinear(&a).unwrap().max_abs_diff(&expected) <= 1e-12);
        let d = bilinear(&RealMatrix::from_diag(&[0.5, -0.5])).unwrap();
        assert!(d.max_abs_diff(&RealMatrix::from_diag(&[-3.0, -1.0 / 3.0])) < 1e-14);
        assert!(matches!(bilinear(&RealMatrix::identity(2)), Err(Error::BilinearPole)));
    }

    #[test]
    fn scaling_edge_cases() {
        let (a, b) = brunovsky_pair(&[2, 2], 2);
        let sys = LtiSystem::state_feedback(a.clone(), b.clone(), Domain::Discrete).unwrap();
        let mut rng = StdRng::seed_from_u64(31);
        let k = RealMatrix::from_fn(2, 4, |_, _| rng.gen_range(-1.0..1.0));
        assert_eq!(scale_gain_for_system(&sys, &k, 1.0).unwrap(), k);
        let k0 = scale_gain_for_system(&sys, &k, 0.0).unwrap();
        let s0 = eigenvalues(&(&a - &(&b * &k0))).unwrap();
        assert!(s0.approx_eq(&Spectrum::from_real(&[0.0; 4]), 1e-12));
        let k5 = scale_gain_for_system(&sys, &k, 0.5).unwrap();
        let lhs = eigenvalues(&(&a - &(&b * &k5))).unwrap();
        let rhs = eigenvalues(&(&a - &(&b * &k))).unwrap().scale(0.5);
        assert!(lhs.approx_eq(&rhs, 1e-8));
    }

    #[test]
    fn scaling_requires_brunovsky_pair() {
        let sys = LtiSystem::state_feedback(RealMatrix::identity(2), RealMatrix::identity(2), Domain::Discrete).unwrap();
        let err = scale_gain_for_system(&sys, &RealMatrix::zeros(2, 2), 0.5).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn scaling_composes_multiplicatively() {
        let k = RealMatrix::from_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]);
        let ab = scale_gain_indices(&[2, 1], &scale_gain_indices(&[2, 1], &k, 0.5).unwrap(), 3.0).unwrap();
        let direct = scale_gain_indices(&[2, 1], &k, 1.5).unwrap();
        assert!(ab.max_abs_diff(&direct) < 1e-14);
    }
}
