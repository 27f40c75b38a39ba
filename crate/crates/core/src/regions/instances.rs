//! Structured instances with known stabilizing-set geometry.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::GainSubspace;
use crate::canonical::{brunovsky_pair, Domain, LtiSystem};
use crate::error::{Error, Result};
use crate::linalg::RealMatrix;

pub const INSTANCE_NAMES: [&str; 8] = [
    "hurwitz_2x2_rotation",
    "hurwitz_2k_blocks",
    "schur_2x2",
    "schur_2k_blocks",
    "bounded_H_example",
    "bounded_S_example",
    "unbounded_S_example",
    "bilinear_counterexample",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum InstanceId {
    Hurwitz2x2Rotation,
    /// `k` rotation blocks; `odd` appends a state with a `−1` diagonal entry.
    Hurwitz2kBlocks { k: usize, odd: bool },
    Schur2x2 { a: f64 },
    /// One block per `a`; `odd` appends a state with a `0` diagonal entry.
    Schur2kBlocks { a: Vec<f64>, odd: bool },
    #[serde(rename = "bounded_H_example")]
    BoundedH,
    #[serde(rename = "bounded_S_example")]
    BoundedS,
    #[serde(rename = "unbounded_S_example")]
    UnboundedS,
    BilinearCounterexample,
}

impl InstanceId {
    /// Builds an id from a name and the CLI-style parameters. `a` defaults to
    /// 3 and `k` to 2; `schur_2k_blocks` repeats `a` for each block.
    pub fn from_name(name: &str, a: Option<f64>, k: Option<usize>) -> Result<Self> {
        let a = a.unwrap_or(3.0);
        let k = k.unwrap_or(2);
        Ok(match name {
            "hurwitz_2x2_rotation" => InstanceId::Hurwitz2x2Rotation,
            "hurwitz_2k_blocks" => InstanceId::Hurwitz2kBlocks { k, odd: false },
            "schur_2x2" => InstanceId::Schur2x2 { a },
            "schur_2k_blocks" => InstanceId::Schur2kBlocks { a: vec![a; k], odd: false },
            "bounded_H_example" => InstanceId::BoundedH,
            "bounded_S_example" => InstanceId::BoundedS,
            "unbounded_S_example" => InstanceId::UnboundedS,
            "bilinear_counterexample" => InstanceId::BilinearCounterexample,
            other => {
                return Err(Error::Parameter(format!(
                    "unknown instance '{other}'; known: {}",
                    INSTANCE_NAMES.join(", ")
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            InstanceId::Hurwitz2x2Rotation => INSTANCE_NAMES[0],
            InstanceId::Hurwitz2kBlocks { .. } => INSTANCE_NAMES[1],
            InstanceId::Schur2x2 { .. } => INSTANCE_NAMES[2],
            InstanceId::Schur2kBlocks { .. } => INSTANCE_NAMES[3],
            InstanceId::BoundedH => INSTANCE_NAMES[4],
            InstanceId::BoundedS => INSTANCE_NAMES[5],
            InstanceId::UnboundedS => INSTANCE_NAMES[6],
            InstanceId::BilinearCounterexample => INSTANCE_NAMES[7],
        }
    }
}

impl fmt::Display for InstanceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceId::Hurwitz2kBlocks { k, odd } => write!(f, "{}(k={k}{})", self.name(), if *odd { ", odd" } else { "" }),
            InstanceId::Schur2x2 { a } => write!(f, "{}(a={a})", self.name()),
            InstanceId::Schur2kBlocks { a, odd } => write!(f, "{}(a={a:?}{})", self.name(), if *odd { ", odd" } else { "" }),
            _ => f.write_str(self.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub id: InstanceId,
    pub system: LtiSystem,
    pub subspace: GainSubspace,
    /// Parameter box containing every analytic component with room to spare.
    pub default_box: Vec<(f64, f64)>,
}

/// `[[−1, −1], [1, 0]]`, the rotation block of the Hurwitz instances.
fn rotation_block() -> RealMatrix {
    RealMatrix::from_rows(&[&[-1.0, -1.0], &[1.0, 0.0]])
}

/// Subspace direction with `u₁₂ = −u₂₁`, `u₁₁ = u₂₂ = 0`.
fn rotation_direction() -> RealMatrix {
    RealMatrix::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]])
}

fn schur_block(a: f64) -> RealMatrix {
    RealMatrix::from_rows(&[&[0.0, a * a], &[0.0, 0.0]])
}

/// Subspace direction with `u₁₂ = −a² u₂₁`, `u₁₁ = u₂₂ = 0`.
fn schur_direction(a: f64) -> RealMatrix {
    RealMatrix::from_rows(&[&[0.0, a * a], &[-1.0, 0.0]])
}

fn check_schur_parameter(a: f64) -> Result<()> {
    if a.is_finite() && a.abs() > 2.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("Schur block instances need |a| > 2, got {a}")))
    }
}

/// Closed-form stable intervals of `schur_2x2(a)` in the parameter `α`:
/// `(e₀, e₁) ∪ (e₂, e₃)`.
pub fn schur_2x2_endpoints(a: f64) -> Result<[f64; 4]> {
    check_schur_parameter(a)?;
    let a = a.abs();
    let plus = (a * a + 4.0).sqrt();
    let minus = (a * a - 4.0).sqrt();
    Ok([(a - plus) / (2.0 * a), (a - minus) / (2.0 * a), (a + minus) / (2.0 * a), (a + plus) / (2.0 * a)])
}

/// Block-diagonal system with identity input and one direction per block,
/// optionally padded with a single extra state.
fn block_instance(
    blocks: &[(RealMatrix, RealMatrix)],
    pad: Option<f64>,
    domain: Domain,
) -> Result<(LtiSystem, GainSubspace)> {
    let n = 2 * blocks.len() + pad.is_some() as usize;
    let mut a = RealMatrix::zeros(n, n);
    let mut basis = Vec::with_capacity(blocks.len());
    for (j, (block, dir)) in blocks.iter().enumerate() {
        a.set_block(2 * j, 2 * j, block);
        let mut u = RealMatrix::zeros(n, n);
        u.set_block(2 * j, 2 * j, dir);
        basis.push(u);
    }
    if let Some(d) = pad {
        a[(n - 1, n - 1)] = d;
    }
    let sys = LtiSystem::state_feedback(a, RealMatrix::identity(n), domain)?;
    Ok((sys, GainSubspace::new(basis, None)?))
}

/// A 4-state plant shared by the two discrete output-feedback examples.
fn output_example_a() -> RealMatrix {
    RealMatrix::from_rows(&[
        &[0.0, 1.0, 0.0, 0.0],
        &[-0.5, -1.0, 0.0, 1.0],
        &[0.0, 0.0, 0.0, 1.0],
        &[0.0, 0.0, -0.5, -1.0],
    ])
}

pub fn gen_instance(id: &InstanceId) -> Result<Instance> {
    let (system, subspace, default_box) = match id {
        InstanceId::Hurwitz2x2Rotation => {
            let sys = LtiSystem::state_feedback(rotation_block(), RealMatrix::identity(2), Domain::Continuous)?;
            (sys, GainSubspace::new(vec![rotation_direction()], None)?, vec![(-3.0, 4.0)])
        }
        InstanceId::Hurwitz2kBlocks { k, odd } => {
            if *k == 0 {
                return Err(Error::Parameter("hurwitz_2k_blocks needs k >= 1".into()));
            }
            let blocks = vec![(rotation_block(), rotation_direction()); *k];
            let (sys, sub) = block_instance(&blocks, odd.then_some(-1.0), Domain::Continuous)?;
            (sys, sub, vec![(-3.0, 4.0); *k])
        }
        InstanceId::Schur2x2 { a } => {
            check_schur_parameter(*a)?;
            let sys = LtiSystem::state_feedback(schur_block(*a), RealMatrix::identity(2), Domain::Discrete)?;
            (sys, GainSubspace::new(vec![schur_direction(*a)], None)?, vec![(-1.0, 2.0)])
        }
        InstanceId::Schur2kBlocks { a, odd } => {
            if a.is_empty() {
                return Err(Error::Parameter("schur_2k_blocks needs at least one block".into()));
            }
            for &aj in a {
                check_schur_parameter(aj)?;
            }
            let blocks: Vec<_> = a.iter().map(|&aj| (schur_block(aj), schur_direction(aj))).collect();
            let (sys, sub) = block_instance(&blocks, odd.then_some(0.0), Domain::Discrete)?;
            (sys, sub, vec![(-1.0, 2.0); a.len()])
        }
        InstanceId::BoundedH => {
            let last = [-1.0, -8.0, -28.0, -56.0, -70.0, -56.0, -28.0, -8.0];
            let a = RealMatrix::from_fn(8, 8, |i, j| if i == 7 { last[j] } else { (j == i + 1) as u8 as f64 });
            let mut b = RealMatrix::zeros(8, 2);
            b[(3, 0)] = 1.0;
            b[(7, 1)] = 1.0;
            let c = RealMatrix::from_rows(&[&[1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 1.0, -1.0]]);
            let sys = LtiSystem::new(a, b, Some(c), Domain::Continuous)?;
            (sys, GainSubspace::full(2, 1), vec![(-100.0, 100.0); 2])
        }
        InstanceId::BoundedS => {
            let b = RealMatrix::from_rows(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 0.0], &[0.0, 1.0]]);
            let c = RealMatrix::from_rows(&[&[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]]);
            let sys = LtiSystem::new(output_example_a(), b, Some(c), Domain::Discrete)?;
            (sys, GainSubspace::full(2, 2), vec![(-5.0, 5.0); 4])
        }
        InstanceId::UnboundedS => {
            let b = RealMatrix::from_rows(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0], &[0.0, 0.0, 1.0]]);
            let c = RealMatrix::from_rows(&[&[0.0, 0.0, 0.0, 1.0], &[0.0, 1.0, 0.0, 0.0], &[1.0, 0.0, 0.0, 0.0]]);
            let sys = LtiSystem::new(output_example_a(), b, Some(c), Domain::Discrete)?;
            (sys, GainSubspace::coordinate((3, 3), &[(2, 2)])?, vec![(-1.0, 1.0)])
        }
        InstanceId::BilinearCounterexample => {
            let (a, b) = brunovsky_pair(&[2, 2], 2);
            let sys = LtiSystem::state_feedback(a, b, Domain::Discrete)?;
            (sys, GainSubspace::full(2, 4), vec![(-2.0, 2.0); 8])
        }
    };
    Ok(Instance { id: id.clone(), system, subspace, default_box })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::char_poly;
    use crate::stability::membership;

    #[test]
    fn rotation_instance_matrices() {
        let inst = gen_instance(&InstanceId::Hurwitz2x2Rotation).unwrap();
        assert_eq!(inst.system.a, RealMatrix::from_rows(&[&[-1.0, -1.0], &[1.0, 0.0]]));
        assert_eq!(inst.system.b, RealMatrix::identity(2));
        let u = &inst.subspace.basis()[0];
        assert_eq!(u[(0, 1)], -u[(1, 0)]);
        assert_eq!((u[(0, 0)], u[(1, 1)]), (0.0, 0.0));
    }

    #[test]
    fn schur_instance_matrices() {
        let inst = gen_instance(&InstanceId::Schur2x2 { a: 3.0 }).unwrap();
        assert_eq!(inst.system.a, RealMatrix::from_rows(&[&[0.0, 9.0], &[0.0, 0.0]]));
        let u = &inst.subspace.basis()[0];
        assert_eq!(-9.0 * u[(1, 0)], u[(0, 1)]);
        assert!(matches!(gen_instance(&InstanceId::Schur2x2 { a: 2.0 }), Err(Error::Parameter(_))));
        assert!(matches!(
            gen_instance(&InstanceId::Schur2kBlocks { a: vec![3.0, -1.5], odd: false }),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn odd_extensions() {
        let h = gen_instance(&InstanceId::Hurwitz2kBlocks { k: 2, odd: true }).unwrap();
        assert_eq!(h.system.n(), 5);
        assert_eq!(h.system.a[(4, 4)], -1.0);
        let s = gen_instance(&InstanceId::Schur2kBlocks { a: vec![3.0, 4.0], odd: true }).unwrap();
        assert_eq!(s.system.n(), 5);
        assert_eq!(s.system.a[(4, 4)], 0.0);
        assert_eq!(s.system.a[(2, 3)], 16.0);
        assert_eq!(s.subspace.dim(), 2);
    }

    #[test]
    fn bounded_h_open_loop_polynomial() {
        // At K = 0 the plant is the companion matrix of (z + 1)⁸.
        let inst = gen_instance(&InstanceId::BoundedH).unwrap();
        let p = char_poly(&inst.system.a).unwrap();
        let binom = [1.0, 8.0, 28.0, 56.0, 70.0, 56.0, 28.0, 8.0, 1.0];
        for (c, b) in p.coeffs().iter().zip(binom) {
            assert!((c - b).abs() < 1e-9);
        }
    }

    #[test]
    fn unbounded_s_feedback_position() {
        let inst = gen_instance(&InstanceId::UnboundedS).unwrap();
        let k = inst.subspace.gain(&[2.5]).unwrap();
        let bkc = &(&inst.system.b * &k) * inst.system.c.as_ref().unwrap();
        let mut expected = RealMatrix::zeros(4, 4);
        expected[(3, 0)] = 2.5;
        assert_eq!(bkc, expected);
    }

    #[test]
    fn bilinear_pair_zero_gain_is_stable() {
        let inst = gen_instance(&InstanceId::BilinearCounterexample).unwrap();
        let v = membership(&inst.system, &RealMatrix::zeros(2, 4)).unwrap();
        assert!(v.verdict.is_stable());
    }

    #[test]
    fn names_roundtrip() {
        for name in INSTANCE_NAMES {
            let id = InstanceId::from_name(name, None, None).unwrap();
            assert_eq!(id.name(), name);
            assert!(gen_instance(&id).is_ok());
        }
        let err = InstanceId::from_name("nope", None, None).unwrap_err().to_string();
        assert!(err.contains("schur_2x2"));
    }

    #[test]
    fn endpoints_formula() {
        let e = schur_2x2_endpoints(3.0).unwrap();
        let s13 = 13f64.sqrt();
        let s5 = 5f64.sqrt();
        let expected = [(3.0 - s13) / 6.0, (3.0 - s5) / 6.0, (3.0 + s5) / 6.0, (3.0 + s13) / 6.0];
        for (x, y) in e.iter().zip(expected) {
            assert!((x - y).abs() < 1e-15);
        }
        // The spectral radius |a|·√|α − α²| equals one at every endpoint.
        for a in [2.5, 3.0, 5.0, 10.0] {
            for x in schur_2x2_endpoints(a).unwrap() {
                assert!((a * (x - x * x).abs().sqrt() - 1.0).abs() < 1e-12);
            }
        }
    }
}
