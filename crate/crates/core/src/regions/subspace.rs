use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{rank, solve_linear, RealMatrix};

/// Affine family of structured gains `K(θ) = offset + Σ θᵢ Uᵢ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GainSubspace {
    basis: Vec<RealMatrix>,
    offset: RealMatrix,
}

#[derive(Deserialize)]
struct RawSubspace {
    basis: Vec<RealMatrix>,
    offset: Option<RealMatrix>,
}

impl<'de> Deserialize<'de> for GainSubspace {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawSubspace::deserialize(deserializer)?;
        GainSubspace::new(raw.basis, raw.offset).map_err(serde::de::Error::custom)
    }
}

impl GainSubspace {
    /// Validates shapes and linear independence. The offset defaults to zero.
    pub fn new(basis: Vec<RealMatrix>, offset: Option<RealMatrix>) -> Result<Self> {
        let first = basis
            .first()
            .ok_or_else(|| Error::Parameter("gain subspace needs at least one basis matrix".into()))?;
        let shape = first.shape();
        for u in &basis {
            u.ensure_shape("gain subspace basis", shape)?;
        }
        let offset = match offset {
            Some(o) => {
                o.ensure_shape("gain subspace offset", shape)?;
                o
            }
            None => RealMatrix::zeros(shape.0, shape.1),
        };
        let stacked = Self::stacked(&basis);
        let r = rank(&stacked, None);
        if r < basis.len() {
            return Err(Error::Parameter(format!(
                "gain subspace basis is linearly dependent (rank {r} < {})",
                basis.len()
            )));
        }
        Ok(Self { basis, offset })
    }

    /// Subspace spanned by matrix units `E_ij` at the given positions.
    pub fn coordinate(shape: (usize, usize), positions: &[(usize, usize)]) -> Result<Self> {
        let basis = positions
            .iter()
            .map(|&(i, j)| {
                let mut u = RealMatrix::zeros(shape.0, shape.1);
                u[(i, j)] = 1.0;
                u
            })
            .collect();
        Self::new(basis, None)
    }

    /// Every `rows × cols` matrix.
    pub fn full(rows: usize, cols: usize) -> Self {
        let positions: Vec<_> = (0..rows).flat_map(|i| (0..cols).map(move |j| (i, j))).collect();
        Self::coordinate((rows, cols), &positions).expect("matrix units are independent")
    }

    /// Columns are the vectorized basis matrices.
    fn stacked(basis: &[RealMatrix]) -> RealMatrix {
        let len = basis[0].rows() * basis[0].cols();
        let cols: Vec<Vec<f64>> = basis.iter().map(|u| u.vectorize()).collect();
        RealMatrix::from_fn(len, basis.len(), |r, c| cols[c][r])
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.offset.shape()
    }

    pub fn basis(&self) -> &[RealMatrix] {
        &self.basis
    }

    pub fn offset(&self) -> &RealMatrix {
        &self.offset
    }

    pub fn gain(&self, theta: &[f64]) -> Result<RealMatrix> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                op: "gain subspace",
                expected: (self.dim(), 1),
                got: (theta.len(), 1),
            });
        }
        let mut k = self.offset.clone();
        for (u, &t) in self.basis.iter().zip(theta) {
            k = &k + &u.scale(t);
        }
        Ok(k)
    }

    /// Lower-dimensional slice through `point`: the coordinates listed in
    /// `free` stay parameters, the others are frozen at their `point` values.
    pub fn slice(&self, free: &[usize], point: &[f64]) -> Result<Self> {
        if point.len() != self.dim() || free.is_empty() || free.iter().any(|&a| a >= self.dim()) {
            return Err(Error::Parameter(format!(
                "slice needs a point of length {} and free axes below it",
                self.dim()
            )));
        }
        let mut offset = self.offset.clone();
        for (a, u) in self.basis.iter().enumerate() {
            if !free.contains(&a) {
                offset = &offset + &u.scale(point[a]);
            }
        }
        let basis = free.iter().map(|&a| self.basis[a].clone()).collect();
        Self::new(basis, Some(offset))
    }

    /// Least-squares coordinates of `m` in the linear span (offset ignored),
    /// or `None` when `m` is not in the span.
    pub fn span_coordinates(&self, m: &RealMatrix) -> Option<Vec<f64>> {
        if m.shape() != self.shape() {
            return None;
        }
        let s = Self::stacked(&self.basis);
        let st = s.transpose();
        let rhs = st.mul_vec(&m.vectorize());
        let coords = solve_linear(&(&st * &s), &rhs).ok()?;
        let mut fit = RealMatrix::zeros(m.rows(), m.cols());
        for (u, &c) in self.basis.iter().zip(&coords) {
            fit = &fit + &u.scale(c);
        }
        (fit.max_abs_diff(m) <= 1e-10 * (1.0 + m.max_abs())).then_some(coords)
    }

    pub fn span_contains(&self, m: &RealMatrix) -> bool {
        self.span_coordinates(m).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_dependent_basis() {
        let u = RealMatrix::identity(2);
        let err = GainSubspace::new(vec![u.clone(), u.scale(2.0)], None).unwrap_err();
        assert!(matches!(err, Error::Parameter(_)));
        assert!(GainSubspace::new(vec![], None).is_err());
        assert!(GainSubspace::new(vec![u, RealMatrix::zeros(2, 3)], None).is_err());
    }

    #[test]
    fn gain_and_span() {
        let sub = GainSubspace::coordinate((2, 2), &[(0, 1), (1, 0)]).unwrap();
        let k = sub.gain(&[2.0, -1.0]).unwrap();
        assert_eq!(k, RealMatrix::from_rows(&[&[0.0, 2.0], &[-1.0, 0.0]]));
        assert_eq!(sub.span_coordinates(&k).unwrap().len(), 2);
        assert!(!sub.span_contains(&RealMatrix::identity(2)));
        assert!(GainSubspace::full(2, 3).span_contains(&RealMatrix::from_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]])));
        assert!(sub.gain(&[1.0]).is_err());
    }

    #[test]
    fn slices_freeze_other_coordinates() {
        let sub = GainSubspace::full(2, 2);
        let line = sub.slice(&[3], &[1.0, 2.0, 3.0, 0.0]).unwrap();
        assert_eq!(line.dim(), 1);
        let expected = RealMatrix::from_rows(&[&[1.0, 2.0], &[3.0, 5.0]]);
        assert_eq!(line.gain(&[5.0]).unwrap(), expected);
        assert_eq!(sub.gain(&[1.0, 2.0, 3.0, 5.0]).unwrap(), expected);
        assert!(sub.slice(&[4], &[0.0; 4]).is_err());
        assert!(sub.slice(&[0], &[0.0; 3]).is_err());
    }

    #[test]
    fn serde_validates() {
        let sub: GainSubspace = serde_json::from_str(r#"{"basis": [[[1, 0], [0, 1]]]}"#).unwrap();
        assert_eq!(sub.offset(), &RealMatrix::zeros(2, 2));
        let back: GainSubspace = serde_json::from_str(&serde_json::to_string(&sub).unwrap()).unwrap();
        assert_eq!(back, sub);
        assert!(serde_json::from_str::<GainSubspace>(r#"{"basis": [[[1]], [[2]]]}"#).is_err());
    }
}
