use super::RealMatrix;
use crate::error::{Error, Result};

/// LU factorization with partial pivoting, `PA = LU`.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: RealMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &RealMatrix) -> Result<Self> {
        let n = a.ensure_square()?;
        let tol = (n.max(1) as f64) * f64::EPSILON * a.max_abs();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot <= tol || pivot == 0.0 {
                return Err(Error::Singular { pivot, tol });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let tmp = lu[(p, j)];
                    lu[(p, j)] = lu[(k, j)];
                    lu[(k, j)] = tmp;
                }
            }
            let d = lu[(k, k)];
            for i in (k + 1)..n {
                let f = lu[(i, k)] / d;
                lu[(i, k)] = f;
                if f != 0.0 {
                    for j in (k + 1)..n {
                        let v = f * lu[(k, j)];
                        lu[(i, j)] -= v;
                    }
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows();
        assert_eq!(b.len(), n, "rhs length");
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    pub fn solve_matrix(&self, b: &RealMatrix) -> RealMatrix {
        let mut out = RealMatrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let x = self.solve(&b.col(j));
            for (i, v) in x.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }

    pub fn determinant(&self) -> f64 {
        let n = self.lu.rows();
        let mut det: f64 = (0..n).map(|i| self.lu[(i, i)]).product();
        // Parity of the row permutation.
        let mut seen = vec![false; n];
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut k = start;
            while !seen[k] {
                seen[k] = true;
                k = self.perm[k];
                len += 1;
            }
            if len % 2 == 0 {
                det = -det;
            }
        }
        det
    }
}

/// Solves `Ax = b` by partial-pivoting LU.
pub fn solve_linear(a: &RealMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            op: "solve_linear",
            expected: (a.rows(), 1),
            got: (b.len(), 1),
        });
    }
    Ok(Lu::factor(a)?.solve(b))
}

pub fn inverse(a: &RealMatrix) -> Result<RealMatrix> {
    let lu = Lu::factor(a)?;
    Ok(lu.solve_matrix(&RealMatrix::identity(a.rows())))
}

/// Positive-definiteness threshold on Cholesky pivots.
pub fn pd_tolerance(m: &RealMatrix) -> f64 {
    1e-10 * m.norm_inf().max(1.0)
}

/// Cholesky test for strict positive definiteness.
///
/// Returns the lower factor when every pivot exceeds [`pd_tolerance`], and
/// `None` otherwise. Errors when `m` is not symmetric to `1e-10 * ‖m‖`.
pub fn cholesky_pd(m: &RealMatrix) -> Result<Option<RealMatrix>> {
    let n = m.ensure_square()?;
    let asym = m.asymmetry();
    if asym > 1e-10 * m.norm_inf() {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let tol = pd_tolerance(m);
    let mut l = RealMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= tol {
            return Ok(None);
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(Some(l))
}

pub fn is_positive_definite(m: &RealMatrix) -> Result<bool> {
    Ok(cholesky_pd(m)?.is_some())
}

/// Householder QR with column pivoting, `M P = Q R`.
#[derive(Clone, Debug)]
pub struct PivotedQr {
    pub q: RealMatrix,
    pub r: RealMatrix,
    /// `perm[k]` is the original index of the k-th column of `M P`.
    pub perm: Vec<usize>,
}

impl PivotedQr {
    pub fn factor(m: &RealMatrix) -> Self {
        let (rows, cols) = m.shape();
        let mut r = m.clone();
        let mut q = RealMatrix::identity(rows);
        let mut perm: Vec<usize> = (0..cols).collect();
        for k in 0..rows.min(cols) {
            // Pick the remaining column with largest trailing norm.
            let (best, _) = (k..cols)
                .map(|j| (j, (k..rows).map(|i| r[(i, j)] * r[(i, j)]).sum::<f64>()))
                .fold((k, -1.0), |b, c| if c.1 > b.1 { c } else { b });
            if best != k {
                perm.swap(best, k);
                for i in 0..rows {
                    let tmp = r[(i, best)];
                    r[(i, best)] = r[(i, k)];
                    r[(i, k)] = tmp;
                }
            }
            let norm = (k..rows).map(|i| r[(i, k)] * r[(i, k)]).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let alpha = -norm.copysign(r[(k, k)]);
            let mut v: Vec<f64> = (k..rows).map(|i| r[(i, k)]).collect();
            v[0] -= alpha;
            let vnorm2: f64 = v.iter().map(|x| x * x).sum();
            if vnorm2 == 0.0 {
                continue;
            }
            // R <- H R
            for j in k..cols {
                let dot: f64 = (k..rows).map(|i| v[i - k] * r[(i, j)]).sum();
                let f = 2.0 * dot / vnorm2;
                for i in k..rows {
                    r[(i, j)] -= f * v[i - k];
                }
            }
            // Q <- Q H
            for i in 0..rows {
                let dot: f64 = (k..rows).map(|c| q[(i, c)] * v[c - k]).sum();
                let f = 2.0 * dot / vnorm2;
                for c in k..rows {
                    q[(i, c)] -= f * v[c - k];
                }
            }
            for i in (k + 1)..rows {
                r[(i, k)] = 0.0;
            }
        }
        Self { q, r, perm }
    }

    pub fn diag_abs(&self) -> Vec<f64> {
        (0..self.r.rows().min(self.r.cols()))
            .map(|i| self.r[(i, i)].abs())
            .collect()
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.diag_abs().iter().filter(|&&d| d > tol).count()
    }
}

/// Default rank tolerance, `‖M‖_F · 1e-10 · max(rows, cols)`.
pub fn default_rank_tolerance(m: &RealMatrix) -> f64 {
    m.norm_fro() * 1e-10 * m.rows().max(m.cols()) as f64
}

/// Numerical rank from the pivoted-QR diagonal.
pub fn rank(m: &RealMatrix, tol: Option<f64>) -> usize {
    if m.rows() == 0 || m.cols() == 0 {
        return 0;
    }
    let tol = tol.unwrap_or_else(|| default_rank_tolerance(m));
    PivotedQr::factor(m).rank(tol)
}

/// Orthonormal basis (as columns) of the null space of `m`.
pub fn null_space(m: &RealMatrix, tol: Option<f64>) -> RealMatrix {
    let cols = m.cols();
    if m.rows() == 0 {
        return RealMatrix::identity(cols);
    }
    // ker(M) is the orthogonal complement of range(Mᵀ).
    let qr = PivotedQr::factor(&m.transpose());
    let tol = tol.unwrap_or_else(|| default_rank_tolerance(m));
    let r = qr.rank(tol);
    qr.q.submatrix(0, r, cols, cols - r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn identity_solve_returns_rhs() {
        let b = [1.0, -2.0, 3.5];
        assert_eq!(solve_linear(&RealMatrix::identity(3), &b).unwrap(), b.to_vec());
    }

    #[test]
    fn diagonal_solve() {
        let a = RealMatrix::from_diag(&[2.0, 4.0]);
        assert_eq!(solve_linear(&a, &[2.0, 8.0]).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn random_solve_residual() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..20 {
            let a = RealMatrix::from_fn(8, 8, |i, j| {
                rng.gen_range(-1.0..1.0) + if i == j { 4.0 } else { 0.0 }
            });
            let b: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x = solve_linear(&a, &b).unwrap();
            let ax = a.mul_vec(&x);
            let res = ax.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
            let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(res <= 1e-10 * (a.norm_fro() * xn + bn));
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = RealMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(solve_linear(&a, &[1.0, 1.0]), Err(Error::Singular { .. })));
    }

    #[test]
    fn determinant_tracks_permutation_sign() {
        let a = RealMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(Lu::factor(&a).unwrap().determinant(), -1.0);
    }

    #[test]
    fn cholesky_cases() {
        assert!(is_positive_definite(&RealMatrix::identity(3)).unwrap());
        let indefinite = RealMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(!is_positive_definite(&indefinite).unwrap());
        let asym = RealMatrix::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        assert!(matches!(cholesky_pd(&asym), Err(Error::NotSymmetric { .. })));
        let l = cholesky_pd(&RealMatrix::from_rows(&[&[4.0, 2.0], &[2.0, 5.0]]))
            .unwrap()
            .unwrap();
        assert!((&l * &l.transpose()).max_abs_diff(&RealMatrix::from_rows(&[&[4.0, 2.0], &[2.0, 5.0]])) < 1e-14);
    }

    #[test]
    fn rank_cases() {
        assert_eq!(rank(&RealMatrix::zeros(3, 4), None), 0);
        assert_eq!(rank(&RealMatrix::identity(5), None), 5);
        let m = RealMatrix::from_rows(&[&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0], &[0.0, 1.0, 1.0]]);
        assert_eq!(rank(&m, None), 2);
    }

    #[test]
    fn null_space_is_orthonormal_kernel() {
        let m = RealMatrix::from_rows(&[&[1.0, 1.0, 0.0], &[0.0, 0.0, 0.0]]);
        let ns = null_space(&m, None);
        assert_eq!(ns.cols(), 2);
        assert!((&m * &ns).max_abs() < 1e-14);
        assert!((&ns.transpose() * &ns).max_abs_diff(&RealMatrix::identity(2)) < 1e-14);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng;

        fn low_rank(rows: usize, cols: usize, k: usize) -> impl Strategy<Value = RealMatrix> {
            (
                proptest::collection::vec(-3i32..=3, rows * k),
                proptest::collection::vec(-3i32..=3, k * cols),
            )
                .prop_map(move |(u, v)| {
                    let u = RealMatrix::from_fn(rows, k, |i, j| u[i * k + j] as f64);
                    let v = RealMatrix::from_fn(k, cols, |i, j| v[i * cols + j] as f64);
                    &u * &v
                })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(128))]

            #[test]
            fn rank_is_permutation_invariant(m in low_rank(5, 6, 3), seed in 0u64..1000) {
                let mut rng = StdRng::seed_from_u64(seed);
                let mut rp: Vec<usize> = (0..5).collect();
                let mut cp: Vec<usize> = (0..6).collect();
                for i in (1..5).rev() { rp.swap(i, rng.gen_range(0..=i)); }
                for i in (1..6).rev() { cp.swap(i, rng.gen_range(0..=i)); }
                let permuted = m.select_rows(&rp).select_cols(&cp);
                prop_assert_eq!(rank(&m, None), rank(&permuted, None));
            }

            #[test]
            fn cholesky_agrees_with_eigenvalues(entries in proptest::collection::vec(-2.0f64..2.0, 16), shift in -1.0f64..3.0) {
                let g = RealMatrix::new(4, 4, entries).unwrap();
                let m = (&g + &g.transpose()).scale(0.5).add_scaled_identity(shift);
                let eig = crate::linalg::eigenvalues(&m).unwrap();
                let min_eig = eig.values().iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
                let pd = is_positive_definite(&m).unwrap();
                if pd {
                    prop_assert!(min_eig > 0.0);
                }
                if min_eig >= 10.0 * pd_tolerance(&m) {
                    prop_assert!(pd);
                }
            }
        }
    }
}
