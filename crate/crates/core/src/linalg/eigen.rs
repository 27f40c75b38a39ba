//! Eigenvalues of small dense real matrices.
//!
//! Balancing, reduction to upper Hessenberg form by stabilized elimination,
//! then the Francis double-shift QR iteration (EISPACK `hqr` lineage). Only
//! eigenvalues are produced.

use num_complex::Complex64;

use super::{RealMatrix, Spectrum};
use crate::error::{Error, Result};

const MAX_DIM: usize = 64;

/// Total sweep budget is `SWEEPS_PER_ROW * n`.
const SWEEPS_PER_ROW: usize = 40;

/// 1-based square work array, the natural indexing for the EISPACK loops.
struct Work {
    n: usize,
    a: Vec<f64>,
}

impl Work {
    fn from_matrix(m: &RealMatrix) -> Self {
        let n = m.rows();
        let mut a = vec![0.0; (n + 1) * (n + 1)];
        for i in 0..n {
            for j in 0..n {
                a[(i + 1) * (n + 1) + j + 1] = m[(i, j)];
            }
        }
        Self { n, a }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * (self.n + 1) + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * (self.n + 1) + j] = v;
    }

    #[inline]
    fn sub(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * (self.n + 1) + j] -= v;
    }
}

/// Spectrum of a square matrix.
pub fn eigenvalues(m: &RealMatrix) -> Result<Spectrum> {
    let n = m.ensure_square()?;
    if n > MAX_DIM {
        return Err(Error::Precondition(format!(
            "eigenvalue solver supports n <= {MAX_DIM}, got {n}"
        )));
    }
    if n == 0 {
        return Ok(Spectrum::new(Vec::new()));
    }
    let mut w = Work::from_matrix(m);
    balance(&mut w);
    to_hessenberg(&mut w);
    hessenberg_qr(&mut w).map_err(|sweeps| Error::NoConvergence {
        sweeps,
        matrix: m.clone(),
    })
}

fn balance(w: &mut Work) {
    const RADIX: f64 = 2.0;
    let sqrdx = RADIX * RADIX;
    let n = w.n;
    let mut done = false;
    while !done {
        done = true;
        for i in 1..=n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 1..=n {
                if j != i {
                    c += w.get(j, i).abs();
                    r += w.get(i, j).abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 1..=n {
                        let v = w.get(i, j) * g;
                        w.set(i, j, v);
                    }
                    for j in 1..=n {
                        let v = w.get(j, i) * f;
                        w.set(j, i, v);
                    }
                }
            }
        }
    }
}

/// Gaussian elimination with row pivoting to upper Hessenberg form.
fn to_hessenberg(w: &mut Work) {
    let n = w.n;
    for m in 2..n {
        let mut x: f64 = 0.0;
        let mut piv = m;
        for j in m..=n {
            if w.get(j, m - 1).abs() > x.abs() {
                x = w.get(j, m - 1);
                piv = j;
            }
        }
        if piv != m {
            for j in (m - 1)..=n {
                let (a, b) = (w.get(piv, j), w.get(m, j));
                w.set(piv, j, b);
                w.set(m, j, a);
            }
            for j in 1..=n {
                let (a, b) = (w.get(j, piv), w.get(j, m));
                w.set(j, piv, b);
                w.set(j, m, a);
            }
        }
        if x != 0.0 {
            for i in (m + 1)..=n {
                let mut y = w.get(i, m - 1);
                if y != 0.0 {
                    y /= x;
                    w.set(i, m - 1, 0.0);
                    for j in m..=n {
                        let v = y * w.get(m, j);
                        w.sub(i, j, v);
                    }
                    for j in 1..=n {
                        let v = y * w.get(j, i);
                        w.set(j, m, w.get(j, m) + v);
                    }
                }
            }
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix.
///
/// Returns the sweep count on failure.
fn hessenberg_qr(w: &mut Work) -> std::result::Result<Spectrum, usize> {
    let n = w.n;
    let eps = f64::EPSILON;
    let budget = SWEEPS_PER_ROW * n;
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];

    let mut anorm = 0.0;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += w.get(i, j).abs();
        }
    }

    let mut nn = n;
    let mut shift_acc = 0.0;
    let mut sweeps = 0usize;
    while nn >= 1 {
        let mut its = 0usize;
        loop {
            // Look for a negligible subdiagonal element.
            let mut l = nn;
            while l >= 2 {
                let mut s = w.get(l - 1, l - 1).abs() + w.get(l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if w.get(l, l - 1).abs() <= eps * s {
                    w.set(l, l - 1, 0.0);
                    break;
                }
                l -= 1;
            }
            let mut x = w.get(nn, nn);
            if l == nn {
                wr[nn] = x + shift_acc;
                wi[nn] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = w.get(nn - 1, nn - 1);
            let mut ww = w.get(nn, nn - 1) * w.get(nn - 1, nn);
            if l == nn - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + ww;
                let mut z = q.abs().sqrt();
                x += shift_acc;
                if q >= 0.0 {
                    z = p + z.copysign(p);
                    wr[nn - 1] = x + z;
                    wr[nn] = x + z;
                    if z != 0.0 {
                        wr[nn] = x - ww / z;
                    }
                    wi[nn - 1] = 0.0;
                    wi[nn] = 0.0;
                } else {
                    wr[nn - 1] = x + p;
                    wr[nn] = x + p;
                    wi[nn - 1] = -z;
                    wi[nn] = z;
                }
                nn = nn.saturating_sub(2);
                break;
            }

            if sweeps >= budget {
                return Err(sweeps);
            }
            if its > 0 && its % 10 == 0 {
                // Exceptional shift.
                shift_acc += x;
                for i in 1..=nn {
                    w.sub(i, i, x);
                }
                let s = w.get(nn, nn - 1).abs() + w.get(nn - 1, nn - 2).abs();
                x = 0.75 * s;
                y = x;
                ww = -0.4375 * s * s;
            }
            its += 1;
            sweeps += 1;

            // Find two consecutive small subdiagonal elements.
            let mut m = nn - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = w.get(m, m);
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - ww) / w.get(m + 1, m) + w.get(m, m + 1);
                q = w.get(m + 1, m + 1) - z - rr - ss;
                r = w.get(m + 2, m + 1);
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = w.get(m, m - 1).abs() * (q.abs() + r.abs());
                let v = p.abs() * (w.get(m - 1, m - 1).abs() + z.abs() + w.get(m + 1, m + 1).abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nn {
                w.set(i, i - 2, 0.0);
                if i != m + 2 {
                    w.set(i, i - 3, 0.0);
                }
            }

            // Double QR step on rows l..nn, columns m..nn.
            let mut k = m;
            while k < nn {
                let mut xk = 0.0;
                if k != m {
                    p = w.get(k, k - 1);
                    q = w.get(k + 1, k - 1);
                    r = if k != nn - 1 { w.get(k + 2, k - 1) } else { 0.0 };
                    xk = p.abs() + q.abs() + r.abs();
                    if xk != 0.0 {
                        p /= xk;
                        q /= xk;
                        r /= xk;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            let v = -w.get(k, k - 1);
                            w.set(k, k - 1, v);
                        }
                    } else {
                        w.set(k, k - 1, -s * xk);
                    }
                    p += s;
                    let xr = p / s;
                    let yr = q / s;
                    let zr = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nn {
                        let mut pp = w.get(k, j) + q * w.get(k + 1, j);
                        if k != nn - 1 {
                            pp += r * w.get(k + 2, j);
                            w.sub(k + 2, j, pp * zr);
                        }
                        w.sub(k + 1, j, pp * yr);
                        w.sub(k, j, pp * xr);
                    }
                    let mmin = if nn < k + 3 { nn } else { k + 3 };
                    for i in l..=mmin {
                        let mut pp = xr * w.get(i, k) + yr * w.get(i, k + 1);
                        if k != nn - 1 {
                            pp += zr * w.get(i, k + 2);
                            w.sub(i, k + 2, pp * r);
                        }
                        w.sub(i, k + 1, pp * q);
                        w.sub(i, k, pp);
                    }
                }
                k += 1;
            }
        }
    }

    Ok(Spectrum::new(
        (1..=n).map(|i| Complex64::new(wr[i], wi[i])).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::solve_linear;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_matrix(rng: &mut StdRng, n: usize) -> RealMatrix {
        RealMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0))
    }

    /// Smallest residual ‖(M − λI)v‖ over unit v, bounded above by one
    /// inverse-iteration step on the real 2n embedding of M − λI.
    fn eigen_residual(m: &RealMatrix, lambda: Complex64) -> f64 {
        let n = m.rows();
        let mut emb = RealMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                emb[(i, j)] = m[(i, j)];
                emb[(n + i, n + j)] = m[(i, j)];
            }
            emb[(i, i)] -= lambda.re;
            emb[(n + i, n + i)] -= lambda.re;
            emb[(i, n + i)] = lambda.im;
            emb[(n + i, i)] = -lambda.im;
        }
        let b: Vec<f64> = (0..2 * n).map(|i| 1.0 + 0.1 * i as f64).collect();
        let bnorm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        match solve_linear(&emb, &b) {
            Ok(x) => {
                let xnorm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                bnorm / xnorm
            }
            // Pivot collapsed: M − λI is singular to working precision.
            Err(_) => 0.0,
        }
    }

    #[test]
    fn diagonal_matrix() {
        let s = eigenvalues(&RealMatrix::from_diag(&[-1.0, -2.0])).unwrap();
        assert!(s.approx_eq(&Spectrum::from_real(&[-1.0, -2.0]), 1e-14));
    }

    #[test]
    fn structured_two_by_two_has_modulus_one_and_a_half() {
        // Off-diagonal entries 9(1 − α) and α with α = 0.5.
        let m = RealMatrix::from_rows(&[&[0.0, 4.5], &[0.5, 0.0]]);
        let s = eigenvalues(&m).unwrap();
        assert!(s.approx_eq(&Spectrum::from_real(&[1.5, -1.5]), 1e-12));
    }

    #[test]
    fn rotation_gives_conjugate_pair() {
        let m = RealMatrix::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let s = eigenvalues(&m).unwrap();
        let expected = Spectrum::new(vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)]);
        assert!(s.approx_eq(&expected, 1e-14));
    }

    #[test]
    fn nilpotent_jordan_blocks() {
        let mut m = RealMatrix::zeros(4, 4);
        m[(0, 1)] = 1.0;
        m[(2, 3)] = 1.0;
        let s = eigenvalues(&m).unwrap();
        assert!(s.spectral_radius() < 1e-12);
    }

    #[test]
    fn residuals_are_small_on_random_matrices() {
        let mut rng = StdRng::seed_from_u64(7);
        for n in [1, 2, 3, 5, 8, 12, 16] {
            let m = random_matrix(&mut rng, n);
            let s = eigenvalues(&m).unwrap();
            assert_eq!(s.len(), n);
            for &lambda in s.values() {
                let res = eigen_residual(&m, lambda);
                assert!(res <= 1e-8 * m.norm_fro(), "n={n} λ={lambda} residual {res}");
            }
        }
    }

    #[test]
    fn non_square_is_rejected() {
        assert!(matches!(
            eigenvalues(&RealMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn spectra_are_conjugate_closed_and_similarity_invariant() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.gen_range(2..9);
            let m = random_matrix(&mut rng, n);
            let s = eigenvalues(&m).unwrap();
            assert!(s.is_conjugate_closed(1e-8));
            // Well-conditioned similarity: identity plus a small perturbation.
            let t = &RealMatrix::identity(n) + &random_matrix(&mut rng, n).scale(0.2);
            let tinv = crate::linalg::inverse(&t).unwrap();
            let sim = &(&t * &m) * &tinv;
            let s2 = eigenvalues(&sim).unwrap();
            assert!(s.approx_eq(&s2, 1e-7), "{s} vs {s2}");
        }
    }
}
