//! Real polynomials, characteristic polynomials and coefficient stability tests.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, RealMatrix, Spectrum};

/// Width of the band around the stability boundary reported as marginal.
pub const VERDICT_TOLERANCE: f64 = 1e-9;

/// Real polynomial with coefficients in ascending degree order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial, trimming exactly-zero leading coefficients.
    pub fn new(mut coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::DegeneratePolynomial("non-finite coefficient".into()));
        }
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(Error::DegeneratePolynomial("zero polynomial".into()));
        }
        Ok(Self { coeffs })
    }

    /// Builds from coefficients in descending order, leading term first.
    pub fn from_descending(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().rev().copied().collect())
    }

    /// Monic polynomial with the given roots; imaginary residue is dropped.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (k, &ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= ck * r;
            }
            c = next;
        }
        Self {
            coeffs: c.into_iter().map(|z| z.re).collect(),
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    /// Coefficients in descending order.
    pub fn descending(&self) -> Vec<f64> {
        self.coeffs.iter().rev().copied().collect()
    }

    pub fn monic(&self) -> Self {
        let l = self.leading();
        Self {
            coeffs: self.coeffs.iter().map(|c| c / l).collect(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn norm_inf(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Largest coefficientwise difference; `inf` for different degrees.
    pub fn max_coeff_diff(&self, other: &Polynomial) -> f64 {
        if self.coeffs.len() != other.coeffs.len() {
            return f64::INFINITY;
        }
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 && self.degree() > 0 {
                continue;
            }
            let sign = if c < 0.0 { "-" } else if first { "" } else { "+" };
            if !first {
                write!(f, " {sign} ")?;
            } else {
                write!(f, "{sign}")?;
            }
            first = false;
            let a = c.abs();
            match k {
                0 => write!(f, "{a}")?,
                1 if a == 1.0 => write!(f, "z")?,
                1 => write!(f, "{a}z")?,
                _ if a == 1.0 => write!(f, "z^{k}")?,
                _ => write!(f, "{a}z^{k}")?,
            }
        }
        Ok(())
    }
}

/// Characteristic polynomial `det(zI − M)` by Faddeev–LeVerrier.
pub fn char_poly(m: &RealMatrix) -> Result<Polynomial> {
    let n = m.ensure_square()?;
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let mut mk = RealMatrix::zeros(n, n);
    for k in 1..=n {
        mk = (m * &mk).add_scaled_identity(coeffs[n - k + 1]);
        coeffs[n - k] = -(m * &mk).trace() / k as f64;
    }
    Ok(Polynomial { coeffs })
}

/// Roots as eigenvalues of the companion matrix.
pub fn poly_roots(p: &Polynomial) -> Result<Spectrum> {
    let n = p.degree();
    if n == 0 {
        return Err(Error::DegeneratePolynomial("constant polynomial has no roots".into()));
    }
    let q = p.monic();
    let mut c = RealMatrix::zeros(n, n);
    for j in 0..n {
        c[(0, j)] = -q.coeffs[n - 1 - j];
    }
    for i in 1..n {
        c[(i, i - 1)] = 1.0;
    }
    eigenvalues(&c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StabilityClass {
    Stable,
    Marginal,
    Unstable,
}

impl StabilityClass {
    pub fn as_str(self) -> &'static str {
        match self {
            StabilityClass::Stable => "stable",
            StabilityClass::Marginal => "marginal",
            StabilityClass::Unstable => "unstable",
        }
    }
}

impl fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Stability class together with the signed margin it was derived from.
///
/// The margin is `max Re λ` for Hurwitz questions and `ρ − 1` for Schur
/// questions, so negative margins mean stable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub class: StabilityClass,
    pub margin: f64,
}

impl StabilityVerdict {
    pub fn from_margin(margin: f64) -> Self {
        let class = if margin < -VERDICT_TOLERANCE {
            StabilityClass::Stable
        } else if margin <= VERDICT_TOLERANCE {
            StabilityClass::Marginal
        } else {
            StabilityClass::Unstable
        };
        Self { class, margin }
    }

    pub fn is_stable(&self) -> bool {
        self.class == StabilityClass::Stable
    }

    /// Uses a criterion's class away from the boundary and the margin inside
    /// the marginal band.
    fn combine(table: StabilityClass, margin: f64) -> Self {
        let class = if margin.abs() <= VERDICT_TOLERANCE {
            StabilityClass::Marginal
        } else {
            match table {
                StabilityClass::Marginal if margin < 0.0 => StabilityClass::Marginal,
                StabilityClass::Marginal => StabilityClass::Unstable,
                c => c,
            }
        };
        Self { class, margin }
    }
}

fn check_degree(p: &Polynomial) -> Result<()> {
    if p.degree() == 0 {
        return Err(Error::DegeneratePolynomial("degree must be at least 1".into()));
    }
    Ok(())
}

/// Class decided by the Routh table alone.
///
/// A vanishing first-column entry is replaced by a small positive epsilon
/// and an all-zero row by the derivative of the auxiliary polynomial; either
/// event rules out `Stable`.
pub fn routh_table_class(p: &Polynomial) -> Result<StabilityClass> {
    check_degree(p)?;
    let sign = p.leading().signum();
    let desc: Vec<f64> = p.descending().into_iter().map(|c| c * sign).collect();
    let n = p.degree();
    let width = n / 2 + 1;
    let mut prev: Vec<f64> = (0..width).map(|j| desc.get(2 * j).copied().unwrap_or(0.0)).collect();
    let mut cur: Vec<f64> = (0..width)
        .map(|j| desc.get(2 * j + 1).copied().unwrap_or(0.0))
        .collect();
    let mut degenerate = false;
    let mut first_col = vec![prev[0]];
    for k in 1..=n {
        let scale = prev
            .iter()
            .chain(cur.iter())
            .fold(0.0f64, |m, x| m.max(x.abs()))
            .max(f64::MIN_POSITIVE);
        let zero_tol = 1e-12 * scale;
        if cur.iter().all(|x| x.abs() <= zero_tol) {
            // Row of s^{n-k} vanishes: differentiate the auxiliary polynomial of row k-1.
            degenerate = true;
            let power = n - k + 1;
            cur = (0..width)
                .map(|j| {
                    let e = power as isize - 2 * j as isize;
                    if e > 0 {
                        prev[j] * e as f64
                    } else {
                        0.0
                    }
                })
                .collect();
            if cur.iter().all(|x| x.abs() <= zero_tol) {
                cur[0] = zero_tol.max(f64::MIN_POSITIVE);
            }
        }
        if cur[0].abs() <= zero_tol {
            degenerate = true;
            cur[0] = 1e-10 * scale;
        }
        first_col.push(cur[0]);
        let next: Vec<f64> = (0..width)
            .map(|j| {
                let a = prev.get(j + 1).copied().unwrap_or(0.0);
                let b = cur.get(j + 1).copied().unwrap_or(0.0);
                (cur[0] * a - prev[0] * b) / cur[0]
            })
            .collect();
        prev = cur;
        cur = next;
    }
    let changes = first_col
        .windows(2)
        .filter(|w| (w[0] > 0.0) != (w[1] > 0.0))
        .count();
    Ok(match (changes, degenerate) {
        (0, false) => StabilityClass::Stable,
        (0, true) => StabilityClass::Marginal,
        _ => StabilityClass::Unstable,
    })
}

/// Left-half-plane test by the Routh table; margin is the largest root real part.
pub fn routh_hurwitz(p: &Polynomial) -> Result<StabilityVerdict> {
    let table = routh_table_class(p)?;
    let margin = poly_roots(p)?.max_real();
    Ok(StabilityVerdict::combine(table, margin))
}

/// Class decided by the Schur–Cohn–Jury reduction alone.
///
/// Each step requires `|a₀| < |aₙ|` and replaces `p` by
/// `(aₙ p(z) − a₀ p*(z)) / z`, where `p*` is the reversed polynomial.
/// A tie `|a₀| = |aₙ|` (singular row) rules out `Stable`.
pub fn jury_table_class(p: &Polynomial) -> Result<StabilityClass> {
    check_degree(p)?;
    let mut a = p.coeffs.clone();
    while a.len() > 1 {
        let n = a.len() - 1;
        let (a0, an) = (a[0], a[n]);
        let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let gap = an.abs() - a0.abs();
        if gap.abs() <= 1e-12 * scale {
            return Ok(StabilityClass::Marginal);
        }
        if gap < 0.0 {
            return Ok(StabilityClass::Unstable);
        }
        let q: Vec<f64> = (0..n).map(|k| an * a[k + 1] - a0 * a[n - k - 1]).collect();
        let lead = q[n - 1];
        a = q.into_iter().map(|c| c / lead).collect();
    }
    Ok(StabilityClass::Stable)
}

/// Unit-disk test by the Jury reduction; margin is `ρ − 1` over the roots.
pub fn jury(p: &Polynomial) -> Result<StabilityVerdict> {
    let table = jury_table_class(p)?;
    let margin = poly_roots(p)?.spectral_radius() - 1.0;
    Ok(StabilityVerdict::combine(table, margin))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(desc: &[f64]) -> Polynomial {
        Polynomial::from_descending(desc).unwrap()
    }

    fn binomial(n: u64, k: u64) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    #[test]
    fn char_poly_examples() {
        assert_eq!(char_poly(&RealMatrix::zeros(2, 2)).unwrap().coeffs(), &[0.0, 0.0, 1.0]);
        let t: f64 = 0.0;
        let m = RealMatrix::from_rows(&[&[-1.0, -(1.0 - t)], &[1.0 - t, 0.0]]);
        // det(zI - M) = z(z + 1) + (1 - t)^2
        assert_eq!(char_poly(&m).unwrap().coeffs(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn char_poly_matches_eigenvalue_product() {
        let m = RealMatrix::from_rows(&[
            &[1.0, 2.0, 0.0, -1.0],
            &[0.5, -3.0, 1.0, 0.0],
            &[2.0, 0.0, 1.5, 1.0],
            &[0.0, -1.0, 0.25, 2.0],
        ]);
        let p = char_poly(&m).unwrap();
        let q = Polynomial::from_roots(eigenvalues(&m).unwrap().values());
        assert!(p.max_coeff_diff(&q) <= 1e-7 * p.norm_inf());
    }

    #[test]
    fn roots_of_simple_polynomials() {
        let r = poly_roots(&poly(&[1.0, 0.0, -1.0])).unwrap();
        assert!(r.approx_eq(&Spectrum::from_real(&[1.0, -1.0]), 1e-12));
        let p8 = Polynomial::from_roots(&[Complex64::new(-1.0, 0.0); 8]);
        let r = poly_roots(&p8).unwrap();
        // An 8-fold root is only recoverable to about eps^(1/8) times a modest constant.
        let d = r.matching_distance(&Spectrum::repeated(Complex64::new(-1.0, 0.0), 8));
        assert!(d < 5e-2, "{d} {r}");
        for z in r.values() {
            assert!(p8.eval_complex(*z).norm() <= 1e-6 * p8.norm_inf());
        }
    }

    #[test]
    fn routh_examples() {
        assert_eq!(routh_hurwitz(&poly(&[1.0, 1.0])).unwrap().class, StabilityClass::Stable);
        let t: f64 = 1.0;
        let marginal = poly(&[1.0, 1.0, (1.0 - t).powi(2)]);
        assert_eq!(routh_table_class(&marginal).unwrap(), StabilityClass::Marginal);
        assert_eq!(routh_hurwitz(&marginal).unwrap().class, StabilityClass::Marginal);
        let p8 = poly(&[1.0, 8.0, 28.0, 56.0, 70.0, 56.0, 28.0, 8.0, 1.0]);
        assert_eq!(routh_table_class(&p8).unwrap(), StabilityClass::Stable);
        assert_eq!(routh_hurwitz(&p8).unwrap().class, StabilityClass::Stable);
    }

    #[test]
    fn routh_handles_imaginary_axis_pairs() {
        // (z^2 + 1)(z + 1): zero row at s^1.
        let p = poly(&[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(routh_table_class(&p).unwrap(), StabilityClass::Marginal);
        // (z^2 + 1)(z - 1)
        let q = poly(&[1.0, -1.0, 1.0, -1.0]);
        assert_eq!(routh_table_class(&q).unwrap(), StabilityClass::Unstable);
        // z^3 + z^2 + 2z + 8 has a right-half-plane pair.
        assert_eq!(routh_table_class(&poly(&[1.0, 1.0, 2.0, 8.0])).unwrap(), StabilityClass::Unstable);
        // Negative leading coefficient is normalized away.
        assert_eq!(routh_table_class(&poly(&[-1.0, -3.0, -2.0])).unwrap(), StabilityClass::Stable);
    }

    #[test]
    fn jury_examples() {
        assert_eq!(jury(&poly(&[1.0, 0.0])).unwrap().class, StabilityClass::Stable);
        let a: f64 = 3.0;
        let unstable = poly(&[1.0, 0.0, -a * a * (0.5 - 0.25)]);
        assert_eq!(jury(&unstable).unwrap().class, StabilityClass::Unstable);
        let alpha: f64 = 0.05;
        let stable = poly(&[1.0, 0.0, -a * a * (alpha - alpha * alpha)]);
        let v = jury(&stable).unwrap();
        assert_eq!(v.class, StabilityClass::Stable);
        assert!((v.margin + 1.0 - 3.0 * 0.0475f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn jury_singular_row_is_never_stable() {
        // z^2 - 1 has roots on the circle.
        assert_eq!(jury_table_class(&poly(&[1.0, 0.0, -1.0])).unwrap(), StabilityClass::Marginal);
        assert_eq!(jury(&poly(&[1.0, 0.0, -1.0])).unwrap().class, StabilityClass::Marginal);
    }

    #[test]
    fn degree_zero_is_rejected() {
        let c = Polynomial::new(vec![2.0]).unwrap();
        assert!(matches!(routh_hurwitz(&c), Err(Error::DegeneratePolynomial(_))));
        assert!(matches!(jury(&c), Err(Error::DegeneratePolynomial(_))));
        assert!(Polynomial::new(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(poly(&[1.0, -2.0, 0.0, 0.5]).to_string(), "z^3 - 2z^2 + 0.5");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn roots_in_disk(max_deg: usize) -> impl Strategy<Value = Vec<Complex64>> {
            proptest::collection::vec((0.0f64..0.999, 0.0f64..std::f64::consts::PI, any::<bool>()), 1..=max_deg / 2)
                .prop_map(|v| {
                    let mut out = Vec::new();
                    for (r, th, real) in v {
                        if real {
                            out.push(Complex64::new(r * th.cos(), 0.0));
                            out.push(Complex64::new(-r * th.sin(), 0.0));
                        } else {
                            let z = Complex64::from_polar(r, th);
                            out.push(z);
                            out.push(z.conj());
                        }
                    }
                    out
                })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(128))]

            #[test]
            fn vieta_bound_for_schur_polynomials(roots in roots_in_disk(8)) {
                let p = Polynomial::from_roots(&roots);
                prop_assert_eq!(jury(&p).unwrap().class, StabilityClass::Stable);
                let n = p.degree() as u64;
                for (k, c) in p.coeffs().iter().enumerate() {
                    prop_assert!(c.abs() <= binomial(n, k as u64) + 1e-12);
                }
            }

            #[test]
            fn char_poly_similarity_invariant(entries in proptest::collection::vec(-2.0f64..2.0, 16),
                                              s in proptest::collection::vec(-0.3f64..0.3, 16)) {
                let m = RealMatrix::new(4, 4, entries).unwrap();
                let s = RealMatrix::new(4, 4, s).unwrap().add_scaled_identity(1.0);
                let si = crate::linalg::inverse(&s).unwrap();
                let p = char_poly(&m).unwrap();
                let q = char_poly(&(&(&s * &m) * &si)).unwrap();
                prop_assert!(p.max_coeff_diff(&q) <= 1e-7 * p.norm_inf().max(1.0));
            }
        }
    }
}
