use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Eigenvalue multiset of a real matrix.
///
/// Ordering carries no meaning: comparisons go through a greedy
/// minimal-distance matching, never through a sort.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct Spectrum {
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// `count` copies of a single value.
    pub fn repeated(value: Complex64, count: usize) -> Self {
        Self::new(vec![value; count])
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_real(&self) -> f64 {
        self.values.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_modulus(&self) -> f64 {
        self.spectral_radius()
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self::new(self.values.iter().map(|z| z * alpha).collect())
    }

    /// Largest pair distance of a greedy minimal-distance matching.
    ///
    /// Returns `inf` when the multisets have different sizes.
    pub fn matching_distance(&self, other: &Spectrum) -> f64 {
        if self.len() != other.len() {
            return f64::INFINITY;
        }
        let n = self.len();
        let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
        for (i, a) in self.values.iter().enumerate() {
            for (j, b) in other.values.iter().enumerate() {
                pairs.push(((a - b).norm(), i, j));
            }
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut used_a = vec![false; n];
        let mut used_b = vec![false; n];
        let mut matched = 0;
        let mut worst: f64 = 0.0;
        for (d, i, j) in pairs {
            if used_a[i] || used_b[j] {
                continue;
            }
            used_a[i] = true;
            used_b[j] = true;
            worst = worst.max(d);
            matched += 1;
            if matched == n {
                break;
            }
        }
        worst
    }

    pub fn approx_eq(&self, other: &Spectrum, tol: f64) -> bool {
        self.matching_distance(other) <= tol
    }

    /// Worst distance between each value and its best conjugate partner.
    pub fn conjugation_defect(&self) -> f64 {
        let conj = Spectrum::new(self.values.iter().map(|z| z.conj()).collect());
        self.matching_distance(&conj)
    }

    pub fn is_conjugate_closed(&self, tol: f64) -> bool {
        self.conjugation_defect() <= tol
    }
}

impl From<Vec<[f64; 2]>> for Spectrum {
    fn from(v: Vec<[f64; 2]>) -> Self {
        Self::new(v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

impl From<Spectrum> for Vec<[f64; 2]> {
    fn from(s: Spectrum) -> Self {
        s.values.into_iter().map(|z| [z.re, z.im]).collect()
    }
}

impl fmt::Display for Spectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .values
            .iter()
            .map(|z| {
                if z.im == 0.0 {
                    format!("{:.9}", z.re)
                } else {
                    format!("{:.9}{:+.9}i", z.re, z.im)
                }
            })
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}
