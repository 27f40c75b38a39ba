use num_complex::Complex64;

use crate::canonical::{brunovsky, pullback_gain, LtiSystem};
use crate::error::{Error, Result};
use crate::linalg::{inverse, null_space, rank, RealMatrix, Spectrum};
use crate::poly::Polynomial;

/// Roots grouped so that complex values always travel with their conjugate.
#[derive(Clone, Debug)]
enum Atom {
    Real(f64),
    Pair(Complex64),
}

impl Atom {
    fn roots(&self) -> Vec<Complex64> {
        match *self {
            Atom::Real(x) => vec![Complex64::new(x, 0.0)],
            Atom::Pair(z) => vec![z, z.conj()],
        }
    }

    fn key(&self) -> (f64, f64) {
        match *self {
            Atom::Real(x) => (x, 0.0),
            Atom::Pair(z) => (z.re, z.im),
        }
    }
}

fn split_atoms(targets: &Spectrum) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let scale = 1.0 + targets.spectral_radius();
    let tol = 1e-9 * scale;
    if !targets.is_conjugate_closed(tol) {
        return Err(Error::NotConjugateClosed);
    }
    let mut reals = Vec::new();
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for &z in targets.values() {
        if z.im.abs() <= tol {
            reals.push(z.re);
        } else if z.im > 0.0 {
            upper.push(z);
        } else {
            lower.push(z);
        }
    }
    if upper.len() != lower.len() {
        return Err(Error::NotConjugateClosed);
    }
    // Average each value with its nearest conjugate partner.
    let mut pairs = Vec::with_capacity(upper.len());
    let mut used = vec![false; lower.len()];
    for z in upper {
        let (j, _) = lower
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, w)| (j, (z - w.conj()).norm()))
            .fold((usize::MAX, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
        used[j] = true;
        pairs.push((z + lower[j].conj()) * 0.5);
    }
    reals.sort_by(f64::total_cmp);
    pairs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok((reals, pairs))
}

/// Monic coefficients `[c₀, …, c_{k−1}]` of `∏(z − λ)`.
fn companion_coefficients(roots: &[Complex64]) -> Vec<f64> {
    let p = Polynomial::from_roots(roots);
    let mut c = p.coeffs().to_vec();
    c.pop();
    c
}

/// Gain `K♭` placing `targets` for the Brunovsky pair with the given indices.
///
/// Odd blocks first take one real target each; the remaining targets are
/// grouped in twos (conjugate pairs, then adjacent reals) and handed out in
/// sorted order, largest block first, so repeated values concentrate in the
/// largest blocks. When there are fewer real targets than odd blocks, the
/// blocks are chained into one companion matrix instead.
fn flat_placement(indices: &[usize], m: usize, targets: &Spectrum) -> Result<RealMatrix> {
    let n: usize = indices.iter().sum();
    let (reals, pairs) = split_atoms(targets)?;
    let mut k_flat = RealMatrix::zeros(m, n);
    let starts: Vec<usize> = indices
        .iter()
        .scan(0, |acc, &k| {
            let s = *acc;
            *acc += k;
            Some(s)
        })
        .collect();
    let odd = indices.iter().filter(|&&k| k % 2 == 1).count();

    if reals.len() < odd {
        let roots: Vec<Complex64> = targets.values().to_vec();
        let c = companion_coefficients(&roots);
        let last = indices.len() - 1;
        for j in 0..last {
            k_flat[(j, starts[j + 1])] = -1.0;
        }
        for (col, &cj) in c.iter().enumerate() {
            k_flat[(last, col)] = cj;
        }
        return Ok(k_flat);
    }

    let mut blocks: Vec<Vec<Atom>> = vec![Vec::new(); indices.len()];
    let mut capacity: Vec<usize> = indices.to_vec();
    let mut real_iter = reals.into_iter();
    for (j, &k) in indices.iter().enumerate() {
        if k % 2 == 1 {
            blocks[j].push(Atom::Real(real_iter.next().unwrap()));
            capacity[j] -= 1;
        }
    }
    let mut units: Vec<Vec<Atom>> = pairs.into_iter().map(|z| vec![Atom::Pair(z)]).collect();
    let rest: Vec<f64> = real_iter.collect();
    for two in rest.chunks(2) {
        units.push(two.iter().map(|&x| Atom::Real(x)).collect());
    }
    units.sort_by(|a, b| {
        let (ka, kb) = (a[0].key(), b[0].key());
        ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
    });
    // Indices are non-increasing, so filling in order serves the largest block first.
    let mut j = 0;
    for unit in units {
        while capacity[j] == 0 {
            j += 1;
        }
        capacity[j] -= 2;
        blocks[j].extend(unit);
    }

    for (j, atoms) in blocks.iter().enumerate() {
        let roots: Vec<Complex64> = atoms.iter().flat_map(Atom::roots).collect();
        for (i, c) in companion_coefficients(&roots).into_iter().enumerate() {
            k_flat[(j, starts[j] + i)] = c;
        }
    }
    Ok(k_flat)
}

/// State-feedback gain with `Sp(A − BK) = targets`.
pub fn pole_place(sys: &LtiSystem, targets: &Spectrum) -> Result<RealMatrix> {
    if targets.len() != sys.n() {
        return Err(Error::DimensionMismatch {
            op: "pole_place",
            expected: (sys.n(), 1),
            got: (targets.len(), 1),
        });
    }
    let bf = brunovsky(sys)?;
    let k_flat = flat_placement(&bf.indices, bf.m(), targets)?;
    pullback_gain(&bf, &k_flat)
}

/// Gains `K₁ + jK₂′`, `j = 1..count`, sharing the spectrum `{i/(n+1)}`.
///
/// `K₁` places the distinct values `i/(n+1)`. In the eigenbasis `S` of
/// `A − BK₁`, an elementary column operation `E` zeroes the last entry of
/// column `m` of `SBE`; feeding that column back into the last state only
/// adds entries above the diagonal, so the spectrum stays put.
pub fn schur_unbounded_sequence(sys: &LtiSystem, count: usize) -> Result<Vec<RealMatrix>> {
    let (n, m) = (sys.n(), sys.m());
    if m < 2 {
        return Err(Error::Infeasible("the construction needs at least two inputs".into()));
    }
    if rank(&sys.b, None) < m {
        return Err(Error::Infeasible("B must have full column rank".into()));
    }
    let lambdas: Vec<f64> = (1..=n).map(|i| i as f64 / (n + 1) as f64).collect();
    let k1 = pole_place(sys, &Spectrum::from_real(&lambdas))?;
    let acl = &sys.a - &(&sys.b * &k1);

    let mut w = RealMatrix::zeros(n, n);
    for (i, &l) in lambdas.iter().enumerate() {
        let v = eigenvector(&acl, l)?;
        for r in 0..n {
            w[(r, i)] = v[r];
        }
    }
    let s = inverse(&w)?;
    let bt = &s * &sys.b;

    // E acts on columns of B̃ so that (B̃E)[n, m] = 0.
    let last = bt.row(n - 1).to_vec();
    let mut e = RealMatrix::identity(m);
    let scale = last.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if last[m - 1].abs() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        let (piv, val) = (0..m - 1)
            .map(|j| (j, last[j]))
            .fold((0, 0.0f64), |b, c| if c.1.abs() > b.1.abs() { c } else { b });
        if val.abs() > 1e-12 * scale {
            e[(piv, m - 1)] = -last[m - 1] / val;
        } else {
            // Only column m reaches the last state; swap it with column 1.
            e[(0, 0)] = 0.0;
            e[(m - 1, m - 1)] = 0.0;
            e[(0, m - 1)] = 1.0;
            e[(m - 1, 0)] = 1.0;
        }
    }
    let mut k2t = RealMatrix::zeros(m, n);
    for r in 0..m {
        k2t[(r, n - 1)] = e[(r, m - 1)];
    }
    let mut k2 = &k2t * &s;
    k2 = k2.scale(1.0 / k2.norm_fro());
    if k1.dot(&k2) < 0.0 {
        k2 = k2.scale(-1.0);
    }
    Ok((1..=count).map(|j| &k1 + &k2.scale(j as f64)).collect())
}

/// Unit eigenvector of `m` for the real simple eigenvalue `lambda`.
fn eigenvector(m: &RealMatrix, lambda: f64) -> Result<Vec<f64>> {
    let shifted = m.add_scaled_identity(-lambda);
    // Loosen the rank threshold until exactly one direction survives.
    for tol in [1e-10, 1e-8, 1e-6] {
        let ns = null_space(&shifted, Some(tol * shifted.norm_fro().max(1.0)));
        if ns.cols() >= 1 {
            return Ok(ns.col(0));
        }
    }
    Err(Error::Infeasible(format!("no eigenvector found for {lambda}")))
}
