//! LTI systems, Kalman tests and the Brunovsky canonical form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::linalg::{default_rank_tolerance, inverse, null_space, rank, PivotedQr, RealMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Continuous,
    Discrete,
}

impl Domain {
    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Continuous => "continuous",
            Domain::Discrete => "discrete",
        }
    }
}

/// The triple `(A, B, C)` with its time domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LtiSystem {
    pub a: RealMatrix,
    pub b: RealMatrix,
    /// Output map; `None` means full state measurement.
    pub c: Option<RealMatrix>,
    pub domain: Domain,
}

impl LtiSystem {
    pub fn new(a: RealMatrix, b: RealMatrix, c: Option<RealMatrix>, domain: Domain) -> Result<Self> {
        let n = a.ensure_square()?;
        if n == 0 {
            return Err(Error::Precondition("state dimension must be at least 1".into()));
        }
        if b.rows() != n || b.cols() == 0 {
            return Err(Error::DimensionMismatch {
                op: "LtiSystem::new (B)",
                expected: (n, b.cols().max(1)),
                got: b.shape(),
            });
        }
        if let Some(c) = &c {
            if c.cols() != n || c.rows() == 0 {
                return Err(Error::DimensionMismatch {
                    op: "LtiSystem::new (C)",
                    expected: (c.rows().max(1), n),
                    got: c.shape(),
                });
            }
        }
        Ok(Self { a, b, c, domain })
    }

    /// State-feedback system without an output map.
    pub fn state_feedback(a: RealMatrix, b: RealMatrix, domain: Domain) -> Result<Self> {
        Self::new(a, b, None, domain)
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn m(&self) -> usize {
        self.b.cols()
    }

    /// Output dimension; `n` when `C` is absent.
    pub fn p(&self) -> usize {
        self.c.as_ref().map_or(self.n(), |c| c.rows())
    }

    /// `C`, or the identity when the system has no output map.
    pub fn output_matrix(&self) -> RealMatrix {
        self.c.clone().unwrap_or_else(|| RealMatrix::identity(self.n()))
    }

    /// `[B, AB, …, A^{n−1}B]`.
    pub fn controllability_matrix(&self) -> RealMatrix {
        let mut blocks = vec![self.b.clone()];
        for k in 1..self.n() {
            let next = &self.a * &blocks[k - 1];
            blocks.push(next);
        }
        RealMatrix::hstack(&blocks.iter().collect::<Vec<_>>())
    }

    /// `[C; CA; …; CA^{n−1}]`.
    pub fn observability_matrix(&self) -> Result<RealMatrix> {
        let c = self.c.as_ref().ok_or(Error::MissingOutput)?;
        let mut blocks = vec![c.clone()];
        for k in 1..self.n() {
            let next = &blocks[k - 1] * &self.a;
            blocks.push(next);
        }
        Ok(RealMatrix::vstack(&blocks.iter().collect::<Vec<_>>()))
    }
}

/// Kalman rank test for `(A, B)`.
pub fn is_controllable(sys: &LtiSystem) -> bool {
    rank(&sys.controllability_matrix(), None) == sys.n()
}

/// Kalman rank test for `(C, A)`.
pub fn is_observable(sys: &LtiSystem) -> Result<bool> {
    Ok(rank(&sys.observability_matrix()?, None) == sys.n())
}

/// Shift-block `A♭` and unit-column `B♭` for the given indices and input count.
pub fn brunovsky_pair(indices: &[usize], m: usize) -> (RealMatrix, RealMatrix) {
    let n: usize = indices.iter().sum();
    assert!(indices.len() <= m, "more blocks than inputs");
    let mut a = RealMatrix::zeros(n, n);
    let mut b = RealMatrix::zeros(n, m);
    let mut start = 0;
    for (j, &k) in indices.iter().enumerate() {
        for i in 0..k.saturating_sub(1) {
            a[(start + i, start + i + 1)] = 1.0;
        }
        b[(start + k - 1, j)] = 1.0;
        start += k;
    }
    (a, b)
}

/// Block indices if `(A, B)` is exactly a Brunovsky pair with full column rank `B`.
pub fn detect_brunovsky(a: &RealMatrix, b: &RealMatrix) -> Option<Vec<usize>> {
    let n = a.rows();
    if !a.is_square() || b.rows() != n {
        return None;
    }
    let mut ends = Vec::with_capacity(b.cols());
    for j in 0..b.cols() {
        let col = b.col(j);
        let ones: Vec<usize> = (0..n).filter(|&i| col[i] == 1.0).collect();
        if ones.len() != 1 || col.iter().filter(|&&x| x != 0.0).count() != 1 {
            return None;
        }
        ends.push(ones[0]);
    }
    if ends.last() != Some(&(n - 1)) || ends.windows(2).any(|w| w[0] >= w[1]) {
        return None;
    }
    let mut indices = Vec::with_capacity(ends.len());
    let mut prev = 0;
    for &e in &ends {
        indices.push(e + 1 - prev);
        prev = e + 1;
    }
    let (af, _) = brunovsky_pair(&indices, b.cols());
    (af == *a).then_some(indices)
}

/// Feedback-equivalence data `A♭ = T(A+BF)T⁻¹`, `B♭ = TBV`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrunovskyForm {
    pub t: RealMatrix,
    pub t_inv: RealMatrix,
    pub v: RealMatrix,
    pub f: RealMatrix,
    /// Controllability indices `k₁ ≥ … ≥ k_r`.
    pub indices: Vec<usize>,
    pub a_flat: RealMatrix,
    pub b_flat: RealMatrix,
    /// Set when a column selection decision was close to the rank tolerance.
    pub warning: Option<String>,
}

impl BrunovskyForm {
    pub fn n(&self) -> usize {
        self.t.rows()
    }

    pub fn m(&self) -> usize {
        self.v.rows()
    }

    /// `r = rank(B)`.
    pub fn input_rank(&self) -> usize {
        self.indices.len()
    }

    /// Entrywise residuals of `T(A+BF)T⁻¹ − A♭` and `TBV − B♭`.
    pub fn residuals(&self, sys: &LtiSystem) -> (f64, f64) {
        let af = &(&self.t * &(&sys.a + &(&sys.b * &self.f))) * &self.t_inv;
        let bf = &(&self.t * &sys.b) * &self.v;
        (af.max_abs_diff(&self.a_flat), bf.max_abs_diff(&self.b_flat))
    }
}

/// Brunovsky decomposition of a controllable pair.
///
/// Columns of `[B, AB, A²B, …]` are scanned in that order and kept when
/// independent of those already kept; the surviving chains give the
/// indices. `T` stacks `qᵢ, qᵢA, …, qᵢA^{kᵢ−1}` where `qᵢ` is the row of the
/// inverse chain matrix paired with the last vector of chain `i`.
///
/// For some pairs the column order alone yields a nearly singular `T` even
/// though the pair is well controllable. When `cond(T) ≥ 10³` the scan is
/// repeated on `(A, BW)` for up to 16 fixed-seed orthogonal `W`, keeping the
/// best-conditioned result with `W` folded into `V` and `F`.
pub fn brunovsky(sys: &LtiSystem) -> Result<BrunovskyForm> {
    const GOOD_ENOUGH: f64 = 1e3;
    let cond = |bf: &BrunovskyForm| bf.t.norm_fro() * bf.t_inv.norm_fro();
    let mut best = brunovsky_in_column_order(sys)?;
    let m = sys.m();
    if m == 1 || cond(&best) < GOOD_ENOUGH {
        return Ok(best);
    }
    let mut rng = StdRng::seed_from_u64(0x6d6978);
    for _ in 0..16 {
        let g = RealMatrix::from_fn(m, m, |_, _| rng.gen_range(-1.0..1.0));
        let w = PivotedQr::factor(&g).q;
        let mixed = LtiSystem::state_feedback(sys.a.clone(), &sys.b * &w, sys.domain)?;
        let Ok(mut bf) = brunovsky_in_column_order(&mixed) else { continue };
        if cond(&bf) < cond(&best) {
            bf.v = &w * &bf.v;
            bf.f = &w * &bf.f;
            best = bf;
            if cond(&best) < GOOD_ENOUGH {
                break;
            }
        }
    }
    Ok(best)
}

fn brunovsky_in_column_order(sys: &LtiSystem) -> Result<BrunovskyForm> {
    let n = sys.n();
    let m = sys.m();
    let ctrb = sys.controllability_matrix();
    let tol = default_rank_tolerance(&ctrb);
    let mut warning = None;
    let mut near = |res: f64, what: &str| {
        if res > tol && res < 1e4 * tol && warning.is_none() {
            warning = Some(format!(
                "{what}: residual {res:e} within four decades of rank tolerance {tol:e}"
            ));
        }
    };

    // Independent input columns, in column order.
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut selected = Vec::new();
    for j in 0..m {
        let res = orthogonal_residual(&mut basis, sys.b.col(j), tol);
        near(res, "input column selection");
        if res > tol {
            selected.push(j);
        }
    }
    let r = selected.len();
    if r == 0 {
        return Err(Error::NotControllable { rank: 0, n });
    }

    // Chain lengths from the crate ordering over [B_S, A B_S, …].
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut lengths = vec![0usize; r];
    let mut alive = vec![true; r];
    let mut current: Vec<Vec<f64>> = selected.iter().map(|&j| sys.b.col(j)).collect();
    for _power in 0..n {
        for i in 0..r {
            if !alive[i] {
                continue;
            }
            let res = orthogonal_residual(&mut basis, current[i].clone(), tol);
            near(res, "chain selection");
            if res > tol {
                lengths[i] += 1;
            } else {
                alive[i] = false;
            }
        }
        for i in 0..r {
            current[i] = sys.a.mul_vec(&current[i]);
        }
    }
    let total: usize = lengths.iter().sum();
    if total < n {
        return Err(Error::NotControllable { rank: total, n });
    }
    if lengths.iter().any(|&k| k == 0) {
        return Err(Error::NotControllable { rank: total, n });
    }

    // Sort chains by decreasing length, ties by column order.
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&x, &y| lengths[y].cmp(&lengths[x]));
    let indices: Vec<usize> = order.iter().map(|&i| lengths[i]).collect();
    let cols: Vec<usize> = order.iter().map(|&i| selected[i]).collect();
    let b_s = sys.b.select_cols(&cols);

    // Chain matrix [b₁, Ab₁, …, A^{k₁−1}b₁, b₂, …].
    let mut chain = RealMatrix::zeros(n, n);
    let mut pos = 0;
    let mut ends = Vec::with_capacity(r);
    for (i, &k) in indices.iter().enumerate() {
        let mut v = b_s.col(i);
        for _ in 0..k {
            for (row, x) in v.iter().enumerate() {
                chain[(row, pos)] = *x;
            }
            pos += 1;
            v = sys.a.mul_vec(&v);
        }
        ends.push(pos - 1);
    }
    let chain_inv = inverse(&chain)?;
    let mut t = RealMatrix::zeros(n, n);
    let mut row = 0;
    for (i, &k) in indices.iter().enumerate() {
        let mut q = RealMatrix::new(1, n, chain_inv.row(ends[i]).to_vec())?;
        for _ in 0..k {
            t.set_block(row, 0, &q);
            row += 1;
            q = &q * &sys.a;
        }
    }
    let t_inv = inverse(&t)?;

    // Block-end rows of TB_S and of TAT⁻¹.
    let tb = &t * &b_s;
    let tat = &(&t * &sys.a) * &t_inv;
    let gamma = tb.select_rows(&ends);
    let rr = tat.select_rows(&ends);
    let v_s = inverse(&gamma)?;
    let f_s = (&(&v_s * &rr) * &t).scale(-1.0);

    // Embed into the full input space; ker(B) completes V.
    let mut v = RealMatrix::zeros(m, m);
    let mut f = RealMatrix::zeros(m, n);
    for (i, &c) in cols.iter().enumerate() {
        for j in 0..r {
            v[(c, j)] = v_s[(i, j)];
        }
        for j in 0..n {
            f[(c, j)] = f_s[(i, j)];
        }
    }
    if r < m {
        let kernel = null_space(&sys.b, Some(tol));
        let kernel = if kernel.cols() == m - r {
            kernel
        } else {
            // Fall back to the rank decision made above when tolerances disagree.
            complement_of(&sys.b, &cols)
        };
        v.set_block(0, r, &kernel);
    }
    let (a_flat, b_flat) = brunovsky_pair(&indices, m);
    Ok(BrunovskyForm {
        t,
        t_inv,
        v,
        f,
        indices,
        a_flat,
        b_flat,
        warning,
    })
}

/// Gram–Schmidt residual of `v` against `basis`; appends the normalized
/// remainder when it exceeds `tol`.
fn orthogonal_residual(basis: &mut Vec<Vec<f64>>, mut v: Vec<f64>, tol: f64) -> f64 {
    for _ in 0..2 {
        for q in basis.iter() {
            let d: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
            for (x, qi) in v.iter_mut().zip(q) {
                *x -= d * qi;
            }
        }
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > tol {
        basis.push(v.into_iter().map(|x| x / norm).collect());
    }
    norm
}

/// Kernel basis of `B` built by expressing dropped columns in the kept ones.
fn complement_of(b: &RealMatrix, kept: &[usize]) -> RealMatrix {
    let m = b.cols();
    let b_s = b.select_cols(kept);
    let gram = &b_s.transpose() * &b_s;
    let gram_inv = inverse(&gram).expect("kept columns are independent");
    let dropped: Vec<usize> = (0..m).filter(|j| !kept.contains(j)).collect();
    let mut out = RealMatrix::zeros(m, dropped.len());
    for (c, &j) in dropped.iter().enumerate() {
        let coef = gram_inv.mul_vec(&b_s.transpose().mul_vec(&b.col(j)));
        out[(j, c)] = 1.0;
        for (i, &k) in kept.iter().enumerate() {
            out[(k, c)] = -coef[i];
        }
    }
    out
}

/// Gain for `(A, B)` corresponding to `K♭` for `(A♭, B♭)`: `V K♭ T − F`.
///
/// With `A♭ = T(A+BF)T⁻¹` and `B♭ = TBV`, this gives
/// `T(A − BK)T⁻¹ = A♭ − B♭K♭`.
pub fn pullback_gain(bf: &BrunovskyForm, k_flat: &RealMatrix) -> Result<RealMatrix> {
    k_flat.ensure_shape("pullback_gain", (bf.m(), bf.n()))?;
    Ok(&(&(&bf.v * k_flat) * &bf.t) - &bf.f)
}

/// Drops the `m − r` zero columns of `B♭`.
///
/// Returns `B̂♭` and the number of free gain coordinates, `(m − r)·n`; the
/// last `m − r` rows of any `K♭` do not affect `Sp(A♭ − B♭K♭)`.
pub fn reduce_full_column_rank(bf: &BrunovskyForm) -> (RealMatrix, usize) {
    let r = bf.input_rank();
    let cols: Vec<usize> = (0..r).collect();
    (bf.b_flat.select_cols(&cols), (bf.m() - r) * bf.n())
}
