use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::GainSubspace;
use crate::canonical::{Domain, LtiSystem};
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, KronEquation, Lu};
use crate::poly::{StabilityClass, VERDICT_TOLERANCE};
use crate::stability::{closed_loop, infer_kind, spectral_margin, SetKind};

pub const MAX_REGION_DIM: usize = 3;
pub const MIN_RESOLUTION: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleOptions {
    /// Evaluate cells on the rayon pool. Output is identical either way.
    pub parallel: bool,
    /// Also probe face midpoints and mark stable cells that may contain a
    /// boundary point as marginal. Catches boundaries the stable set only
    /// touches, which center sampling alone misses.
    pub refine: bool,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self { parallel: true, refine: true }
    }
}

/// Sampled map of a stabilizing set over a box in parameter space.
///
/// Cells are stored row-major: the last axis varies fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    #[serde(rename = "box")]
    pub bounds: Vec<(f64, f64)>,
    pub resolution: Vec<usize>,
    pub verdicts: Vec<StabilityClass>,
    /// Component id of each stable cell, `None` elsewhere.
    pub labels: Vec<Option<usize>>,
    pub component_count: usize,
    /// Per component, the `(lo, hi)` extent of its cells along each axis.
    pub component_boxes: Vec<Vec<(f64, f64)>>,
}

impl RegionReport {
    /// Labels the stable cells of a verdict grid.
    pub fn from_verdicts(bounds: Vec<(f64, f64)>, resolution: Vec<usize>, verdicts: Vec<StabilityClass>) -> Result<Self> {
        check_grid(&bounds, &resolution)?;
        let cells: usize = resolution.iter().product();
        if verdicts.len() != cells {
            return Err(Error::Parameter(format!("expected {cells} verdicts, got {}", verdicts.len())));
        }
        let (labels, component_count) = label_components(&resolution, &verdicts);
        let mut report = Self {
            bounds,
            resolution,
            verdicts,
            labels,
            component_count,
            component_boxes: Vec::new(),
        };
        report.component_boxes = report.compute_boxes();
        Ok(report)
    }

    pub fn dim(&self) -> usize {
        self.resolution.len()
    }

    pub fn cell_count(&self) -> usize {
        self.verdicts.len()
    }

    pub fn cell_width(&self, axis: usize) -> f64 {
        let (lo, hi) = self.bounds[axis];
        (hi - lo) / self.resolution[axis] as f64
    }

    /// Per-axis indices of a row-major cell index.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            idx[a] = flat % self.resolution[a];
            flat /= self.resolution[a];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.resolution).fold(0, |acc, (&i, &r)| acc * r + i)
    }

    pub fn cell_center(&self, flat: usize) -> Vec<f64> {
        cell_center(&self.bounds, &self.resolution, flat)
    }

    pub fn count(&self, class: StabilityClass) -> usize {
        self.verdicts.iter().filter(|&&v| v == class).count()
    }

    fn compute_boxes(&self) -> Vec<Vec<(f64, f64)>> {
        let d = self.dim();
        let mut lo_idx = vec![vec![usize::MAX; d]; self.component_count];
        let mut hi_idx = vec![vec![0; d]; self.component_count];
        for (flat, label) in self.labels.iter().enumerate() {
            if let Some(c) = *label {
                for (a, i) in self.multi_index(flat).into_iter().enumerate() {
                    lo_idx[c][a] = lo_idx[c][a].min(i);
                    hi_idx[c][a] = hi_idx[c][a].max(i);
                }
            }
        }
        (0..self.component_count)
            .map(|c| {
                (0..d)
                    .map(|a| {
                        let (lo, _) = self.bounds[a];
                        let w = self.cell_width(a);
                        (lo + lo_idx[c][a] as f64 * w, lo + (hi_idx[c][a] + 1) as f64 * w)
                    })
                    .collect()
            })
            .collect()
    }
}

fn check_grid(bounds: &[(f64, f64)], resolution: &[usize]) -> Result<()> {
    if bounds.len() != resolution.len() || bounds.is_empty() {
        return Err(Error::Parameter("box and resolution must have one entry per parameter".into()));
    }
    if resolution.len() > MAX_REGION_DIM {
        return Err(Error::Dimensionality(resolution.len()));
    }
    for (&(lo, hi), &r) in bounds.iter().zip(resolution) {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Parameter(format!("invalid box side [{lo}, {hi}]")));
        }
        if r < MIN_RESOLUTION {
            return Err(Error::Parameter(format!("resolution {r} below the minimum {MIN_RESOLUTION}")));
        }
    }
    Ok(())
}

fn cell_center(bounds: &[(f64, f64)], resolution: &[usize], mut flat: usize) -> Vec<f64> {
    let mut theta = vec![0.0; resolution.len()];
    for a in (0..resolution.len()).rev() {
        let i = flat % resolution[a];
        flat /= resolution[a];
        let (lo, hi) = bounds[a];
        theta[a] = lo + (i as f64 + 0.5) * (hi - lo) / resolution[a] as f64;
    }
    theta
}

/// Face-connected labeling of the stable cells; ids follow row-major
/// first-seen order.
pub fn label_components(resolution: &[usize], verdicts: &[StabilityClass]) -> (Vec<Option<usize>>, usize) {
    let d = resolution.len();
    let mut strides = vec![1; d];
    for a in (0..d.saturating_sub(1)).rev() {
        strides[a] = strides[a + 1] * resolution[a + 1];
    }
    let mut labels = vec![None; verdicts.len()];
    let mut next = 0;
    let mut stack = Vec::new();
    for start in 0..verdicts.len() {
        if verdicts[start] != StabilityClass::Stable || labels[start].is_some() {
            continue;
        }
        labels[start] = Some(next);
        stack.push(start);
        while let Some(cell) = stack.pop() {
            for a in 0..d {
                let i = (cell / strides[a]) % resolution[a];
                let mut neighbors = [None, None];
                if i > 0 {
                    neighbors[0] = Some(cell - strides[a]);
                }
                if i + 1 < resolution[a] {
                    neighbors[1] = Some(cell + strides[a]);
                }
                for nb in neighbors.into_iter().flatten() {
                    if verdicts[nb] == StabilityClass::Stable && labels[nb].is_none() {
                        labels[nb] = Some(next);
                        stack.push(nb);
                    }
                }
            }
        }
        next += 1;
    }
    (labels, next)
}

/// Closed-loop quantities at one parameter point.
#[derive(Clone, Copy, Debug)]
struct Probe {
    margin: f64,
    /// `det(I⊗A + A⊗I)` or `det(A⊗A − I)`: a polynomial in the parameters
    /// that vanishes wherever an eigenvalue (pair) sits on the stability
    /// boundary and never vanishes inside the stable set.
    boundary: f64,
}

struct Evaluator<'a> {
    sys: &'a LtiSystem,
    sub: &'a GainSubspace,
    kind: SetKind,
    with_boundary: bool,
}

impl Evaluator<'_> {
    fn probe(&self, theta: &[f64]) -> Result<Probe> {
        let k = self.sub.gain(theta)?;
        let acl = closed_loop(self.sys, &k, self.kind)?;
        let margin = spectral_margin(&eigenvalues(&acl)?, self.kind.domain());
        let boundary = if self.with_boundary {
            let op = match self.kind.domain() {
                Domain::Continuous => KronEquation::Continuous(&acl),
                Domain::Discrete => KronEquation::Discrete(&acl),
            }
            .operator();
            Lu::factor(&op).map_or(0.0, |lu| lu.determinant())
        } else {
            0.0
        };
        Ok(Probe { margin, boundary })
    }

    fn probes(&self, points: usize, point: impl Fn(usize) -> Vec<f64> + Sync, parallel: bool) -> Result<Vec<Probe>> {
        if parallel {
            (0..points).into_par_iter().map(|i| self.probe(&point(i))).collect()
        } else {
            (0..points).map(|i| self.probe(&point(i))).collect()
        }
    }
}

/// Samples the stabilizing set over `bounds` with the default options.
pub fn sample_region(
    sys: &LtiSystem,
    sub: &GainSubspace,
    bounds: &[(f64, f64)],
    resolution: &[usize],
) -> Result<RegionReport> {
    sample_region_with(sys, sub, bounds, resolution, SampleOptions::default())
}

pub fn sample_region_with(
    sys: &LtiSystem,
    sub: &GainSubspace,
    bounds: &[(f64, f64)],
    resolution: &[usize],
    options: SampleOptions,
) -> Result<RegionReport> {
    if sub.dim() > MAX_REGION_DIM {
        return Err(Error::Dimensionality(sub.dim()));
    }
    check_grid(bounds, resolution)?;
    if bounds.len() != sub.dim() {
        return Err(Error::Parameter(format!(
            "box has {} sides but the subspace has dimension {}",
            bounds.len(),
            sub.dim()
        )));
    }
    let kind = infer_kind(sys, sub.offset())?;
    let eval = Evaluator { sys, sub, kind, with_boundary: options.refine };
    let cells: usize = resolution.iter().product();
    let centers = eval.probes(cells, |i| cell_center(bounds, resolution, i), options.parallel)?;
    let mut verdicts: Vec<StabilityClass> = centers.iter().map(|p| classify(p.margin)).collect();

    if options.refine {
        for axis in 0..resolution.len() {
            let faces = face_probes(&eval, bounds, resolution, axis, options.parallel)?;
            refine_axis(&mut verdicts, &centers, &faces, resolution, axis);
        }
    }
    RegionReport::from_verdicts(bounds.to_vec(), resolution.to_vec(), verdicts)
}

fn classify(margin: f64) -> StabilityClass {
    if margin < -VERDICT_TOLERANCE {
        StabilityClass::Stable
    } else if margin <= VERDICT_TOLERANCE {
        StabilityClass::Marginal
    } else {
        StabilityClass::Unstable
    }
}

/// Probes at the face midpoints orthogonal to `axis`, on the lattice with
/// `resolution[axis] + 1` points along that axis.
fn face_probes(
    eval: &Evaluator<'_>,
    bounds: &[(f64, f64)],
    resolution: &[usize],
    axis: usize,
    parallel: bool,
) -> Result<Vec<Probe>> {
    let mut lattice = resolution.to_vec();
    lattice[axis] += 1;
    let points: usize = lattice.iter().product();
    eval.probes(
        points,
        |mut flat| {
            let mut theta = vec![0.0; lattice.len()];
            for a in (0..lattice.len()).rev() {
                let i = flat % lattice[a];
                flat /= lattice[a];
                let (lo, hi) = bounds[a];
                let w = (hi - lo) / resolution[a] as f64;
                let offset = if a == axis { 0.0 } else { 0.5 };
                theta[a] = lo + (i as f64 + offset) * w;
            }
            theta
        },
        parallel,
    )
}

/// Demotes a stable cell to marginal when a face midpoint along `axis` is
/// not stable, or when the boundary polynomial may reach zero inside the
/// cell along that axis.
fn refine_axis(
    verdicts: &mut [StabilityClass],
    centers: &[Probe],
    faces: &[Probe],
    resolution: &[usize],
    axis: usize,
) {
    let inner: usize = resolution[axis + 1..].iter().product();
    let r = resolution[axis];
    for (cell, verdict) in verdicts.iter_mut().enumerate() {
        if *verdict != StabilityClass::Stable {
            continue;
        }
        let outer = cell / (inner * r);
        let i = (cell / inner) % r;
        let rest = cell % inner;
        let left = faces[(outer * (r + 1) + i) * inner + rest];
        let right = faces[(outer * (r + 1) + i + 1) * inner + rest];
        let mid = centers[cell];
        if left.margin >= -VERDICT_TOLERANCE
            || right.margin >= -VERDICT_TOLERANCE
            || may_vanish(left.boundary, mid.boundary, right.boundary)
        {
            *verdict = StabilityClass::Marginal;
        }
    }
}

/// Extremum within this fraction of the sample magnitudes counts as a touch.
const TOUCH_RATIO: f64 = 0.05;

/// Fits `g(s)` through `s = −½, 0, ½` and reports a sign change, or an
/// interior extremum at or near zero.
fn may_vanish(left: f64, mid: f64, right: f64) -> bool {
    if left * mid <= 0.0 || right * mid <= 0.0 {
        return true;
    }
    let b = right - left;
    let a = 2.0 * (right + left - 2.0 * mid);
    if a == 0.0 {
        return false;
    }
    let vertex = -b / (2.0 * a);
    if vertex.abs() > 0.5 {
        return false;
    }
    let extremum = mid - b * b / (4.0 * a);
    extremum * mid <= 0.0 || extremum.abs() <= TOUCH_RATIO * left.abs().max(mid.abs()).max(right.abs())
}

/// Product of the component counts of 1-D reports.
pub fn count_components_product(reports: &[RegionReport]) -> Result<usize> {
    reports.iter().try_fold(1usize, |acc, r| {
        if r.dim() != 1 {
            return Err(Error::Precondition(format!(
                "product law needs 1-D reports, got dimension {}",
                r.dim()
            )));
        }
        Ok(acc * r.component_count)
    })
}
