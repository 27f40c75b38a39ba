use serde::{Deserialize, Serialize};

use super::GainSubspace;
use crate::canonical::{Domain, LtiSystem};
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, RealMatrix};
use crate::poly::VERDICT_TOLERANCE;
use crate::stability::{spectral_margin, state_margin};

/// Added to the sampled maximum abscissa when choosing the shift `c′`.
pub const SHIFT_MARGIN: f64 = 1.0;
/// Samples per path segment, endpoints included.
pub const PATH_SAMPLES: usize = 101;
/// Samples used to estimate the maximum abscissa along the direct segment.
pub const ABSCISSA_SAMPLES: usize = 1001;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub segment: usize,
    pub t: f64,
    pub gain: RealMatrix,
    pub margin: f64,
}

/// Piecewise-linear path of gains, verified stabilizing at every sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilizingPath {
    /// Corner gains; segment `s` runs from `vertices[s]` to `vertices[s + 1]`.
    pub vertices: Vec<RealMatrix>,
    pub samples: Vec<PathSample>,
}

impl StabilizingPath {
    pub fn segments(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn gains(&self) -> impl Iterator<Item = &RealMatrix> {
        self.samples.iter().map(|s| &s.gain)
    }

    pub fn max_margin(&self) -> f64 {
        self.samples.iter().map(|s| s.margin).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn linspace(count: usize) -> impl Iterator<Item = f64> {
    (0..count).map(move |i| i as f64 / (count - 1) as f64)
}

/// Samples each segment and checks the margin (and any extra condition) at
/// every sample.
fn sample_path(
    vertices: Vec<RealMatrix>,
    margin: impl Fn(&RealMatrix) -> Result<f64>,
    extra: impl Fn(&RealMatrix) -> bool,
) -> Result<StabilizingPath> {
    let mut samples = Vec::with_capacity((vertices.len() - 1) * PATH_SAMPLES);
    for (segment, pair) in vertices.windows(2).enumerate() {
        for t in linspace(PATH_SAMPLES) {
            let gain = pair[0].lerp(&pair[1], t);
            let m = margin(&gain)?;
            if m >= -VERDICT_TOLERANCE || !extra(&gain) {
                return Err(Error::PathVerification { segment, t, margin: m });
            }
            samples.push(PathSample { segment, t, gain, margin: m });
        }
    }
    Ok(StabilizingPath { vertices, samples })
}

fn is_identity(m: &RealMatrix) -> bool {
    m.is_square() && m.max_abs_diff(&RealMatrix::identity(m.rows())) <= 1e-12
}

fn require_in_span(sub: &GainSubspace, k: &RealMatrix, name: &str) -> Result<()> {
    if sub.span_contains(k) {
        Ok(())
    } else {
        Err(Error::Structural(format!("{name} is not in the span of the gain subspace")))
    }
}

fn require_stabilizing(sys: &LtiSystem, k: &RealMatrix, name: &str) -> Result<()> {
    let margin = state_margin(sys, k)?;
    if margin < -VERDICT_TOLERANCE {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{name} is not stabilizing (margin {margin:.3e})")))
    }
}

/// Path between two Hurwitz-stabilizing structured gains for `B = I` and
/// `I` in the subspace: `K₁ → K₁ + c′I → K₂ + c′I → K₂`, or the direct
/// segment when it already stays stable.
pub fn connect_shift_path(
    sys: &LtiSystem,
    k1: &RealMatrix,
    k2: &RealMatrix,
    sub: &GainSubspace,
) -> Result<StabilizingPath> {
    if sys.domain != Domain::Continuous {
        return Err(Error::Precondition("shift paths apply to continuous systems".into()));
    }
    if !is_identity(&sys.b) {
        return Err(Error::Structural("shift path needs B = I".into()));
    }
    let n = sys.n();
    if !sub.span_contains(&RealMatrix::identity(n)) {
        return Err(Error::Structural("shift path needs I in the gain subspace".into()));
    }
    require_in_span(sub, k1, "K1")?;
    require_in_span(sub, k2, "K2")?;
    require_stabilizing(sys, k1, "K1")?;
    require_stabilizing(sys, k2, "K2")?;

    let margin = |k: &RealMatrix| state_margin(sys, k);
    let mut c = f64::NEG_INFINITY;
    for t in linspace(ABSCISSA_SAMPLES) {
        c = c.max(margin(&k1.lerp(k2, t))?);
    }
    let vertices = if c < 0.0 {
        vec![k1.clone(), k2.clone()]
    } else {
        let shift = c.max(0.0) + SHIFT_MARGIN;
        vec![
            k1.clone(),
            k1.add_scaled_identity(shift),
            k2.add_scaled_identity(shift),
            k2.clone(),
        ]
    };
    sample_path(vertices, margin, |_| true)
}

/// Distinguished gain `K_A` with `A − B K_A` zero on the controlled rows,
/// together with whether the nonnegative structure applies.
fn distinguished_gain(sys: &LtiSystem, sub: &GainSubspace) -> Result<(RealMatrix, bool)> {
    let (n, m) = (sys.n(), sys.m());
    if is_identity(&sys.b) {
        if !sub.span_contains(&sys.a) {
            return Err(Error::Structural("B = I but A is not in the gain subspace".into()));
        }
        return Ok((sys.a.clone(), false));
    }
    let top = sys.b.submatrix(0, 0, m, m);
    let stacked_identity = m < n
        && is_identity(&top)
        && sys.b.submatrix(m, 0, n - m, m).max_abs() == 0.0;
    if !stacked_identity {
        return Err(Error::Structural("B must be I or [I; 0]".into()));
    }
    if !sys.a.is_nonnegative() {
        return Err(Error::Structural("B = [I; 0] requires A to be entrywise nonnegative".into()));
    }
    let ka = sys.a.submatrix(0, 0, m, n);
    if !sub.span_contains(&ka) {
        return Err(Error::Structural("the first m rows of A are not in the gain subspace".into()));
    }
    Ok((ka, true))
}

/// Path `K₁ → K_A → K₂` through the gain that zeroes the controlled rows of
/// the closed loop. Both segments are convex combinations, stable because
/// the closed loop along them is a contraction of the endpoint's (for
/// `B = I`) or entrywise dominated by it (nonnegative case).
pub fn connect_convex_path_discrete(
    sys: &LtiSystem,
    k1: &RealMatrix,
    k2: &RealMatrix,
    sub: &GainSubspace,
) -> Result<StabilizingPath> {
    if sys.domain != Domain::Discrete {
        return Err(Error::Precondition("convex paths apply to discrete systems".into()));
    }
    let (ka, nonnegative) = distinguished_gain(sys, sub)?;
    require_in_span(sub, k1, "K1")?;
    require_in_span(sub, k2, "K2")?;
    let closed = |k: &RealMatrix| &sys.a - &(&sys.b * k);
    if nonnegative {
        for (k, name) in [(k1, "K1"), (k2, "K2")] {
            if !closed(k).is_nonnegative() {
                return Err(Error::Structural(format!("A − B·{name} is not entrywise nonnegative")));
            }
        }
    }
    require_stabilizing(sys, k1, "K1")?;
    require_stabilizing(sys, k2, "K2")?;
    let margin = |k: &RealMatrix| -> Result<f64> { Ok(spectral_margin(&eigenvalues(&closed(k))?, Domain::Discrete)) };
    sample_path(vec![k1.clone(), ka, k2.clone()], margin, |k| !nonnegative || closed(k).is_nonnegative())
}
