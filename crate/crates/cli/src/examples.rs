//! Reproduction checks for the named structured instances.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use stab_core::linalg::{eigenvalues, inverse, RealMatrix};
use stab_core::poly::{char_poly, StabilityClass};
use stab_core::regions::{
    count_components_product, gen_instance, sample_region_with, schur_2x2_endpoints, Instance, InstanceId, RegionReport,
    SampleOptions,
};
use stab_core::stability::{bilinear, closed_loop, infer_kind, membership, spectral_margin};
use stab_core::Result;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ExampleReport {
    pub instance: String,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl ExampleReport {
    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check { name: name.into(), passed, detail });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn run(id: &InstanceId, parallel: bool) -> Result<ExampleReport> {
    let inst = gen_instance(id)?;
    let mut report = ExampleReport { instance: id.to_string(), ..Default::default() };
    let options = SampleOptions { parallel, refine: true };
    match id {
        InstanceId::Hurwitz2x2Rotation => rotation(&inst, options, &mut report)?,
        InstanceId::Hurwitz2kBlocks { k, .. } => blocks(&inst, *k, 2048, options, &mut report)?,
        InstanceId::Schur2x2 { a } => schur(&inst, *a, options, &mut report)?,
        InstanceId::Schur2kBlocks { a, .. } => blocks(&inst, a.len(), 2048, options, &mut report)?,
        InstanceId::BoundedH => bounded_h(&inst, parallel, &mut report)?,
        InstanceId::BoundedS => bounded_s(&inst, &mut report)?,
        InstanceId::UnboundedS => unbounded_s(&inst, options, &mut report)?,
        InstanceId::BilinearCounterexample => bilinear_pair(&inst, &mut report)?,
    }
    Ok(report)
}

fn sweep(inst: &Instance, res: &[usize], options: SampleOptions) -> Result<RegionReport> {
    sample_region_with(&inst.system, &inst.subspace, &inst.default_box, res, options)
}

/// Component edges of a 1-D report, in order.
fn edges(r: &RegionReport) -> Vec<f64> {
    r.component_boxes.iter().flat_map(|b| [b[0].0, b[0].1]).collect()
}

fn rotation(inst: &Instance, options: SampleOptions, report: &mut ExampleReport) -> Result<()> {
    for t in [-2.0, 0.5, 3.0] {
        let k = inst.subspace.gain(&[t])?;
        let p = char_poly(&(&inst.system.a - &k))?;
        let expected = [(1.0 - t) * (1.0 - t), 1.0, 1.0];
        let err = p.coeffs().iter().zip(expected).map(|(c, e)| (c - e).abs()).fold(0.0, f64::max);
        report.check(
            &format!("char poly at t = {t}"),
            err <= 1e-12,
            format!("χ = λ² + λ + (1 − t)², max coefficient error {err:.1e}"),
        );
    }
    let r = sweep(inst, &[8192], options)?;
    let w = r.cell_width(0);
    let e = edges(&r);
    let ok = r.component_count == 2 && (e[1] - 1.0).abs() <= 2.0 * w && (e[2] - 1.0).abs() <= 2.0 * w;
    report.check(
        "two components split at t = 1",
        ok,
        format!("{} components on [-3, 4] at 8192 cells, edges {e:?}, cell width {w:.2e}", r.component_count),
    );
    report.notes.push("the printed components (−∞, 0) and (0, ∞) do not match the displayed matrix; its spectrum gives (−∞, 1) and (1, ∞)".into());
    Ok(())
}

fn blocks(inst: &Instance, k: usize, res: usize, options: SampleOptions, report: &mut ExampleReport) -> Result<()> {
    let origin = vec![0.0; k];
    let mut per_block = Vec::with_capacity(k);
    for axis in 0..k {
        let line = inst.subspace.slice(&[axis], &origin)?;
        let r = sample_region_with(&inst.system, &line, &[inst.default_box[axis]], &[res], options)?;
        per_block.push(r);
    }
    let counts: Vec<usize> = per_block.iter().map(|r| r.component_count).collect();
    let product = count_components_product(&per_block)?;
    report.check(
        "product of per-block sweeps",
        product == 1 << k,
        format!("per-block counts {counts:?}, product {product}, expected 2^{k} = {}", 1 << k),
    );
    if (2..=3).contains(&k) {
        let res = if k == 2 { vec![256; 2] } else { vec![32; 3] };
        let r = sweep(inst, &res, options)?;
        report.check(
            "direct flood fill",
            r.component_count == 1 << k,
            format!("{} components on a {res:?} grid", r.component_count),
        );
    }
    Ok(())
}

fn schur(inst: &Instance, a: f64, options: SampleOptions, report: &mut ExampleReport) -> Result<()> {
    let r = sweep(inst, &[8192], options)?;
    let w = r.cell_width(0);
    let expected = schur_2x2_endpoints(a)?;
    let found = edges(&r);
    report.check("two components", r.component_count == 2, format!("{} components on [-1, 2]", r.component_count));
    if found.len() == 4 {
        let dev = found.iter().zip(expected).map(|(f, e)| (f - e).abs()).fold(0.0, f64::max);
        report.check(
            "endpoints match the closed form",
            dev <= 2.0 * w,
            format!("expected {expected:.6?}, found {found:.6?}, max deviation {dev:.2e} (2 cells = {:.2e})", 2.0 * w),
        );
    }
    Ok(())
}

/// Displayed `χ_{A−BKC}` of the 8-state example, descending powers.
fn bounded_h_display(k1: f64, k2: f64) -> [f64; 9] {
    [
        1.0,
        8.0 - k2,
        56.0 * k1 + 28.0 + k2,
        -29.0 * k1 + 56.0,
        -27.0 * k1 + 70.0,
        -27.0 * k1 + 56.0,
        -29.0 * k1 + 28.0,
        -k2 - 14.0 * k1 + 8.0,
        1.0 + 70.0 * k1 + k2,
    ]
}

fn output_closed_loop(inst: &Instance, k: &RealMatrix) -> Result<RealMatrix> {
    closed_loop(&inst.system, k, infer_kind(&inst.system, k)?)
}

fn coefficient_error(m: &RealMatrix, descending: &[f64]) -> Result<f64> {
    let p = char_poly(m)?;
    Ok(p.descending().iter().zip(descending).map(|(c, e)| (c - e).abs() / (1.0 + e.abs())).fold(0.0, f64::max))
}

fn bounded_h(inst: &Instance, parallel: bool, report: &mut ExampleReport) -> Result<()> {
    let err = coefficient_error(&output_closed_loop(inst, &RealMatrix::zeros(2, 1))?, &bounded_h_display(0.0, 0.0))?;
    report.check("char poly at K = 0", err <= 1e-9, format!("(z + 1)^8 coefficients, max error {err:.1e}"));
    let mut rng = StdRng::seed_from_u64(stab_core::seed::base_seed() ^ 0x8);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let (k1, k2) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let k = RealMatrix::from_rows(&[&[k1], &[k2]]);
        worst = worst.max(coefficient_error(&output_closed_loop(inst, &k)?, &bounded_h_display(k1, k2))?);
    }
    report.check("displayed χ at random K", worst <= 1e-9, format!("5 seeded gains, max relative error {worst:.1e}"));

    // Odd resolution puts the line k1 = 0 on cell centers; the zoom covers
    // the thin stable region at a useful density.
    let plain = SampleOptions { parallel, refine: false };
    let coarse = sample_region_with(&inst.system, &inst.subspace, &inst.default_box, &[401, 401], plain)?;
    let zoom = sample_region_with(&inst.system, &inst.subspace, &[(-1.0, 1.0), (-10.0, 10.0)], &[400, 400], plain)?;
    let mut stable = 0;
    let mut violations = 0;
    for r in [&coarse, &zoom] {
        for cell in 0..r.cell_count() {
            if r.verdicts[cell] == StabilityClass::Stable {
                stable += 1;
                let t = r.cell_center(cell);
                if !(t[1] < 8.0 && 70.0 * t[0] + t[1] > -1.0) {
                    violations += 1;
                }
            }
        }
    }
    report.check(
        "stable samples satisfy the positivity bounds",
        stable > 0 && violations == 0,
        format!("{stable} stable samples in [-100, 100]² and its zoom, {violations} with k2 ≥ 8 or 70k1 + k2 ≤ −1"),
    );
    Ok(())
}

fn bounded_s(inst: &Instance, report: &mut ExampleReport) -> Result<()> {
    let zero = membership(&inst.system, &RealMatrix::zeros(2, 2))?;
    report.check("K = 0 is Schur", zero.verdict.is_stable(), format!("margin {:.4}", zero.verdict.margin));
    // χ_{A−BKC} = t⁴ + (2 + k₂)t³ + (2 + k₁ + k₂ + k₄)t² + (1 + k₂/2 + k₁ + k₃)t + 1/4 + k₁/2.
    let derived = |k: &[f64]| {
        [1.0, 2.0 + k[1], 2.0 + k[0] + k[1] + k[3], 1.0 + k[1] / 2.0 + k[0] + k[2], 0.25 + k[0] / 2.0]
    };
    let mut rng = StdRng::seed_from_u64(stab_core::seed::base_seed() ^ 0xa);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let k: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let gain = inst.subspace.gain(&k)?;
        worst = worst.max(coefficient_error(&output_closed_loop(inst, &gain)?, &derived(&k))?);
    }
    report.check("closed-loop polynomial", worst <= 1e-9, format!("max relative error {worst:.1e} at 5 seeded gains"));
    report.notes.push("the displayed polynomial has the signs of A + BKC; with A − BKC every k-term flips sign".into());

    // Vieta: a Schur quartic has |c_j| ≤ C(4, j), which boxes in every k_i.
    let bounds = [(-2.5, 1.5), (-6.0, 2.0), (-7.5, 8.5), (-11.5, 12.5)];
    const SAMPLES: usize = 200_000;
    let (mut stable, mut outside) = (0, 0);
    for _ in 0..SAMPLES {
        let k: Vec<f64> = bounds.iter().map(|(lo, hi)| rng.gen_range(lo - 2.0..hi + 2.0)).collect();
        if membership(&inst.system, &inst.subspace.gain(&k)?)?.verdict.is_stable() {
            stable += 1;
            if k.iter().zip(bounds).any(|(x, (lo, hi))| *x < lo || *x > hi) {
                outside += 1;
            }
        }
    }
    report.check(
        "stable gains stay in the Vieta box",
        stable > 0 && outside == 0,
        format!("{stable} stable of {SAMPLES} samples from the box widened by 2, {outside} outside {bounds:?}"),
    );
    let mut escaped = 0;
    for _ in 0..200 {
        let d: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        for r in [25.0, 100.0, 1e3, 1e4] {
            let k: Vec<f64> = d.iter().map(|x| r * x / norm).collect();
            if membership(&inst.system, &inst.subspace.gain(&k)?)?.verdict.is_stable() {
                escaped += 1;
            }
        }
    }
    report.check("far rays are unstable", escaped == 0, format!("{escaped} stable points at radius ≥ 25 on 200 rays"));
    Ok(())
}

fn unbounded_s(inst: &Instance, options: SampleOptions, report: &mut ExampleReport) -> Result<()> {
    let c_mat = inst.system.c.as_ref().expect("instance has an output matrix");
    let k = inst.subspace.gain(&[2.5])?;
    let bkc = &(&inst.system.b * &k) * c_mat;
    let mut expected = RealMatrix::zeros(4, 4);
    expected[(3, 0)] = 2.5;
    report.check("B·K_c·C has c at (4, 1)", bkc == expected, "checked at c = 2.5".into());
    let mut worst: f64 = 0.0;
    let mut radii = Vec::new();
    for c in [-10.0, 0.0, 7.0] {
        let acl = output_closed_loop(inst, &inst.subspace.gain(&[c])?)?;
        worst = worst.max(coefficient_error(&acl, &[1.0, 2.0, 2.0, c + 1.0, 0.25])?);
        radii.push(eigenvalues(&acl)?.spectral_radius());
    }
    report.check(
        "closed-loop polynomial t⁴ + 2t³ + 2t² + (c + 1)t + 1/4",
        worst <= 1e-9,
        format!("max relative error {worst:.1e} at c ∈ {{-10, 0, 7}}"),
    );
    report.check("K = 0 is Schur", radii[1] < 1.0, format!("spectral radius {:.4}", radii[1]));
    let r = sweep(inst, &[4000], options)?;
    let w = r.cell_width(0);
    let e = edges(&r);
    let ok = r.component_count == 1 && (e[0] + 0.125).abs() <= 2.0 * w && (e[1] - 0.25).abs() <= 2.0 * w;
    report.check(
        "K_c is Schur exactly for c ∈ (−1/8, 1/4)",
        ok,
        format!("sweep on [-1, 1] finds {} component(s) with edges {e:?}", r.component_count),
    );
    report.notes.push(format!(
        "the claim that K_c is stabilizing for every real c does not hold: spectral radius {:.3} at c = −10 and {:.3} at c = 7",
        radii[0], radii[2]
    ));
    Ok(())
}

fn bilinear_pair(inst: &Instance, report: &mut ExampleReport) -> Result<()> {
    let closed_a = RealMatrix::from_rows(&[
        &[-1.0, -2.0, 0.0, 0.0],
        &[0.0, -1.0, 0.0, 0.0],
        &[0.0, 0.0, -1.0, -2.0],
        &[0.0, 0.0, 0.0, -1.0],
    ]);
    let t = bilinear(&inst.system.a)?;
    let err = t.max_abs_diff(&closed_a);
    report.check("bilinear image of A", err <= 1e-12, format!("max entry error {err:.1e}"));
    let zero = membership(&inst.system, &RealMatrix::zeros(2, 4))?;
    report.check(
        "K = 0 is Schur",
        zero.verdict.is_stable(),
        format!("{} with margin {:.3}", zero.set_kind, zero.verdict.margin),
    );
    // A − BK can only change the rows in range(B).
    let b = &inst.system.b;
    let proj = &(b * &inverse(&(&b.transpose() * b))?) * &b.transpose();
    let d = &inst.system.a - &closed_a;
    let residual = (&d - &(&proj * &d)).norm_fro();
    report.check(
        "no gain realizes the image as A − BK",
        residual > 0.5,
        format!("distance of A − image from range(B) is {residual:.3}"),
    );
    let margin = spectral_margin(&eigenvalues(&closed_a)?, stab_core::canonical::Domain::Continuous);
    report.check("the image is Hurwitz", margin < 0.0, format!("max Re λ = {margin}"));
    Ok(())
}
