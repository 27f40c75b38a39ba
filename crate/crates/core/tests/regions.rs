use stab_core::canonical::{Domain, LtiSystem};
use stab_core::linalg::{eigenvalues, RealMatrix};
use stab_core::poly::StabilityClass;
use stab_core::regions::*;
use stab_core::stability::state_margin;

use proptest::prelude::*;

fn one_dim(inst: &Instance, axis: usize, res: usize) -> RegionReport {
    let line = inst.subspace.slice(&[axis], &vec![0.0; inst.subspace.dim()]).unwrap();
    sample_region(&inst.system, &line, &[inst.default_box[axis]], &[res]).unwrap()
}

#[test]
fn schur_endpoints_within_two_cells() {
    for a in [2.5, 3.0, 5.0, 10.0] {
        let inst = gen_instance(&InstanceId::Schur2x2 { a }).unwrap();
        let r = sample_region(&inst.system, &inst.subspace, &inst.default_box, &[4096]).unwrap();
        assert_eq!(r.component_count, 2, "a = {a}");
        let found = [
            r.component_boxes[0][0].0,
            r.component_boxes[0][0].1,
            r.component_boxes[1][0].0,
            r.component_boxes[1][0].1,
        ];
        let tol = 2.0 * r.cell_width(0);
        for (f, e) in found.iter().zip(schur_2x2_endpoints(a).unwrap()) {
            assert!((f - e).abs() <= tol, "a = {a}: found {f}, expected {e}");
        }
    }
}

#[test]
fn refinement_never_loses_components() {
    let instances = [
        InstanceId::Hurwitz2x2Rotation,
        InstanceId::Schur2x2 { a: 2.5 },
        InstanceId::Schur2x2 { a: 10.0 },
    ];
    for id in instances {
        let inst = gen_instance(&id).unwrap();
        let mut prev = 0;
        for res in [16, 32, 64, 128, 256, 512, 1024, 2048] {
            let r = sample_region(&inst.system, &inst.subspace, &inst.default_box, &[res]).unwrap();
            assert!(r.component_count >= prev, "{id} at {res}");
            prev = r.component_count;
            if res >= 1024 {
                assert_eq!(r.component_count, 2, "{id} at {res}");
            }
        }
    }
}

#[test]
fn rotation_boundary_at_one() {
    let inst = gen_instance(&InstanceId::Hurwitz2x2Rotation).unwrap();
    let r = sample_region(&inst.system, &inst.subspace, &inst.default_box, &[8192]).unwrap();
    assert_eq!(r.component_count, 2);
    let tol = 2.0 * r.cell_width(0);
    assert!((r.component_boxes[0][0].1 - 1.0).abs() <= tol);
    assert!((r.component_boxes[1][0].0 - 1.0).abs() <= tol);
}

#[test]
fn product_law_matches_direct_flood_fill() {
    for id in [
        InstanceId::Hurwitz2kBlocks { k: 2, odd: false },
        InstanceId::Schur2kBlocks { a: vec![3.0, 5.0], odd: false },
        InstanceId::Schur2kBlocks { a: vec![2.5, 4.0], odd: true },
    ] {
        let inst = gen_instance(&id).unwrap();
        let direct = sample_region(&inst.system, &inst.subspace, &inst.default_box, &[256, 256]).unwrap();
        let per_block: Vec<_> = (0..2).map(|axis| one_dim(&inst, axis, 256)).collect();
        assert_eq!(direct.component_count, count_components_product(&per_block).unwrap(), "{id}");
        assert_eq!(direct.component_count, 4, "{id}");
    }
}

#[test]
fn three_blocks_give_eight_components() {
    let inst = gen_instance(&InstanceId::Schur2kBlocks { a: vec![3.0; 3], odd: false }).unwrap();
    let per_block: Vec<_> = (0..3).map(|axis| one_dim(&inst, axis, 1024)).collect();
    assert_eq!(count_components_product(&per_block).unwrap(), 8);
    let direct = sample_region(&inst.system, &inst.subspace, &inst.default_box, &[32, 32, 32]).unwrap();
    assert_eq!(direct.component_count, 8);
}

#[test]
fn unbounded_s_example_stable_interval() {
    // χ = t⁴ + 2t³ + 2t² + (c + 1)t + 1/4 is Schur exactly for c ∈ (−1/8, 1/4).
    let inst = gen_instance(&InstanceId::UnboundedS).unwrap();
    let r = sample_region(&inst.system, &inst.subspace, &inst.default_box, &[4000]).unwrap();
    assert_eq!(r.component_count, 1);
    let (lo, hi) = r.component_boxes[0][0];
    assert!((lo + 0.125).abs() <= 2.0 * r.cell_width(0), "{lo}");
    assert!((hi - 0.25).abs() <= 2.0 * r.cell_width(0), "{hi}");
    for c in [7.0, -10.0] {
        let k = inst.subspace.gain(&[c]).unwrap();
        let acl = &inst.system.a - &(&(&inst.system.b * &k) * inst.system.c.as_ref().unwrap());
        assert!(eigenvalues(&acl).unwrap().spectral_radius() > 1.0);
    }
}

#[test]
fn csv_and_json_files_roundtrip() {
    let inst = gen_instance(&InstanceId::Hurwitz2kBlocks { k: 2, odd: false }).unwrap();
    let r = sample_region(&inst.system, &inst.subspace, &inst.default_box, &[40, 30]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (csv, json, svg) = (dir.path().join("r.csv"), dir.path().join("r.json"), dir.path().join("r.svg"));
    r.write_csv(&csv).unwrap();
    r.write_json(&json).unwrap();
    r.write_svg(&svg, &[1.0]).unwrap();
    assert!(RegionReport::read_csv(&csv).unwrap().approx_eq(&r, 1e-12));
    assert_eq!(RegionReport::read_json(&json).unwrap(), r);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("components: 4"));
    assert!(r.count(StabilityClass::Marginal) > 0);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn shift_paths_are_stabilizing(
        entries in prop::collection::vec(-2.0f64..2.0, 9),
        d1 in prop::collection::vec(0.2f64..3.0, 3),
        d2 in prop::collection::vec(0.2f64..3.0, 3),
        u1 in prop::collection::vec(-6.0f64..6.0, 3),
        u2 in prop::collection::vec(-6.0f64..6.0, 3),
    ) {
        let a = RealMatrix::new(3, 3, entries).unwrap();
        let sys = LtiSystem::state_feedback(a.clone(), RealMatrix::identity(3), Domain::Continuous).unwrap();
        // Closed loops are triangular with negative diagonals.
        let closed = |d: &[f64], u: &[f64], lower: bool| {
            RealMatrix::from_fn(3, 3, |i, j| match (i == j, lower && i > j, !lower && i < j) {
                (true, _, _) => -d[i],
                (_, true, _) | (_, _, true) => u[i + j - 1],
                _ => 0.0,
            })
        };
        let k1 = &a - &closed(&d1, &u1, false);
        let k2 = &a - &closed(&d2, &u2, true);
        let path = connect_shift_path(&sys, &k1, &k2, &GainSubspace::full(3, 3)).unwrap();
        for g in path.gains() {
            prop_assert!(state_margin(&sys, g).unwrap() < 0.0);
        }
    }

    #[test]
    fn discrete_paths_are_stabilizing(
        entries in prop::collection::vec(-3.0f64..3.0, 4),
        p1 in prop::collection::vec(-0.3f64..0.3, 4),
        p2 in prop::collection::vec(-0.3f64..0.3, 4),
    ) {
        let a = RealMatrix::new(2, 2, entries).unwrap();
        let sys = LtiSystem::state_feedback(a.clone(), RealMatrix::identity(2), Domain::Discrete).unwrap();
        let k1 = &a - &RealMatrix::new(2, 2, p1).unwrap();
        let k2 = &a - &RealMatrix::new(2, 2, p2).unwrap();
        let path = connect_convex_path_discrete(&sys, &k1, &k2, &GainSubspace::full(2, 2)).unwrap();
        for g in path.gains() {
            prop_assert!(state_margin(&sys, g).unwrap() < 0.0);
        }
    }
}
