use std::f64::consts::{PI, TAU};

use kinecx::cohomology::{cx_lower_bound, induced_product_hom, nilpotency, nilpotency_of_span, CohomologyModel, KernelIdeal};
use kinecx::lifting::{lift, LiftOptions, WorkPath};
use kinecx::manifold::{rotation_log, shortest_diff, torus_distance, work_distance};
use kinecx::mechanisms::{inverse, BranchTag, DhRow};
use kinecx::roadmaps::{straight_line_contraction, universal_flip_deformation, wrist_flip_deformation, Deformation};
use kinecx::singularity::{is_regular_value, rank_at, singular_locus};
use kinecx::verification::{run_suite, HarnessConfig, Suite};
use kinecx::{forward, jacobian, JointAngles, Mechanism, MotionPath, Query, WorkPoint};
use nalgebra::{DMatrix, Vector3};
use proptest::prelude::*;

fn ja(v: Vec<f64>) -> JointAngles {
    JointAngles::new(v).unwrap()
}

fn angles(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..TAU, n)
}

fn puma() -> Mechanism {
    let rows: [[f64; 4]; 6] = [
        [0.0, PI / 2.0, 0.0, 0.0],
        [0.4318, 0.0, 0.0, 0.0],
        [0.0203, -PI / 2.0, 0.15005, 0.0],
        [0.0, PI / 2.0, 0.4318, 0.0],
        [0.0, -PI / 2.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0],
    ];
    Mechanism::serial_6dof(rows.iter().map(|r| DhRow::from(*r)).collect()).unwrap()
}

fn mechanisms() -> Vec<Mechanism> {
    vec![
        Mechanism::single_revolute(1).unwrap(),
        Mechanism::single_revolute(3).unwrap(),
        Mechanism::planar_arm(vec![2.0, 1.0]).unwrap(),
        Mechanism::planar_arm(vec![4.0, 1.0, 1.0, 0.5]).unwrap(),
        Mechanism::universal(2.5).unwrap(),
        Mechanism::TripleRollWrist,
        Mechanism::torus_identity(3).unwrap(),
        puma(),
    ]
}

/// Workspace tangent of `to` relative to `from`, in the Jacobian's row
/// coordinates; written out here rather than borrowed from the library.
fn tangent(mech: &Mechanism, from: &WorkPoint, to: &WorkPoint) -> Vec<f64> {
    match (from, to) {
        (WorkPoint::Circle(a), WorkPoint::Circle(b)) => vec![shortest_diff(*a, *b)],
        (WorkPoint::Torus(a), WorkPoint::Torus(b)) => {
            a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| shortest_diff(*x, *y)).collect()
        }
        (WorkPoint::Planar { x: x0, y: y0 }, WorkPoint::Planar { x, y }) => vec![x - x0, y - y0],
        (WorkPoint::Sphere(a), WorkPoint::Sphere(b)) => {
            let Mechanism::Universal { radius } = mech else { unreachable!() };
            ((b - a) * *radius).iter().copied().collect()
        }
        (WorkPoint::Rotation(a), WorkPoint::Rotation(b)) => rotation_log(&(a.transpose() * b)).iter().copied().collect(),
        (WorkPoint::Pose { p: p0, r: r0 }, WorkPoint::Pose { p, r }) => {
            (p - p0).iter().copied().chain(rotation_log(&(r0.transpose() * r)).iter().copied()).collect()
        }
        _ => panic!("mismatched workspace points"),
    }
}

fn central_difference(mech: &Mechanism, c: &[f64], h: f64) -> DMatrix<f64> {
    let base = forward(mech, &ja(c.to_vec())).unwrap();
    let cols: Vec<Vec<f64>> = (0..c.len())
        .map(|i| {
            let shifted = |s: f64| {
                let mut v = c.to_vec();
                v[i] = (v[i] + s).rem_euclid(TAU);
                forward(mech, &ja(v)).unwrap()
            };
            let plus = tangent(mech, &base, &shifted(h));
            let minus = tangent(mech, &base, &shifted(-h));
            plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)).collect()
        })
        .collect();
    DMatrix::from_fn(cols[0].len(), cols.len(), |r, k| cols[k][r])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn torus_metric_axioms(a in angles(3), b in angles(3), c in angles(3)) {
        let (a, b, c) = (ja(a), ja(b), ja(c));
        let ab = torus_distance(&a, &b).unwrap();
        prop_assert_eq!(ab, torus_distance(&b, &a).unwrap());
        prop_assert!(torus_distance(&a, &a).unwrap() < 1e-15);
        prop_assert!(ab <= PI + 1e-15);
        prop_assert!(ab <= torus_distance(&a, &c).unwrap() + torus_distance(&c, &b).unwrap() + 1e-12);
    }

    #[test]
    fn workspace_metric_axioms(a in angles(3), b in angles(3), c in angles(3)) {
        for mech in [Mechanism::universal(1.0).unwrap(), Mechanism::TripleRollWrist, Mechanism::planar_arm(vec![2.0, 1.0]).unwrap(), puma()] {
            let n = mech.config_dim();
            let pt = |v: &[f64]| {
                let v: Vec<f64> = v.iter().cycle().take(n).copied().collect();
                forward(&mech, &ja(v)).unwrap()
            };
            let (wa, wb, wc) = (pt(&a), pt(&b), pt(&c));
            let ab = work_distance(&wa, &wb).unwrap();
            prop_assert!((ab - work_distance(&wb, &wa).unwrap()).abs() < 1e-12);
            prop_assert!(work_distance(&wa, &wa).unwrap() < 1e-7);
            prop_assert!(ab <= work_distance(&wa, &wc).unwrap() + work_distance(&wc, &wb).unwrap() + 1e-9);
        }
    }

    #[test]
    fn path_concat_reverse_and_lipschitz(a in angles(2), b in angles(2), c in angles(2), t1 in 0.0..=1.0f64, t2 in 0.0..=1.0f64) {
        let p = MotionPath::from_samples(vec![(0.0, ja(a.clone())), (1.0, ja(b.clone()))]).unwrap();
        let q = MotionPath::from_samples(vec![(0.0, ja(b.clone())), (0.5, ja(c.clone())), (1.0, ja(a.clone()))]).unwrap();
        let pq = p.concat(&q).unwrap();
        prop_assert_eq!(pq.start(), p.start());
        prop_assert_eq!(pq.end(), q.end());
        let r = q.reverse();
        prop_assert_eq!(r.start(), q.end());
        prop_assert_eq!(r.end(), q.start());
        let l = pq.lipschitz_bound();
        let d = torus_distance(&pq.eval(t1).unwrap(), &pq.eval(t2).unwrap()).unwrap();
        prop_assert!(d <= l * (t1 - t2).abs() + 1e-12);
    }

    #[test]
    fn csv_round_trip(a in angles(3), b in angles(3)) {
        let p = MotionPath::from_samples(vec![(0.0, ja(a)), (1.0, ja(b))]).unwrap();
        let back = MotionPath::from_csv(&p.to_csv()).unwrap();
        prop_assert!(p.sup_distance(&back, 64).unwrap() < 1e-10);
    }

    #[test]
    fn inverse_round_trip(c in angles(4)) {
        let cases = [
            (Mechanism::single_revolute(1).unwrap(), BranchTag::Identity),
            (Mechanism::torus_identity(4).unwrap(), BranchTag::Identity),
            (Mechanism::planar_arm(vec![2.0, 1.0]).unwrap(), BranchTag::ElbowDown),
            (Mechanism::planar_arm(vec![4.0, 1.0, 1.0, 0.5]).unwrap(), BranchTag::ElbowDown),
            (Mechanism::universal(1.5).unwrap(), BranchTag::Latitude),
            (Mechanism::universal(1.5).unwrap(), BranchTag::LatitudeFlipped),
            (Mechanism::TripleRollWrist, BranchTag::EulerUpper),
            (Mechanism::TripleRollWrist, BranchTag::EulerLower),
        ];
        for (mech, tag) in cases {
            let w = forward(&mech, &ja(c[..mech.config_dim()].to_vec())).unwrap();
            // Targets too close to a branch's excluded poles are out of domain.
            if let Ok(back) = inverse(&mech, &w, tag) {
                let err = work_distance(&forward(&mech, &back).unwrap(), &w).unwrap();
                prop_assert!(err < 1e-9, "{} {:?}: {}", mech.name(), tag, err);
            }
        }
    }

    #[test]
    fn jacobian_matches_central_differences(c in angles(6)) {
        for mech in mechanisms() {
            let c = &c[..mech.config_dim()];
            let j = jacobian(&mech, &ja(c.to_vec())).unwrap().matrix;
            let fd = central_difference(&mech, c, 1e-6);
            prop_assert!((j - fd).amax() < 1e-5, "{}", mech.name());
        }
    }

    #[test]
    fn singular_locus_agrees_with_rank(c in angles(4), snap in 0usize..3) {
        for mech in mechanisms().into_iter().filter(|m| !matches!(m, Mechanism::Serial6Dof { .. })) {
            let n = mech.config_dim();
            let mut v = c[..n].to_vec();
            // Also land exactly on the locus sometimes.
            if snap > 0 && n > 1 {
                v[1] = if matches!(mech, Mechanism::Universal { .. }) { PI / 2.0 + PI * (snap - 1) as f64 } else { PI * (snap - 1) as f64 };
                for x in v.iter_mut().skip(2) {
                    *x = if snap == 1 { 0.0 } else { PI };
                }
            }
            let cfg = ja(v);
            let locus = singular_locus(&mech).unwrap();
            let d = locus.distance(&cfg);
            if d > 1e-6 || locus.contains(&cfg) {
                let report = rank_at(&mech, &cfg, 1e-8).unwrap();
                prop_assert_eq!(locus.contains(&cfg), !report.full_rank, "{} at {:?}", mech.name(), cfg);
                prop_assert!(report.margin >= 0.0);
            }
        }
    }

    #[test]
    fn regular_values_have_regular_preimages(c in angles(3)) {
        let cases = [
            (Mechanism::universal(1.0).unwrap(), vec![BranchTag::Latitude, BranchTag::LatitudeFlipped]),
            (Mechanism::TripleRollWrist, vec![BranchTag::EulerUpper, BranchTag::EulerLower]),
            (Mechanism::planar_arm(vec![2.0, 1.0]).unwrap(), vec![BranchTag::ElbowDown]),
        ];
        for (mech, tags) in cases {
            let w = forward(&mech, &ja(c[..mech.config_dim()].to_vec())).unwrap();
            if is_regular_value(&mech, &w).unwrap() {
                for tag in tags {
                    if let Ok(pre) = inverse(&mech, &w, tag) {
                        prop_assert!(rank_at(&mech, &pre, 1e-8).unwrap().full_rank);
                    }
                }
            }
        }
    }

    #[test]
    fn deformations_start_at_the_query(c in angles(3), t in 0.0..=1.0f64) {
        let wrist = Mechanism::TripleRollWrist;
        let uni = Mechanism::universal(1.0).unwrap();
        let cases: Vec<(Mechanism, Deformation)> = vec![
            (uni.clone(), universal_flip_deformation()),
            (wrist.clone(), wrist_flip_deformation()),
            (wrist.clone(), straight_line_contraction(&wrist, &ja(vec![1.0, 2.0, 3.0]), 2.0).unwrap()),
        ];
        for (mech, d) in cases {
            let cfg = ja(c[..mech.config_dim()].to_vec());
            let q = Query::new(cfg.clone(), forward(&mech, &cfg).unwrap());
            if !d.contains(&q) {
                continue;
            }
            prop_assert_eq!(d.map(&q, 0.0).unwrap(), q.clone());
            if d.horizontal {
                prop_assert_eq!(d.map(&q, t).unwrap().target, q.target.clone());
            }
        }
    }

    #[test]
    fn lifting_residual_contract(c in angles(3), dx in -0.3..0.3f64, dy in -0.3..0.3f64) {
        let mech = Mechanism::planar_arm(vec![1.0, 0.8, 0.5]).unwrap();
        let c0 = ja(vec![c[0], 0.4 + c[1] / TAU, 0.4 + c[2] / TAU]);
        let WorkPoint::Planar { x, y } = forward(&mech, &c0).unwrap() else { unreachable!() };
        let alpha = WorkPath::from_fn(16, |t| WorkPoint::Planar { x: x + dx * t, y: y + dy * t }).unwrap();
        let opts = LiftOptions::default();
        // Paths that run into the folded configuration fail loudly instead.
        if let Ok(path) = lift(&mech, &c0, &alpha, &opts) {
            prop_assert_eq!(path.start(), &c0);
            for (t, cfg) in path.samples() {
                let r = work_distance(&forward(&mech, cfg).unwrap(), &alpha.eval(t).unwrap()).unwrap();
                prop_assert!(r < 10.0 * opts.newton_tol, "residual {} at t={}", r, t);
            }
        }
    }

    #[test]
    fn kernel_images_vanish(bits in prop::collection::vec(0u8..2, 3)) {
        prop_assume!(bits.contains(&1));
        let model = CohomologyModel { config: "torus3".into(), work: "so3".into(), fstar_u: Some(bits), fstar: None };
        let hom = induced_product_hom(&model.fstar().unwrap()).unwrap();
        let kernel = KernelIdeal::of(&hom);
        for v in &kernel.basis {
            prop_assert!(hom.apply(v).is_zero());
        }
        let n = nilpotency(&hom, &kernel);
        // The sweep reaches zero by one past the top degree and shrinks after its peak.
        prop_assert!(n.nilpotency <= hom.source.top_degree() + 1);
        let peak = n.dims.iter().enumerate().max_by_key(|(_, d)| **d).unwrap().0;
        prop_assert!(n.dims[peak..].windows(2).all(|w| w[0] >= w[1]));
        prop_assert_eq!(n.nilpotency, cx_lower_bound(&model).unwrap().nilpotency);
        // Multiplying by ideal generators only must give the same powers as
        // multiplying by the whole kernel.
        prop_assert_eq!(&n.dims, &nilpotency_of_span(&hom.source, &kernel.basis).dims);
    }

    #[test]
    fn redundant_generators_do_not_change_nilpotency(i in 0usize..8, j in 0usize..8) {
        let model = CohomologyModel { config: "torus3".into(), work: "circle".into(), fstar_u: None, fstar: Some(kinecx::cohomology::FstarSpec::Named("identity".into())) };
        let hom = induced_product_hom(&model.fstar().unwrap()).unwrap();
        let kernel = KernelIdeal::of(&hom);
        let base = nilpotency(&hom, &kernel).nilpotency;
        let mut gens = kernel.basis.clone();
        let (a, b) = (&kernel.basis[i % gens.len()], &kernel.basis[j % gens.len()]);
        gens.push(hom.source.mul(a, b));
        let mut sum = a.clone();
        sum.xor_assign(b);
        gens.push(sum);
        prop_assert_eq!(nilpotency_of_span(&hom.source, &gens).nilpotency, base);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn harness_is_deterministic(seed in any::<u64>()) {
        let atlas = kinecx::roadmaps::universal_atlas(1.0).unwrap();
        let cfg = HarnessConfig { seed, samples: 300, ..Default::default() };
        for suite in [Suite::Endpoints, Suite::Coverage, Suite::Continuity] {
            let a = serde_json::to_string(&run_suite(&atlas, suite, &cfg).unwrap()).unwrap();
            let b = serde_json::to_string(&run_suite(&atlas, suite, &cfg).unwrap()).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}

#[test]
fn sphere_tangent_oracle_is_scaled() {
    // Sanity check on the oracle itself: moving along the equator by h at
    // radius r covers r·h.
    let mech = Mechanism::universal(2.0).unwrap();
    let a = WorkPoint::Sphere(Vector3::x());
    let h = 1e-6_f64;
    let b = WorkPoint::Sphere(Vector3::new(h.cos(), h.sin(), 0.0));
    let t = tangent(&mech, &a, &b);
    assert!((t[1] - 2.0 * h).abs() < 1e-15);
}
