use volmorph_core::linalg::Mat;
use volmorph_core::npc::*;
use volmorph_core::*;

fn diag(d: &[f64]) -> SpdMatrix {
    SpdMatrix::new(&Mat::diag(d)).unwrap()
}

#[test]
fn every_suite_passes_on_matrices() {
    for n in [2, 3] {
        let s = MatrixSpace { n };
        for r in [
            npc_inequality_check(&s, 500, 1).unwrap(),
            equiconvexity_check(&s, 500, 2).unwrap(),
            mean_equiconvexity_check(&s, 200, 3).unwrap(),
            minimizer_stability_check(&s, 60, 4).unwrap(),
            projection_continuity_check(&s, 60, 5).unwrap(),
            hull_diameter_check(&s, 30, 6).unwrap(),
        ] {
            assert!(r.passed, "{r:?}");
            assert!(r.witnesses.len() <= MAX_WITNESSES);
        }
    }
}

#[test]
fn every_suite_passes_on_a_field_grid() {
    let x = FieldSpace::uniform(&[4, 4], 3).unwrap();
    for r in [
        npc_inequality_check(&x, 100, 1).unwrap(),
        equiconvexity_check(&x, 100, 2).unwrap(),
        mean_equiconvexity_check(&x, 40, 3).unwrap(),
        minimizer_stability_check(&x, 12, 4).unwrap(),
        projection_continuity_check(&x, 12, 5).unwrap(),
        hull_diameter_check(&x, 6, 6).unwrap(),
    ] {
        assert!(r.passed, "{r:?}");
    }
}

#[test]
fn witnesses_replay_exactly() {
    let x = FieldSpace::uniform(&[3, 3], 2).unwrap();
    let r = projection_continuity_check(&x, 9, 40).unwrap();
    for w in &r.witnesses {
        assert_eq!(replay(&x, r.property, w).unwrap(), w.violation);
    }
    let s = MatrixSpace { n: 2 };
    let r = minimizer_stability_check(&s, 12, 40).unwrap();
    for w in &r.witnesses {
        assert_eq!(replay(&s, r.property, w).unwrap(), w.violation);
    }
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let s = MatrixSpace { n: 3 };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| equiconvexity_check(&s, 300, 9).unwrap())
    };
    let a = run(1);
    let b = run(4);
    assert_eq!(a.witnesses, b.witnesses);
    assert_eq!(a.max_violation.to_bits(), b.max_violation.to_bits());
}

#[test]
fn equiconvexity_is_sharp_on_commuting_matrices() {
    let s = MatrixSpace { n: 3 };
    let sets = [
        (
            [1.5, 0.5, 4.0 / 3.0],
            [0.2, 2.0, 2.5],
            [3.0, 0.25, 4.0 / 3.0],
        ),
        ([8.0, 0.5, 0.25], [1.0, 1.0, 1.0], [0.1, 0.1, 100.0]),
    ];
    for (p, a, b) in sets {
        let (p, a, b) = (diag(&p), diag(&a), diag(&b));
        let v = midpoint_violation(&s, &a, &b, |x| s.dist_sq(x, &p)).unwrap();
        assert!(v.abs() <= 1e-12, "{v}");
        let v = npc_violation(&s, &p, &a, &b, 0.37).unwrap();
        assert!(v.abs() <= 1e-12, "{v}");
    }
}

#[test]
fn projection_of_points_on_the_segment_is_exact() {
    let s = MatrixSpace { n: 2 };
    let a = diag(&[4.0, 0.25]);
    let b = diag(&[0.5, 2.0]);
    let p = geodesic(&a, &b, 0.2).unwrap();
    let q = geodesic(&a, &b, 0.2 + 1e-4).unwrap();
    let tp = s.project(&p, &a, &b).unwrap();
    let tq = s.project(&q, &a, &b).unwrap();
    let d = dist(
        &geodesic(&a, &b, tp).unwrap(),
        &geodesic(&a, &b, tq).unwrap(),
    );
    assert!((d - dist(&p, &q)).abs() <= 1e-7);
}

#[test]
fn report_serializes() {
    let r = npc_inequality_check(&MatrixSpace { n: 2 }, 10, 1).unwrap();
    assert_eq!(r.trials, 10);
    assert_eq!(r.property.name(), "npc-inequality");
}
