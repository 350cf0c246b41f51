use nhatlas_flow::{
    accumulation_estimate, h_map, h_map_check, nh_predict, planar_demo, psi, w_intersection_sample, AccParams, AccShape,
    Demo, DemoPoint, FloorPoint, FlowError, FlowSpec, Recipe, SampledVerdict, WOutcome, WSpec,
};

fn params(k: usize) -> AccParams<f64> {
    AccParams::with_samples(k)
}

#[test]
fn zero_floor_psi_is_the_identity() {
    let r = Recipe::circle_recip();
    for (x, t) in [(0.25, 0.5), (0.9, -3.0), (0.0, 1e-3)] {
        assert_eq!(psi(&r, 0.0, &[0], &[x], t).unwrap(), (vec![x], t));
    }
}

#[test]
fn psi_by_hand() {
    // 0 + 1/(1/2) = 2 ≡ 0 on the circle.
    let (y, t) = psi(&Recipe::<f64>::circle_recip(), 0.0, &[1], &[0.0], 0.5).unwrap();
    assert_eq!(t, 0.5);
    assert!(y[0].abs() < 1e-12 || (1.0 - y[0]).abs() < 1e-12, "{y:?}");
    let (y, _) = psi(&Recipe::sines(), 0.0, &[2], &[1.0], 2.0 / std::f64::consts::PI).unwrap();
    assert!((y[0] - 3.0).abs() < 1e-12);
}

#[test]
fn psi_rejects_the_singular_time() {
    assert_eq!(psi(&Recipe::circle_recip(), 0.3, &[1], &[0.0], 0.3), Err(FlowError::SingularTime));
    assert!(matches!(psi(&Recipe::sines3(), 0.0, &[1], &[0.0], 1.0), Err(FlowError::SigmaLength { .. })));
}

#[test]
fn recipe_needs_functions_and_independent_slopes() {
    assert_eq!(Recipe::new("none", vec![], FlowSpec::<f64>::line()), Err(FlowError::EmptyG));
    assert!(matches!(FlowSpec::torus(vec![1.0, 0.5]), Err(FlowError::ResonantSlopes(0, 1))));
    assert!(matches!(FlowSpec::torus(vec![0.3, 0.7, 0.3 * 2f64.sqrt()]), Err(FlowError::ResonantSlopes(0, 1))));
    assert!(FlowSpec::torus(vec![1.0, 2f64.sqrt()]).is_ok());
}

#[test]
fn circle_orbit_fills_every_bin() {
    let e = accumulation_estimate(&Recipe::circle_recip(), &[0.3], &[1], &params(1_000_000)).unwrap();
    assert_eq!(e.shape, AccShape::Full);
    assert_eq!((e.coverage.occupied, e.coverage.total), (256, 256));
}

#[test]
fn sine_floor_fills_the_interval() {
    for n in [1i64, 2, -2] {
        let x = 0.75;
        let e = accumulation_estimate(&Recipe::sines(), &[x], &[n], &params(1_000_000)).unwrap();
        let AccShape::Interval { lo, hi } = e.shape else { panic!("n = {n}: {:?}", e.shape) };
        let m = n.abs() as f64;
        assert!((lo - (x - m)).abs() < 1e-3 && (hi - (x + m)).abs() < 1e-3, "n = {n}: [{lo}, {hi}]");
    }
}

#[test]
fn zero_floor_is_a_singleton() {
    for (r, s) in [(Recipe::circle_recip(), vec![0]), (Recipe::sines3(), vec![0, 0, 0]), (Recipe::sines3(), vec![0, 0, 5])] {
        let e = accumulation_estimate(&r, &[0.4], &s, &params(1000)).unwrap();
        assert_eq!(e.shape, AccShape::Singleton, "{} {s:?}", r.name);
        assert_eq!(e.contains(&[0.4]), Some(true));
        assert_eq!(e.contains(&[0.5]), Some(false));
    }
}

#[test]
fn too_few_samples_is_an_error() {
    assert!(matches!(accumulation_estimate(&Recipe::sines(), &[0.0], &[1], &params(999)), Err(FlowError::BadParams(_))));
}

#[test]
fn predicted_slices() {
    let p = nh_predict(&Recipe::sines(), &[0.0], 1.0, &[2], &[0], &params(200_000)).unwrap();
    let AccShape::Interval { lo, hi } = p.estimate.unwrap().shape else { panic!() };
    assert!((lo + 2.0).abs() < 1e-3 && (hi - 2.0).abs() < 1e-3);

    let p = nh_predict(&Recipe::sines2(), &[0.0], 1.0, &[1], &[0], &params(200_000)).unwrap();
    assert!(matches!(p.estimate.unwrap().shape, AccShape::UnboundedWindowCoverage { .. }));

    let same = nh_predict(&Recipe::sines(), &[0.0], 1.0, &[3], &[3], &params(1000)).unwrap();
    assert!(same.estimate.is_none());
}

#[test]
fn sines3_mixes_lines_intervals_and_points() {
    let r = Recipe::sines3();
    let label = |d: [i64; 3]| accumulation_estimate(&r, &[0.0], &d, &params(200_000)).unwrap().shape.label();
    for d in [[1, 0, 0], [-3, 0, 2], [2, 0, -1]] {
        assert_eq!(label(d), "interval", "{d:?}");
    }
    for d in [[0, 1, 0], [4, -1, 3], [0, 2, 0]] {
        assert_eq!(label(d), "unboundedWindowCoverage", "{d:?}");
    }
    for d in [[0, 0, 1], [0, 0, -7]] {
        assert_eq!(label(d), "singleton", "{d:?}");
    }
}

#[test]
fn torus_slices_are_tori_arcs_and_points() {
    let r = Recipe::torus_mixed(2).unwrap();
    let shape = |d: [i64; 3]| accumulation_estimate(&r, &[0.1, 0.2], &d, &params(200_000)).unwrap().shape;
    assert_eq!(shape([1, 0, 0]), AccShape::Full);
    assert_eq!(shape([0, 1, 0]), AccShape::Partial);
    assert_eq!(shape([0, 0, 3]), AccShape::Singleton);
}

#[test]
fn coverage_is_recomputable_from_the_cloud() {
    let mut p = params(20_000);
    p.keep_cloud = true;
    for (r, s) in [(Recipe::circle_recip(), vec![1]), (Recipe::sines(), vec![2]), (Recipe::sines2(), vec![1])] {
        let e = accumulation_estimate(&r, &[0.5], &s, &p).unwrap();
        assert_eq!(e.cloud.as_ref().unwrap().len(), 40_000);
        let (c, w) = e.recompute_coverage().unwrap();
        assert_eq!(c, e.coverage, "{}", r.name);
        assert_eq!(w, e.window, "{}", r.name);
    }
}

fn w(center: f64, radius: f64, t: f64, eps: f64, sigma: i64) -> WSpec<f64> {
    WSpec { center: vec![center], radius, t, eps, sigma: vec![sigma] }
}

#[test]
fn same_time_different_floors_meet_on_the_circle() {
    let r = Recipe::circle_recip();
    for (ca, cb, rad, eps, sa, sb) in [(0.1, 0.7, 0.01, 0.5, 1, 0), (0.0, 0.5, 1e-3, 1e-2, 2, -1), (0.3, 0.31, 0.05, 1.0, 0, 3)] {
        let out = w_intersection_sample(&r, &w(ca, rad, 2.0, eps, sa), &w(cb, rad, 2.0, eps, sb), 20_000, 7).unwrap();
        let WOutcome::Witness { residuals, point, .. } = out else { panic!("{ca} {cb}: {out:?}") };
        assert!(residuals.iter().all(|&e| e < 1e-9));
        assert_eq!(point.floor, vec![0]);
    }
}

#[test]
fn distant_times_never_meet() {
    let r = Recipe::circle_recip();
    let out = w_intersection_sample(&r, &w(0.1, 0.4, 0.0, 0.2, 1), &w(0.1, 0.4, 1.0, 0.2, 2), 1000, 1).unwrap();
    assert_eq!(out, WOutcome::Empty { exhausted: false, tries: 0 });
}

#[test]
fn identical_specs_meet_at_once() {
    let r = Recipe::sines3();
    let a = WSpec { center: vec![1.5], radius: 0.1, t: -2.0, eps: 0.3, sigma: vec![1, -1, 4] };
    let WOutcome::Witness { tries, point, .. } = w_intersection_sample(&r, &a, &a, 10, 3).unwrap() else { panic!() };
    assert_eq!(tries, 0);
    assert_eq!(point.floor, a.sigma);
}

#[test]
fn h_with_zero_shift_is_exactly_the_identity() {
    for r in [Recipe::circle_recip(), Recipe::sines(), Recipe::torus_recip(2).unwrap()] {
        let k = r.g().len();
        let rep = h_map_check(&r, 0.5, &vec![0; k], 2000, 11).unwrap();
        assert!(rep.identity_exact && rep.roundtrip_max == 0.0, "{}", r.name);
    }
}

#[test]
fn circle_h_round_trips() {
    let rep = h_map_check(&Recipe::circle_recip(), 0.25, &[1], 10_000, 5).unwrap();
    assert!(rep.ok(1e-9), "{rep:?}");
    assert!(!rep.identity_exact);
}

#[test]
fn h_shifts_floors_on_the_slice() {
    let r = Recipe::sines3();
    let p = FloorPoint { x: vec![2.0], t: 1.0, floor: vec![1, 0, -2] };
    assert_eq!(h_map(&r, 1.0, &[3, 1, 1], &p).unwrap().floor, vec![4, 1, -1]);
    let off = h_map(&r, 0.0, &[3, 1, 1], &p).unwrap();
    assert_eq!(off.floor, p.floor);
    assert!((off.x[0] - (2.0 + 3.0 * 1f64.sin() + 1f64.sin())).abs() < 1e-12);
    for r in [Recipe::sines(), Recipe::sines2(), Recipe::torus_mixed(3).unwrap()] {
        let k = r.g().len();
        let rep = h_map_check(&r, -1.0, &vec![2; k], 5000, 9).unwrap();
        assert!(rep.ok(1e-9), "{}: {rep:?}", r.name);
    }
}

#[test]
fn sphere_boundary_demo() {
    let d = Demo::SphereBoundary;
    let v = |x: f64, y: f64| planar_demo(&d, DemoPoint::ZeroStar, DemoPoint::at(0, x, y)).unwrap();
    assert_eq!(v(1.0, 0.0).label(), "NotSeparated");
    assert_eq!(v(0.6, -0.8).label(), "NotSeparated");
    assert_eq!(v(0.0, 0.0), SampledVerdict::Separated { radius: 1.0 });
    assert_eq!(v(2.0, 0.0), SampledVerdict::Separated { radius: 0.5 });
    assert_eq!(v(1.001, 0.0).label(), "Separated");
    assert_eq!(planar_demo(&d, DemoPoint::ZeroStar, DemoPoint::ZeroStar), Some(SampledVerdict::Equal));
    assert_eq!(planar_demo(&d, DemoPoint::at(0, 1.0, 0.0), DemoPoint::at(0, -1.0, 0.0)).unwrap().label(), "Separated");
}

#[test]
fn prufer_demo() {
    let d = Demo::Prufer { c: 0.0 };
    let p = DemoPoint::at(0, 0.0, 0.0);
    for y in [5.0, 0.0, -3.0, 0.25] {
        let v = planar_demo(&d, p, DemoPoint::at(1, 0.0, y)).unwrap();
        assert!(matches!(v, SampledVerdict::NotSeparated { down_to } if down_to <= 1e-6), "y = {y}: {v:?}");
    }
    // (−1, 3) ∈ H₁ is glued to φ(−1, 3) = (−1, −3) ∈ H₀, not to p.
    assert_eq!(planar_demo(&d, p, DemoPoint::at(1, -1.0, 3.0)).unwrap().label(), "Separated");
    assert_eq!(planar_demo(&d, DemoPoint::at(0, -1.0, -3.0), DemoPoint::at(1, -1.0, 3.0)), Some(SampledVerdict::Equal));
    // Off the axis, or on the axis of the same chart, points separate.
    assert_eq!(planar_demo(&d, p, DemoPoint::at(1, 0.5, 5.0)).unwrap().label(), "Separated");
    assert_eq!(planar_demo(&d, p, DemoPoint::at(0, 0.0, 5.0)).unwrap().label(), "Separated");
    assert_eq!(planar_demo(&d, DemoPoint::at(1, 0.0, 1.0), DemoPoint::at(1, 0.0, 2.0)).unwrap().label(), "Separated");
    assert_eq!(planar_demo(&d, DemoPoint::ZeroStar, p), None);
}
