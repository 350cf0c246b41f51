use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use nhatlas_flow::{
    accumulation_estimate, h_map, psi, w_intersection_sample, AccEstimate, AccParams, AccShape, FloorPoint, Recipe,
    WSpec,
};
use proptest::prelude::*;

fn recipes() -> &'static [Recipe<f64>] {
    static R: OnceLock<Vec<Recipe<f64>>> = OnceLock::new();
    R.get_or_init(|| {
        vec![
            Recipe::circle_recip(),
            Recipe::sines(),
            Recipe::sines2(),
            Recipe::sines3(),
            Recipe::torus_recip(2).unwrap(),
            Recipe::torus_mixed(3).unwrap(),
        ]
    })
}

fn sigma(k: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-3i64..=3, k)
}

/// A recipe, a point of its base and three floors.
fn setting() -> impl Strategy<Value = (usize, Vec<f64>, Vec<i64>, Vec<i64>, Vec<i64>)> {
    (0..recipes().len()).prop_flat_map(|i| {
        let r = &recipes()[i];
        let (d, k) = (r.flow().dim(), r.g().len());
        let coord = if r.flow().is_compact() { 0.0..1.0 } else { -10.0..10.0 };
        (Just(i), prop::collection::vec(coord, d), sigma(k), sigma(k), sigma(k))
    })
}

/// Times at least `10⁻²` from both singular times.
fn times() -> impl Strategy<Value = (f64, f64, f64)> {
    (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_filter("near a singular time", |(s, t, u)| (u - s).abs() >= 1e-2 && (u - t).abs() >= 1e-2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn psi_group_law_and_commutation((i, x, a, b, _) in setting(), (s, t, u) in times()) {
        let r = &recipes()[i];
        let fl = r.flow();
        let ab: Vec<i64> = a.iter().zip(&b).map(|(p, q)| p + q).collect();
        let (y, _) = psi(r, s, &b, &x, u).unwrap();
        let (y, _) = psi(r, s, &a, &y, u).unwrap();
        let (z, _) = psi(r, s, &ab, &x, u).unwrap();
        prop_assert!(fl.distance(&y, &z) < 1e-9, "{}: {:?} vs {:?}", r.name, y, z);

        let (p, _) = psi(r, t, &b, &x, u).unwrap();
        let (p, _) = psi(r, s, &a, &p, u).unwrap();
        let (q, _) = psi(r, s, &a, &x, u).unwrap();
        let (q, _) = psi(r, t, &b, &q, u).unwrap();
        prop_assert!(fl.distance(&p, &q) < 1e-9, "{}: {:?} vs {:?}", r.name, p, q);

        let zero = vec![0; a.len()];
        prop_assert_eq!(psi(r, s, &zero, &x, u).unwrap().0, fl.normalize(&x));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn h_inverts_and_shifts_floors((i, x, a, floor, _) in setting(), t in -2.0..2.0f64, off in prop::option::of(1e-3..1.0f64)) {
        let r = &recipes()[i];
        let neg: Vec<i64> = a.iter().map(|c| -c).collect();
        let s = off.map_or(t, |o| t + o);
        let p = FloorPoint { x: r.flow().normalize(&x), t: s, floor: floor.clone() };
        let q = h_map(r, t, &a, &p).unwrap();
        let back = h_map(r, t, &neg, &q).unwrap();
        prop_assert_eq!(&back.floor, &p.floor);
        prop_assert!(r.flow().distance(&back.x, &p.x) < 1e-9);
        let want: Vec<i64> = if off.is_none() { floor.iter().zip(&a).map(|(u, v)| u + v).collect() } else { floor };
        prop_assert_eq!(q.floor, want);
    }
}

const SINES: [usize; 3] = [1, 2, 3];

/// `A(0, d)` per recipe and floor difference, computed once.
fn estimate(recipe: usize, d: &[i64]) -> AccEstimate<f64> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, Vec<i64>), AccEstimate<f64>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(e) = cache.lock().unwrap().get(&(recipe, d.to_vec())) {
        return e.clone();
    }
    let e = accumulation_estimate(&recipes()[recipe], &[0.0], d, &AccParams::with_samples(50_000)).unwrap();
    cache.lock().unwrap().insert((recipe, d.to_vec()), e.clone());
    e
}

fn sine_setting() -> impl Strategy<Value = (usize, Vec<i64>, Vec<i64>)> {
    prop::sample::select(&SINES[..]).prop_flat_map(|i| {
        let k = recipes()[i].g().len();
        (Just(i), prop::collection::vec(-2i64..=2, k), prop::collection::vec(-2i64..=2, k))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn witnesses_exist_exactly_on_predicted_slices(
        (i, sigma, tau) in sine_setting(),
        x in -5.0..5.0f64,
        t in -1.0..1.0f64,
        spread in 0.0..1.2f64,
        exact in prop::bool::weighted(0.1),
    ) {
        prop_assume!(sigma != tau);
        let r = &recipes()[i];
        let d: Vec<i64> = sigma.iter().zip(&tau).map(|(a, b)| a - b).collect();
        let e = estimate(i, &d);
        // Queries reach a little past the predicted set on either side.
        let reach = match e.shape {
            AccShape::Interval { lo, hi } => hi.max(-lo),
            AccShape::UnboundedWindowCoverage { hi, .. } => hi,
            _ => 1.0,
        };
        let off = if exact { 0.0 } else { (2.0 * spread - 1.2) * reach };
        let Some(inside) = e.contains(&[off]) else { return Ok(()) };
        // Balls narrower than half a bin: a witness means the query is within
        // one bin of the set.
        let rho = 0.4 * e.bin_width();
        let a = WSpec { center: vec![x], radius: rho, t, eps: 0.5, sigma: sigma.clone() };
        let b = WSpec { center: vec![x + off], radius: rho, t, eps: 0.5, sigma: tau.clone() };
        let out = w_intersection_sample(r, &a, &b, 20_000, 17).unwrap();
        prop_assert_eq!(out.found(), inside, "{} σ={:?} τ={:?} query {} shape {:?}: {:?}", r.name, sigma, tau, off, e.shape, out);
    }
}

#[test]
fn torus_flow_equidistributes() {
    for d in [1, 2] {
        let r = Recipe::torus_recip(d).unwrap();
        let x = vec![0.37; d];
        let e = accumulation_estimate(&r, &x, &[1], &AccParams::with_samples(10_000_000)).unwrap();
        assert_eq!(e.coverage.total, if d == 1 { 256 } else { 1024 });
        assert_eq!(e.coverage.occupied, e.coverage.total, "d = {d}");
        assert_eq!(e.shape, AccShape::Full);
    }
}

#[test]
fn cloud_stays_on_the_base() {
    let mut p = AccParams::with_samples(5000);
    p.keep_cloud = true;
    for r in [Recipe::circle_recip(), Recipe::torus_mixed(2).unwrap()] {
        let k = r.g().len();
        let e = accumulation_estimate(&r, &vec![0.99; r.flow().dim()], &vec![1; k], &p).unwrap();
        assert!(e.cloud.unwrap().iter().flatten().all(|&v| (0.0..1.0).contains(&v)), "{}", r.name);
    }
}
