mod common;

use nhatlas::ratcore::{
    limit_eval, Arity, Dir, Direction, Expr, Ext, Interval, LimitValue, OpenIntervalSet, SetOp, Tier,
};
use nhatlas::{rat, Rat, RatPiece, RatSet, Scalar};
use proptest::prelude::*;

fn interval() -> impl Strategy<Value = Interval<Rat>> {
    (common::small_rat(), common::small_rat(), 0u8..8).prop_filter_map("empty", |(a, b, inf)| {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let lo = if inf == 0 { Ext::NegInf } else { Ext::Fin(lo) };
        let hi = if inf == 1 { Ext::PosInf } else { Ext::Fin(hi) };
        Interval::new(lo, hi)
    })
}

fn iset() -> impl Strategy<Value = RatSet> {
    prop::collection::vec(interval(), 0..5).prop_map(OpenIntervalSet::from_intervals)
}

fn bounded() -> impl Strategy<Value = Interval<Rat>> {
    (common::small_rat(), common::small_rat()).prop_filter_map("empty", |(a, b)| Interval::fin(a.clone().min(b.clone()), a.max(b)))
}

/// 10³ probes: every endpoint, midpoints between them, and a fixed grid.
fn probes(sets: &[&RatSet]) -> Vec<Rat> {
    let mut pts: Vec<Rat> = sets.iter().flat_map(|s| s.endpoints()).collect();
    pts.sort();
    pts.dedup();
    let mids: Vec<Rat> = pts.windows(2).map(|w| (&w[0] + &w[1]) / rat(2, 1)).collect();
    pts.extend(mids);
    let mut k = 0i64;
    while pts.len() < 1000 {
        pts.push(rat(7 * k - 3000, 59));
        k += 1;
    }
    pts
}

fn is_endpoint(x: &Rat, sets: &[&RatSet]) -> bool {
    sets.iter().any(|s| s.endpoints().contains(x))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn union_and_intersection_associate(a in iset(), b in iset(), c in iset()) {
        prop_assert_eq!(a.union(&b).union(&c), a.union(&b.union(&c)));
        prop_assert_eq!(a.intersect(&b).intersect(&c), a.intersect(&b.intersect(&c)));
    }

    #[test]
    fn distributive_laws(a in iset(), b in iset(), c in iset()) {
        prop_assert_eq!(a.intersect(&b.union(&c)), a.intersect(&b).union(&a.intersect(&c)));
        prop_assert_eq!(a.union(&b.intersect(&c)), a.union(&b).intersect(&a.union(&c)));
    }

    #[test]
    fn de_morgan_within_a_bound(a in iset(), c in iset(), bound in bounded()) {
        let b = OpenIntervalSet::single(bound);
        prop_assert_eq!(b.diff(&a.union(&c)), b.diff(&a).intersect(&b.diff(&c)));
        // The dual law holds off the endpoints; open interiors drop shared boundary points.
        let lhs = b.diff(&a.intersect(&c));
        let rhs = b.diff(&a).union(&b.diff(&c));
        prop_assert!(rhs.is_subset(&lhs));
        let all = [&a, &c, &b];
        for x in probes(&all) {
            if !is_endpoint(&x, &all) {
                prop_assert_eq!(lhs.contains(&x), rhs.contains(&x), "at {}", x);
            }
        }
    }

    #[test]
    fn combine_matches_pointwise_logic(a in iset(), b in iset()) {
        let i = a.combine(SetOp::Intersect, &b);
        let u = a.combine(SetOp::Union, &b);
        let d = a.combine(SetOp::Diff, &b);
        let all = [&a, &b];
        for x in probes(&all) {
            let (ina, inb) = (a.contains(&x), b.contains(&x));
            prop_assert_eq!(i.contains(&x), ina && inb);
            prop_assert_eq!(u.contains(&x), ina || inb);
            if is_endpoint(&x, &all) {
                prop_assert!(!d.contains(&x) || (ina && !b.endpoints().contains(&x)));
            } else {
                prop_assert_eq!(d.contains(&x), ina && !inb);
            }
        }
    }

    #[test]
    fn forward_then_inverse_is_identity(
        dom in bounded(),
        slope in common::small_rat().prop_filter("zero slope", |s| *s != rat(0, 1)),
        offset in common::small_rat(),
        s in iset(),
    ) {
        let p = RatPiece::new(dom.clone(), slope, offset).unwrap();
        let inside = s.intersect_interval(&dom);
        prop_assert_eq!(p.apply_set(Dir::Inv, &p.apply_set(Dir::Fwd, &inside)), inside);
    }
}

fn disjoint(mut ivs: Vec<Interval<Rat>>) -> Result<(), String> {
    ivs.sort_by(|a, b| a.lo.cmp(&b.lo));
    for w in ivs.windows(2) {
        if w[0].hi > w[1].lo {
            return Err(format!("{:?} and {:?} overlap", w[0], w[1]));
        }
    }
    Ok(())
}

#[test]
fn cascade_pieces_are_disjoint_to_the_horizon() {
    for (name, s) in common::systems() {
        for t in s.transitions() {
            let mut doms: Vec<Interval<Rat>> = t.pieces.iter().map(|p| p.dom.clone()).collect();
            let mut imgs: Vec<Interval<Rat>> = t.pieces.iter().map(|p| p.img()).collect();
            for c in &t.cascades {
                for (_, p) in c.materialize(64).unwrap() {
                    doms.push(p.dom.clone());
                    imgs.push(p.img());
                }
            }
            let r = disjoint(doms).and(disjoint(imgs));
            assert!(r.is_ok(), "{name} {}→{}: {:?}", t.from, t.to, r);
        }
    }
}

/// `f(2^20)` lies no farther from `lim` than `f(2^10)` and is close to it.
fn enveloped(lim: &Ext<Rat>, a: f64, b: f64) -> bool {
    match lim {
        Ext::Fin(l) => {
            let l = l.to_f64();
            (b - l).abs() <= (a - l).abs() + 1e-12 && (b - l).abs() < 1e-2
        }
        Ext::PosInf => b >= a && b > 1e2,
        Ext::NegInf => b <= a && b < -1e2,
    }
}

#[test]
fn limits_agree_with_sampling() {
    let (lo, hi) = (f64::from(1u32 << 10), f64::from(1u32 << 20));
    let mut checked = 0;
    for (name, s) in common::systems() {
        for t in s.transitions() {
            for c in &t.cascades {
                let sp = c.spec();
                if matches!(sp.tier, Tier::Declared(_)) {
                    continue;
                }
                let exprs: [&Expr<Rat>; 4] = [&sp.dom.0, &sp.dom.1, &sp.img.0, &sp.img.1];
                for e in exprs {
                    match sp.arity {
                        Arity::One => {
                            let LimitValue::Ext(l) = limit_eval(e, Direction::N).unwrap().value else {
                                panic!("{name}: {e}")
                            };
                            assert!(enveloped(&l, e.eval_f64(lo, 0.0), e.eval_f64(hi, 0.0)), "{name}: {e} → {l}");
                        }
                        Arity::Two => {
                            let v = limit_eval(e, Direction::M).unwrap().value;
                            for n in sp.start.0..sp.start.0 + 4 {
                                let l = v.at(n).unwrap_or_else(|| panic!("{name}: {e} at {n}"));
                                let nf = n as f64;
                                assert!(
                                    enveloped(&l, e.eval_f64(nf, lo), e.eval_f64(nf, hi)),
                                    "{name}: {e} at n = {n} → {l}"
                                );
                            }
                        }
                    }
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 0);
}
