mod common;

use nhatlas::atlas::{basic_nbhd, AtlasError};
use nhatlas::{rat, Point, Rat};
use proptest::prelude::*;

/// `None` where declared data beyond its horizon leaves the point unresolved.
fn reps(s: &nhatlas::System, p: &Point) -> Option<Vec<Point>> {
    match s.representatives(p) {
        Ok(r) => Some(r.reps),
        Err(AtlasError::Unresolved(_)) => None,
        Err(e) => panic!("{p}: {e}"),
    }
}

fn rep(s: &nhatlas::System, p: &Point, k: usize) -> Option<Point> {
    let r = reps(s, p)?;
    Some(r[k % r.len()].clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn points_equal_is_an_equivalence(
        pick in 0usize..64, chart in 0usize..16, t in common::unit(),
        k1 in 0usize..8, k2 in 0usize..8, jump in any::<bool>(), t2 in common::unit(),
    ) {
        for (name, s, feats) in common::pool() {
            let p = common::point(s, feats, pick, chart, &t);
            let Some(q) = rep(s, &p, k1) else { continue };
            let r = if jump { common::point(s, feats, pick + 1, chart + 1, &t2) } else { rep(s, &q, k2).unwrap() };
            let eq = |a: &Point, b: &Point| s.points_equal(a, b).unwrap();
            prop_assert!(eq(&p, &p), "{name}: {p}");
            prop_assert!(eq(&p, &q), "{name}: {p} {q}");
            prop_assert_eq!(eq(&p, &r), eq(&r, &p), "{}: {} {}", name, p, r);
            if eq(&p, &q) && eq(&q, &r) {
                prop_assert!(eq(&p, &r), "{name}: {p} {q} {r}");
            }
        }
    }

    #[test]
    fn representatives_is_a_closure(pick in 0usize..64, chart in 0usize..16, t in common::unit()) {
        for (name, s, feats) in common::pool() {
            let p = common::point(s, feats, pick, chart, &t);
            let Some(r) = reps(s, &p) else { continue };
            for q in &r {
                prop_assert_eq!(&reps(s, q).unwrap(), &r, "{}", name);
            }
        }
    }

    #[test]
    fn basic_nbhd_is_monotone(
        sys in 0usize..64, pick in 0usize..64, chart in 0usize..16, t in common::unit(),
        a in 1u32..12, gap in 1u32..6,
    ) {
        let (name, s, feats) = &common::pool()[sys % common::pool().len()];
        let p = common::point(s, feats, pick, chart, &t);
        let big: Rat = rat(1, 1 << a);
        let small: Rat = rat(1, 1 << (a + gap));
        let nb = basic_nbhd(s, &p, &big).unwrap();
        let ns = basic_nbhd(s, &p, &small).unwrap();
        prop_assert!(ns.is_subset(s, &nb).unwrap(), "{name}: {p} at 2^-{a} vs 2^-{}", a + gap);
        prop_assert!(ns.contains(s, &p).unwrap());
    }
}
