#![allow(dead_code)]

use nhatlas::catalog::{by_name, NAMES};
use nhatlas::ratcore::{Ext, Interval};
use nhatlas::{rat, Point, Rat, System};
use proptest::prelude::*;

/// Every catalog system with its name.
pub fn systems() -> Vec<(&'static str, System)> {
    NAMES.iter().map(|n| (*n, by_name::<Rat>(n).unwrap().system)).collect()
}

/// Maps `t ∈ (0, 1)` into the open interval `iv`.
pub fn inside(iv: &Interval<Rat>, t: &Rat) -> Rat {
    let one = rat(1, 1);
    match (&iv.lo, &iv.hi) {
        (Ext::Fin(a), Ext::Fin(b)) => a + (b - a) * t,
        (Ext::Fin(a), _) => a + t / (&one - t),
        (_, Ext::Fin(b)) => b - t / (&one - t),
        _ => (t - rat(1, 2)) * rat(16, 1),
    }
}

/// Points worth testing in `s`: breakpoints, their images, and 0 and 1 where present.
pub fn features(s: &System) -> Vec<Point> {
    let mut v: Vec<Point> = Vec::new();
    let mut push = |c: usize, x: &Rat| {
        let p = Point::new(c, x.clone());
        if s.check_point(&p).is_ok() && !v.contains(&p) {
            v.push(p);
        }
    };
    for ch in s.charts() {
        push(ch.id, &rat(0, 1));
        push(ch.id, &rat(1, 1));
        push(ch.id, &rat(1, 8));
    }
    for t in s.transitions() {
        for pc in &t.pieces {
            for e in [pc.dom.lo.fin(), pc.dom.hi.fin()].into_iter().flatten() {
                push(t.from, e);
                push(t.to, &pc.apply(e));
            }
        }
    }
    v
}

pub fn unit() -> impl Strategy<Value = Rat> {
    (1i64..64).prop_map(|k| rat(k, 64))
}

pub fn small_rat() -> impl Strategy<Value = Rat> {
    (-48i64..48, 1i64..8).prop_map(|(n, d)| rat(n, d))
}

/// A point of `s`: a feature, or a coordinate drawn from `t` in a chart.
pub fn point(s: &System, feats: &[Point], pick: usize, chart: usize, t: &Rat) -> Point {
    if pick % 2 == 0 && !feats.is_empty() {
        return feats[(pick / 2) % feats.len()].clone();
    }
    let ch = &s.charts()[chart % s.charts().len()];
    Point::new(ch.id, inside(&ch.extent, t))
}

/// Catalog systems with their feature points, built once per test binary.
pub fn pool() -> &'static [(&'static str, System, Vec<Point>)] {
    static POOL: std::sync::OnceLock<Vec<(&'static str, System, Vec<Point>)>> = std::sync::OnceLock::new();
    POOL.get_or_init(|| {
        systems()
            .into_iter()
            .map(|(n, s)| {
                let f = features(&s);
                (n, s, f)
            })
            .collect()
    })
}
