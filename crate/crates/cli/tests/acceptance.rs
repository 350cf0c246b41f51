//! One line per acceptance criterion. Runs without the libtest harness so the
//! lines always print; exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nhatlas::atlas::QOpenSet;
use nhatlas::catalog::{by_name, Source, NAMES};
use nhatlas::nhcalc::{
    maximality_certificate, nh_graph, nh_of, product_nh, separation, separation_oracle, simplicity_at,
    Classification, Necessary, NhGraph, OracleResult, VerdictKind,
};
use nhatlas::ratcore::{Ext, Interval};
use nhatlas::{rat, Point, Rat, System};
use nhatlas_cli::{export_atlas, parse_atlas_str};
use nhatlas_flow::{accumulation_estimate, planar_demo, AccParams, AccShape, Demo, DemoPoint, Recipe, SampledVerdict};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

const CASES: u32 = 1000;

struct Outcome {
    passed: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome { passed: true, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome { passed: false, detail: detail.into() }
}

fn pt(c: usize, n: i64, d: i64) -> Point {
    Point::new(c, rat(n, d))
}

fn runner(cases: u32) -> TestRunner {
    let cfg = Config { cases, failure_persistence: None, max_shrink_iters: 32, ..Config::default() };
    TestRunner::new_with_rng(cfg, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

/// Runs `test` on `CASES` deterministic draws of `strategy`.
fn suite<S: Strategy>(strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    runner(CASES).run(&strategy, test).map_err(|e| e.to_string())
}

// ---- shared point pool ----

/// Maps `t ∈ (0, 1)` into the open interval `iv`.
fn inside(iv: &Interval<Rat>, t: &Rat) -> Rat {
    let one = rat(1, 1);
    match (&iv.lo, &iv.hi) {
        (Ext::Fin(a), Ext::Fin(b)) => a + (b - a) * t,
        (Ext::Fin(a), _) => a + t / (&one - t),
        (_, Ext::Fin(b)) => b - t / (&one - t),
        _ => (t - rat(1, 2)) * rat(16, 1),
    }
}

/// Breakpoints, their images, and a few fixed coordinates.
fn features(s: &System) -> Vec<Point> {
    let mut v: Vec<Point> = Vec::new();
    let mut push = |c: usize, x: &Rat| {
        let p = Point::new(c, x.clone());
        if s.check_point(&p).is_ok() && !v.contains(&p) {
            v.push(p);
        }
    };
    for ch in s.charts() {
        for x in [rat(0, 1), rat(1, 1), rat(1, 8)] {
            push(ch.id, &x);
        }
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

struct Sys {
    name: &'static str,
    s: System,
    feats: Vec<Point>,
}

fn pool() -> Vec<Sys> {
    NAMES
        .iter()
        .map(|n| {
            let s = by_name::<Rat>(n).unwrap().system;
            let feats = features(&s);
            Sys { name: n, s, feats }
        })
        .collect()
}

/// A feature point or an interior point of some chart.
fn point_of(sys: &Sys, pick: usize, chart: usize, t: &Rat) -> Point {
    if pick % 2 == 0 && !sys.feats.is_empty() {
        return sys.feats[(pick / 2) % sys.feats.len()].clone();
    }
    let ch = &sys.s.charts()[chart % sys.s.charts().len()];
    Point::new(ch.id, inside(&ch.extent, t))
}

fn unit() -> impl Strategy<Value = Rat> {
    (1i64..64).prop_map(|k| rat(k, 64))
}

fn pick() -> impl Strategy<Value = (usize, usize, Rat)> {
    (0usize..64, 0usize..16, unit())
}

fn kind(s: &System, p: &Point, q: &Point) -> Result<VerdictKind, TestCaseError> {
    separation(s, p, q).map(|v| v.kind()).map_err(|e| TestCaseError::fail(e.to_string()))
}

// ---- criteria ----

const SUITE: &[&str] =
    &["two_origins", "branching", "doubly_branching", "towel_rack", "we", "fat_s1", "nh_ordinal", "psi_like", "tree"];

fn c1() -> Outcome {
    let mut tags: BTreeMap<&str, usize> = BTreeMap::new();
    let mut bad = Vec::new();
    for name in SUITE {
        let e = by_name::<Rat>(name).unwrap();
        for x in &e.expectations {
            let o = x.check(&e.system);
            *tags.entry(match x.source {
                Source::Stated => "stated",
                Source::Derived => "derived",
                Source::Trivial => "trivial",
            })
            .or_default() += 1;
            if !o.passed {
                bad.push(format!("{name}/{}: {}", x.label, o.actual));
            }
        }
    }
    let n: usize = tags.values().sum();
    let tally = tags.iter().map(|(k, v)| format!("{v} {k}")).collect::<Vec<_>>().join(", ");
    if bad.is_empty() {
        pass(format!("{n}/{n} expectations ({tally})"))
    } else {
        fail(format!("{}/{n} failed: {}", bad.len(), bad.join("; ")))
    }
}

fn c2(pool: &[Sys]) -> Outcome {
    let mut unknown = 0usize;
    let mut total = 0usize;
    for sys in pool {
        let mut run = runner(CASES);
        let counts = std::cell::Cell::new((0usize, 0usize));
        let r = run.run(&(pick(), pick()), |((a, ca, ta), (b, cb, tb))| {
            let p = point_of(sys, a, ca, &ta);
            let q = point_of(sys, b, cb, &tb);
            let v = separation(&sys.s, &p, &q).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let o = separation_oracle(&sys.s, &p, &q, &v.verdict, 20).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let (n, u) = counts.get();
            counts.set((n + 1, u + usize::from(v.kind() == VerdictKind::Unknown)));
            match o {
                OracleResult::Consistent => Ok(()),
                OracleResult::Inconclusive if v.kind() == VerdictKind::Unknown => Ok(()),
                other => Err(TestCaseError::fail(format!("{p} vs {q}: {:?} / {other:?}", v.verdict))),
            }
        });
        if let Err(e) = r {
            return fail(format!("{}: {e}", sys.name));
        }
        total += counts.get().0;
        unknown += counts.get().1;
    }
    pass(format!("{} systems x {CASES} pairs consistent ({total} queries, {unknown} Unknown)", pool.len()))
}

fn c3() -> Outcome {
    let s = by_name::<Rat>("nh_ordinal").unwrap().system;
    let d = match nh_of(&s, &pt(0, 0, 1)) {
        Ok(d) => d,
        Err(e) => return fail(e.to_string()),
    };
    if d.families.len() != 1 || !d.isolated.is_empty() {
        return fail(format!("{} families, {} isolated", d.families.len(), d.isolated.len()));
    }
    let f = &d.families[0];
    let want: Vec<Point> = (0..16).map(|n| Point::new(1, rat(1, 1 << n))).collect();
    if f.members(16) != want {
        return fail(format!("members {:?}", f.members(4)));
    }
    if f.limit != Some(pt(1, 0, 1)) || !f.limit_included {
        return fail(format!("limit {:?}, included {}", f.limit, f.limit_included));
    }
    pass("one family 1:2^-n, limit 1:0/1 included, no isolated points")
}

fn c4() -> Outcome {
    let cert = |name: &str| maximality_certificate(&by_name::<Rat>(name).unwrap().system, 0);
    match (cert("two_origins"), cert("branching")) {
        (Ok(a), Ok(b)) => {
            let ok = a.ch_maximal
                && a.h_maximal_necessary == Necessary::Met
                && b.ch_maximal
                && b.h_maximal_necessary == Necessary::Failed;
            let d = format!(
                "two_origins: chMaximal {} necessary {:?}; branching: chMaximal {} necessary {:?}",
                a.ch_maximal, a.h_maximal_necessary, b.ch_maximal, b.h_maximal_necessary
            );
            if ok {
                pass(d)
            } else {
                fail(d)
            }
        }
        (a, b) => fail(format!("{:?} {:?}", a.err(), b.err())),
    }
}

fn graphs() -> Vec<NhGraph<Rat>> {
    let build = |name: &str, pts: Vec<Point>| nh_graph(&by_name::<Rat>(name).unwrap().system, &pts).unwrap();
    vec![
        build("two_origins", vec![pt(0, 0, 1), pt(1, 0, 1), pt(0, 5, 1)]),
        build("we", vec![pt(0, 0, 1), pt(0, 1, 1), pt(1, 0, 1), pt(0, 1, 2)]),
        build("fat_s1", vec![pt(0, 0, 1), pt(2, 0, 1), pt(3, 0, 1), pt(5, 0, 1)]),
        build("doubly_branching", vec![pt(0, 0, 1), pt(1, 0, 1), pt(2, 0, 1)]),
    ]
}

fn c5(pool: &[Sys]) -> Outcome {
    let sys = |i: usize| &pool[i % pool.len()];
    let mut results: Vec<(&str, Result<(), String>)> = Vec::new();

    results.push((
        "verdict symmetry",
        suite((0usize..64, pick(), pick()), |(i, (a, ca, ta), (b, cb, tb))| {
            let s = sys(i);
            let (p, q) = (point_of(s, a, ca, &ta), point_of(s, b, cb, &tb));
            prop_assert_eq!(kind(&s.s, &p, &q)?, kind(&s.s, &q, &p)?, "{}: {} vs {}", s.name, p, q);
            Ok(())
        }),
    ));

    results.push((
        "same-chart Hausdorff",
        suite((0usize..64, 0usize..16, unit(), unit()), |(i, c, ta, tb)| {
            prop_assume!(ta != tb);
            let s = sys(i);
            let (p, q) = (point_of(s, 1, c, &ta), point_of(s, 1, c, &tb));
            let k = kind(&s.s, &p, &q)?;
            prop_assert_eq!(k, VerdictKind::Separated, "{}: {} vs {}", s.name, p, q);
            Ok(())
        }),
    ));

    results.push((
        "NH membership symmetry",
        suite((0usize..64, pick(), pick()), |(i, (a, ca, ta), (b, cb, tb))| {
            let s = sys(i);
            let x = point_of(s, a, ca, &ta);
            let y0 = point_of(s, b, cb, &tb);
            let Ok(dx) = nh_of(&s.s, &x) else { return Ok(()) };
            let mut ys = dx.sample(&s.s, 4).map_err(|e| TestCaseError::fail(e.to_string()))?;
            ys.push(y0);
            for y in ys {
                let listed = dx.contains(&s.s, &y).map_err(|e| TestCaseError::fail(e.to_string()))?;
                // Points deep inside declared data may not resolve.
                let Ok(dy) = nh_of(&s.s, &y) else { continue };
                let back = dy.contains(&s.s, &x).map_err(|e| TestCaseError::fail(e.to_string()))?;
                prop_assert_eq!(listed, back, "{}: {} and {}", s.name, x, y);
            }
            Ok(())
        }),
    ));

    results.push((
        "included limits are closed",
        suite((0usize..64, 0usize..64, 0u64..24), |(i, f, k)| {
            let s = sys(i);
            prop_assume!(!s.feats.is_empty());
            let x = &s.feats[f % s.feats.len()];
            let d = nh_of(&s.s, x).map_err(|e| TestCaseError::fail(e.to_string()))?;
            for fam in d.families.iter().filter(|f| f.limit_included) {
                let l = fam.limit.clone().unwrap();
                let kl = kind(&s.s, x, &l)?;
                prop_assert!(matches!(kl, VerdictKind::NotSeparated | VerdictKind::Unknown), "{}: {} vs limit {}: {:?}", s.name, x, l, kl);
                prop_assert!(d.contains(&s.s, &l).map_err(|e| TestCaseError::fail(e.to_string()))?);
                // Members approach the limit: the k-th tail lies inside a shrinking window.
                let tail = fam.members(k + 2);
                let (m0, m1) = (&tail[tail.len() - 2], &tail[tail.len() - 1]);
                prop_assert_eq!(m0.chart, l.chart);
                let (d0, d1) = (abs(&m0.coord - &l.coord), abs(&m1.coord - &l.coord));
                prop_assert!(d1 < d0 || d0 == rat(0, 1), "{}: family does not approach {}", s.name, l);
            }
            Ok(())
        }),
    ));

    let gs = graphs();
    results.push((
        "product NH cardinality",
        suite(prop::collection::vec((0usize..4, 0usize..4), 1..5), |picks| {
            let factors: Vec<(&NhGraph<Rat>, usize)> = picks.iter().map(|(g, v)| (&gs[*g], v % gs[*g].len())).collect();
            let want = factors.iter().map(|(g, v)| g.neighbors(*v).len() + 1).product::<usize>() - 1;
            let got = product_nh(&factors).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(got.len(), want);
            Ok(())
        }),
    ));

    let failed: Vec<String> = results.iter().filter_map(|(n, r)| r.as_ref().err().map(|e| format!("{n}: {e}"))).collect();
    if failed.is_empty() {
        pass(format!("{} suites x {CASES} instances, zero failures", results.len()))
    } else {
        fail(failed.join("; "))
    }
}

fn abs(x: Rat) -> Rat {
    if x < rat(0, 1) {
        -x
    } else {
        x
    }
}

fn c6() -> Outcome {
    let rack = by_name::<Rat>("towel_rack").unwrap().system;
    let ord = by_name::<Rat>("nh_ordinal").unwrap().system;
    let class = |s: &System, p: Point| {
        let u = QOpenSet::chart_image(s, 0).unwrap();
        simplicity_at(s, &u, &p).map(|r| r.classification)
    };
    match (class(&rack, pt(2, 1, 2)), class(&ord, pt(1, 0, 1))) {
        (Ok(Classification::Simple(2)), Ok(Classification::NotFSimple)) => {
            pass("towel_rack 2:1/2 Simple(2); nh_ordinal 1:0/1 NotFSimple")
        }
        (a, b) => fail(format!("towel_rack {a:?}; nh_ordinal {b:?}")),
    }
}

fn c7() -> Outcome {
    let params = |k| AccParams::<f64>::with_samples(k);
    let mut notes = Vec::new();
    let mut ok = true;

    let e = accumulation_estimate(&Recipe::circle_recip(), &[0.3], &[1], &params(1_000_000)).unwrap();
    let full = (e.coverage.occupied, e.coverage.total) == (256, 256) && e.shape == AccShape::Full;
    ok &= full;
    notes.push(format!("(a) {}/{} bins", e.coverage.occupied, e.coverage.total));

    let x = 0.75;
    for n in [1i64, 2] {
        let e = accumulation_estimate(&Recipe::sines(), &[x], &[n], &params(1_000_000)).unwrap();
        match e.shape {
            AccShape::Interval { lo, hi } => {
                let err = (lo - (x - n as f64)).abs().max((hi - (x + n as f64)).abs());
                ok &= err < 1e-3;
                notes.push(format!("(b) n={n} endpoint error {err:.1e}"));
            }
            other => {
                ok = false;
                notes.push(format!("(b) n={n} shape {other:?}"));
            }
        }
    }

    let r = Recipe::sines3();
    let cases: [([i64; 3], &str); 8] = [
        ([1, 0, 0], "interval"),
        ([-3, 0, 2], "interval"),
        ([2, 0, -1], "interval"),
        ([0, 1, 0], "unboundedWindowCoverage"),
        ([4, -1, 3], "unboundedWindowCoverage"),
        ([0, 2, 0], "unboundedWindowCoverage"),
        ([0, 0, 1], "singleton"),
        ([0, 0, -7], "singleton"),
    ];
    let mut right = 0;
    for (d, want) in cases {
        let got = accumulation_estimate(&r, &[0.0], &d, &params(200_000)).unwrap().shape.label();
        if got == want {
            right += 1;
        } else {
            notes.push(format!("(c) {d:?}: {got}, expected {want}"));
        }
    }
    ok &= right == cases.len();
    notes.push(format!("(c) {right}/{} sines3 patterns", cases.len()));
    Outcome { passed: ok, detail: notes.join("; ") }
}

fn c8() -> Outcome {
    let sphere = Demo::SphereBoundary;
    let mut bad = Vec::new();
    let deep = |v: Option<SampledVerdict<f64>>| matches!(v, Some(SampledVerdict::NotSeparated { down_to }) if down_to <= 1e-6);
    for k in 0..12 {
        let a = std::f64::consts::TAU * k as f64 / 12.0;
        let q = DemoPoint::at(0, a.cos(), a.sin());
        if !deep(planar_demo(&sphere, DemoPoint::ZeroStar, q)) {
            bad.push(format!("sphere {q}"));
        }
    }
    if planar_demo(&sphere, DemoPoint::ZeroStar, DemoPoint::at(0, 0.5, 0.0)).map(|v| v.label()) != Some("Separated") {
        bad.push("sphere interior point not separated".into());
    }
    let prufer = Demo::Prufer { c: 0.0 };
    let p = DemoPoint::at(0, 0.0, 0.0);
    for y in [-3.0, -0.5, 0.0, 0.25, 1.0, 5.0] {
        if !deep(planar_demo(&prufer, p, DemoPoint::at(1, 0.0, y))) {
            bad.push(format!("prufer axis y={y}"));
        }
    }
    if bad.is_empty() {
        pass("12 unit-circle points and 6 axis points non-separated down to radius <= 1e-6")
    } else {
        fail(bad.join("; "))
    }
}

fn c9() -> Outcome {
    for name in NAMES {
        let text = export_atlas(&by_name::<Rat>(name).unwrap().system);
        match parse_atlas_str(&text) {
            Ok(s) if export_atlas(&s) == text => {}
            Ok(_) => return fail(format!("{name}: second export differs")),
            Err(e) => return fail(format!("{name}: {e}")),
        }
    }
    pass(format!("{} entries byte-identical", NAMES.len()))
}

fn main() -> ExitCode {
    // `cargo test -- --list` and filters: nothing to list, everything runs.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let pool = pool();
    type Crit<'a> = (u32, &'a str, u64, Box<dyn Fn() -> Outcome + 'a>);
    let criteria: Vec<Crit> = vec![
        (1, "separation ground truth", 10, Box::new(c1)),
        (2, "oracle equivalence", 60, Box::new(|| c2(&pool))),
        (3, "NH structure", 1, Box::new(c3)),
        (4, "maximality certificates", 1, Box::new(c4)),
        (5, "property suites", 600, Box::new(|| c5(&pool))),
        (6, "simplicity", 5, Box::new(c6)),
        (7, "flow recipes", 120, Box::new(c7)),
        (8, "planar demos", 10, Box::new(c8)),
        (9, "round trip", 1, Box::new(c9)),
    ];
    let mut all = true;
    for (n, name, limit, f) in &criteria {
        let t0 = Instant::now();
        let o = f();
        let dt = t0.elapsed();
        let in_time = dt < Duration::from_secs(*limit);
        let ok = o.passed && in_time;
        all &= ok;
        println!(
            "criterion {n} [{name}]: {} ({:.2} s, limit {limit} s) {}{}",
            if ok { "PASS" } else { "FAIL" },
            dt.as_secs_f64(),
            o.detail,
            if in_time { "" } else { " [over time limit]" }
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
