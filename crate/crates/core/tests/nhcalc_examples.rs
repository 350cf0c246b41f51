use nhatlas::atlas::QOpenSet;
use nhatlas::catalog::{
    make_branching, make_doubly_branching, make_fat_s1, make_nh_ordinal, make_towel_rack, make_two_origins, make_we,
    RackFloor,
};
use nhatlas::nhcalc::{
    bumpeq_classes, maximality_certificate, maximality_certificate_set, nh_graph, nh_iterate, nh_of, product_nh,
    separation, separation_oracle, simplicity_at, sorted_check, Classification, Necessary, OracleResult, Verdict,
    VerdictKind, Witness,
};
use nhatlas::ratcore::{AccMatch, Ext, Interval, OpenIntervalSet};
use nhatlas::{rat, Point, Rat, System};

fn pt(c: usize, n: i64, d: i64) -> Point {
    Point::new(c, rat(n, d))
}

fn branching() -> System {
    make_branching::<Rat>().unwrap().system
}

fn two_origins() -> System {
    make_two_origins::<Rat>().unwrap().system
}

fn ordinal() -> System {
    make_nh_ordinal::<Rat>().unwrap().system
}

fn we(e: &[i64]) -> System {
    let e: Vec<Rat> = e.iter().map(|x| rat(*x, 1)).collect();
    make_we(&e).unwrap().system
}

fn rack(sets: Vec<RackFloor<Rat>>) -> System {
    make_towel_rack(&sets).unwrap().system
}

fn oracle_agrees(s: &System, p: &Point, q: &Point) -> VerdictKind {
    let v = separation(s, p, q).unwrap();
    let o = separation_oracle(s, p, q, &v.verdict, 20).unwrap();
    assert_eq!(o, OracleResult::Consistent, "{p} vs {q}: {:?}", v.verdict);
    v.kind()
}

#[test]
fn branch_points_are_not_separated() {
    let s = branching();
    let v = separation(&s, &pt(0, 0, 1), &pt(1, 0, 1)).unwrap();
    match v.verdict {
        Verdict::NotSeparated(Witness::PieceBoundary { piece, at, limit }) => {
            assert_eq!(piece.dom.hi, Ext::Fin(rat(0, 1)));
            assert_eq!((at, limit), (pt(0, 0, 1), pt(1, 0, 1)));
        }
        other => panic!("{other:?}"),
    }
    assert!(!v.tier2);
}

#[test]
fn glued_points_are_equal() {
    assert_eq!(separation(&branching(), &pt(0, -1, 1), &pt(1, -1, 1)).unwrap().kind(), VerdictKind::Equal);
}

#[test]
fn same_chart_radius() {
    let v = separation(&two_origins(), &pt(0, 0, 1), &pt(0, 3, 1)).unwrap();
    assert_eq!(v.verdict, Verdict::Separated { eps_star: rat(3, 2) });
}

#[test]
fn ordinal_zero_against_p3() {
    let v = separation(&ordinal(), &pt(0, 0, 1), &pt(1, 1, 8)).unwrap();
    match v.verdict {
        Verdict::NotSeparated(Witness::CascadeAcc { matched, .. }) => assert_eq!(matched, AccMatch::Family(3)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn oracle_confirms_the_examples() {
    let b = branching();
    assert_eq!(oracle_agrees(&b, &pt(0, 0, 1), &pt(1, 0, 1)), VerdictKind::NotSeparated);
    assert_eq!(oracle_agrees(&b, &pt(0, -1, 1), &pt(1, -1, 1)), VerdictKind::Equal);
    assert_eq!(oracle_agrees(&two_origins(), &pt(0, 0, 1), &pt(0, 3, 1)), VerdictKind::Separated);
    let o = ordinal();
    assert_eq!(oracle_agrees(&o, &pt(0, 0, 1), &pt(1, 1, 8)), VerdictKind::NotSeparated);
    assert_eq!(oracle_agrees(&o, &pt(0, 0, 1), &pt(1, 1, 3)), VerdictKind::Separated);
    assert_eq!(oracle_agrees(&o, &pt(0, 0, 1), &pt(1, 0, 1)), VerdictKind::NotSeparated);
}

#[test]
fn oracle_rejects_a_corrupted_verdict() {
    let s = branching();
    let bad = Verdict::Separated { eps_star: rat(1, 1) };
    let r = separation_oracle(&s, &pt(0, 0, 1), &pt(1, 0, 1), &bad, 20).unwrap();
    assert!(matches!(r, OracleResult::Inconsistent(_)), "{r:?}");
    // A radius too large for two genuinely separated points.
    let bad = Verdict::Separated { eps_star: rat(2, 1) };
    let r = separation_oracle(&two_origins(), &pt(0, 0, 1), &pt(0, 3, 1), &bad, 20).unwrap();
    assert!(matches!(r, OracleResult::Inconsistent(_)), "{r:?}");
}

#[test]
fn nh_of_an_origin() {
    let d = nh_of(&two_origins(), &pt(0, 0, 1)).unwrap();
    assert_eq!(d.isolated, vec![pt(1, 0, 1)]);
    assert!(d.families.is_empty());
}

#[test]
fn nh_on_a_towel_rack_floor() {
    let s = rack(vec![RackFloor { floor: 1, sets: vec![vec![rat(0, 1), rat(1, 2)]] }]);
    let d = nh_of(&s, &pt(0, 0, 1)).unwrap();
    assert_eq!(d.isolated, vec![pt(1, 0, 1)]);
    assert!(d.families.is_empty());
}

#[test]
fn nh_of_zero_is_a_convergent_sequence() {
    let s = ordinal();
    let d = nh_of(&s, &pt(0, 0, 1)).unwrap();
    assert!(d.isolated.is_empty());
    assert_eq!(d.families.len(), 1);
    let f = &d.families[0];
    assert_eq!(f.members(4), vec![pt(1, 1, 1), pt(1, 1, 2), pt(1, 1, 4), pt(1, 1, 8)]);
    assert_eq!(f.limit, Some(pt(1, 0, 1)));
    assert!(f.limit_included);
    assert!(d.contains(&s, &pt(1, 1, 1024)).unwrap());
    assert!(!d.contains(&s, &pt(1, 1, 3)).unwrap());
}

#[test]
fn we_graph_is_a_path() {
    let s = we(&[0, 1]);
    let g = nh_graph(&s, &[pt(0, 0, 1), pt(0, 1, 1), pt(1, 0, 1)]).unwrap();
    assert_eq!(g.edges(), vec![(0, 2), (1, 2)]);
    assert_eq!(bumpeq_classes(&g), vec![vec![0, 1, 2]]);
    assert_eq!(nh_iterate(&g, &[0], 1).unwrap().into_iter().collect::<Vec<_>>(), vec![2]);
    assert_eq!(nh_iterate(&g, &[0], 2).unwrap().into_iter().collect::<Vec<_>>(), vec![0, 1]);
}

#[test]
fn single_vertex_graph() {
    let g = nh_graph(&two_origins(), &[pt(0, 0, 1)]).unwrap();
    assert!(g.edges().is_empty());
    assert_eq!(bumpeq_classes(&g), vec![vec![0]]);
}

#[test]
fn two_origins_graph() {
    let g = nh_graph(&two_origins(), &[pt(0, 0, 1), pt(1, 0, 1), pt(0, 5, 1)]).unwrap();
    assert_eq!(g.edges(), vec![(0, 1)]);
    assert_eq!(bumpeq_classes(&g), vec![vec![0, 1], vec![2]]);
}

#[test]
fn edgeless_graph_has_singleton_classes() {
    let g = nh_graph(&two_origins(), &[pt(0, 1, 1), pt(0, 2, 1), pt(1, 3, 1)]).unwrap();
    assert_eq!(bumpeq_classes(&g), vec![vec![0], vec![1], vec![2]]);
}

#[test]
fn fat_circle_sample_is_reached_in_three_steps() {
    let s = make_fat_s1(&[rat(0, 1), rat(1, 4)]).unwrap().system;
    let pts: Vec<Point> = [pt(0, 0, 1), pt(0, 1, 4)].into_iter().chain((2..6).map(|c| pt(c, 0, 1))).collect();
    let g = nh_graph(&s, &pts).unwrap();
    assert_eq!(bumpeq_classes(&g), vec![(0..6).collect::<Vec<_>>()]);
    for v in 0..pts.len() {
        let mut seen: std::collections::BTreeSet<usize> = [v].into();
        for n in 1..=3 {
            seen.extend(nh_iterate(&g, &[v], n).unwrap());
        }
        assert_eq!(seen.len(), pts.len(), "from vertex {v}");
    }
}

#[test]
fn product_sizes() {
    let s = two_origins();
    let pair = nh_graph(&s, &[pt(0, 0, 1), pt(1, 0, 1)]).unwrap();
    let lone = nh_graph(&s, &[pt(0, 7, 1)]).unwrap();
    assert_eq!(product_nh(&[(&pair, 0), (&pair, 1)]).unwrap().len(), 3);
    assert!(product_nh(&[(&lone, 0), (&lone, 0)]).unwrap().is_empty());
    assert_eq!(product_nh(&[(&pair, 0), (&pair, 0), (&lone, 0)]).unwrap().len(), 3);
}

#[test]
fn origin_chart_is_maximal() {
    let c = maximality_certificate(&two_origins(), 0).unwrap();
    assert_eq!(c.nh, vec![pt(1, 0, 1)]);
    assert_eq!(c.boundary, vec![pt(1, 0, 1)]);
    assert!(c.ch_maximal);
    assert_eq!(c.h_maximal_necessary, Necessary::Met);
}

#[test]
fn bottom_branch_is_ch_maximal_only() {
    let c = maximality_certificate(&branching(), 0).unwrap();
    assert!(c.ch_maximal);
    assert_eq!(c.h_maximal_necessary, Necessary::Failed);
}

#[test]
fn doubly_branching_set_is_disconnected() {
    let s = make_doubly_branching::<Rat>().unwrap().system;
    let mut u = QOpenSet::in_chart(0, OpenIntervalSet::single(Interval::line()));
    u.sets.insert(1, OpenIntervalSet::single(Interval::new(Ext::Fin(rat(0, 1)), Ext::PosInf).unwrap()));
    let c = maximality_certificate_set(&s, &u).unwrap();
    assert!(c.ch_maximal);
    assert!(!c.connected());
    assert_eq!(c.components, 2);
}

#[test]
fn sorted_examples() {
    let s = rack(vec![
        RackFloor { floor: 1, sets: vec![vec![rat(0, 1), rat(1, 2)]] },
        RackFloor { floor: 2, sets: vec![vec![rat(0, 1)]] },
    ]);
    assert!(sorted_check(&s, &[pt(0, 0, 1), pt(0, 1, 2), pt(0, 7, 1)], 16).unwrap().is_empty());
    let w = we(&[0, 1]);
    let v = sorted_check(&w, &[pt(0, 0, 1), pt(0, 1, 1)], 16).unwrap();
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].common, pt(1, 0, 1));
    assert!(sorted_check(&w, &[], 16).unwrap().is_empty());
}

#[test]
fn shortcuts_sharing_an_end_are_not_separated() {
    let s = we(&[0, 1, 2]);
    // Charts 1, 2, 3 are c(0,1), c(0,2), c(1,2).
    let d = nh_of(&s, &pt(2, 0, 1)).unwrap();
    assert_eq!(d.isolated, vec![pt(0, 0, 1), pt(0, 2, 1), pt(1, 0, 1), pt(3, 0, 1)]);
    assert!(d.families.is_empty());
    for q in &d.isolated {
        assert_eq!(oracle_agrees(&s, &pt(2, 0, 1), q), VerdictKind::NotSeparated);
    }
    assert_eq!(oracle_agrees(&s, &pt(2, 0, 1), &pt(0, 1, 1)), VerdictKind::Separated);
}

#[test]
fn simplicity_examples() {
    let b = branching();
    let r = simplicity_at(&b, &QOpenSet::chart_image(&b, 0).unwrap(), &pt(1, 0, 1)).unwrap();
    assert_eq!(r.classification, Classification::Simple(1));

    let t = rack(vec![RackFloor { floor: 1, sets: vec![vec![rat(0, 1)]] }]);
    let r = simplicity_at(&t, &QOpenSet::chart_image(&t, 0).unwrap(), &pt(1, 0, 1)).unwrap();
    assert_eq!(r.classification, Classification::Simple(2));
    let stab = r.stabilization_eps.clone().unwrap();
    assert!(r.counts.iter().filter(|(e, _)| *e <= stab).all(|(_, c)| *c == Some(2)));

    let o = ordinal();
    let r = simplicity_at(&o, &QOpenSet::chart_image(&o, 0).unwrap(), &pt(1, 0, 1)).unwrap();
    assert_eq!(r.classification, Classification::NotFSimple);
}
