use nhatlas::catalog::{make_nh_ordinal, make_psi_like};
use nhatlas::ratcore::{
    limit_eval, AccKind, AccPoint, Arity, Cascade, CascadeError, CascadeSpec, Dir, Direction, Expr, Ext, Idx,
    Interval, LimitValue, OpenIntervalSet, Orientation, SetOp, Side, Tier,
};
use nhatlas::{rat, Rat, RatPiece, RatSet};

fn iv(a: i64, b: i64, c: i64, d: i64) -> Interval<Rat> {
    Interval::fin(rat(a, b), rat(c, d)).unwrap()
}

fn set(ivs: &[Interval<Rat>]) -> RatSet {
    OpenIntervalSet::from_intervals(ivs.to_vec())
}

fn e(s: &str) -> Expr<Rat> {
    s.parse().unwrap()
}

fn ordinal() -> Cascade<Rat> {
    let s = make_nh_ordinal::<Rat>().unwrap().system;
    s.transition(1, 0).unwrap().cascades[0].clone()
}

fn psi_odd() -> Cascade<Rat> {
    let s = make_psi_like::<Rat>(2).unwrap().system;
    s.transition(3, 0).unwrap().cascades[0].clone()
}

#[test]
fn combine_intersect() {
    let a = set(&[iv(0, 1, 2, 1)]);
    let b = set(&[iv(1, 1, 3, 1)]);
    assert_eq!(a.combine(SetOp::Intersect, &b), set(&[iv(1, 1, 2, 1)]));
}

#[test]
fn combine_union_keeps_the_gap_point() {
    let u = set(&[iv(0, 1, 1, 1)]).combine(SetOp::Union, &set(&[iv(1, 1, 2, 1)]));
    assert_eq!(u.intervals().len(), 2);
    assert!(!u.contains(&rat(1, 1)));
}

#[test]
fn combine_diff_drops_endpoints() {
    let d = OpenIntervalSet::single(Interval::line()).combine(SetOp::Diff, &set(&[iv(0, 1, 1, 2)]));
    let want = set(&[
        Interval::new(Ext::NegInf, Ext::Fin(rat(0, 1))).unwrap(),
        Interval::new(Ext::Fin(rat(1, 2)), Ext::PosInf).unwrap(),
    ]);
    assert_eq!(d, want);
    assert!(!d.contains(&rat(0, 1)) && !d.contains(&rat(1, 2)));
}

#[test]
fn apply_identity_clipped() {
    let p = RatPiece::identity(Interval::new(Ext::NegInf, Ext::Fin(rat(0, 1))).unwrap());
    assert_eq!(p.apply_set(Dir::Fwd, &set(&[iv(-1, 1, 1, 1)])), set(&[iv(-1, 1, 0, 1)]));
}

#[test]
fn apply_reflection() {
    let p = RatPiece::new(iv(0, 1, 1, 1), rat(-1, 1), rat(1, 1)).unwrap();
    assert_eq!(p.apply_set(Dir::Fwd, &set(&[iv(0, 1, 1, 4)])), set(&[iv(3, 4, 1, 1)]));
}

#[test]
fn apply_inverse_clipped_to_domain() {
    let p = RatPiece::new(iv(0, 1, 1, 1), rat(2, 1), rat(0, 1)).unwrap();
    assert_eq!(p.apply_set(Dir::Inv, &set(&[iv(1, 1, 4, 1)])), set(&[iv(1, 2, 1, 1)]));
}

#[test]
fn compose_examples() {
    let neg = Interval::new(Ext::NegInf, Ext::Fin(rat(0, 1))).unwrap();
    let id = RatPiece::identity(neg.clone());
    assert!(id.then(&id).unwrap().same_map(&id));
    assert_eq!(id.then(&id).unwrap().dom, neg);

    let dbl = RatPiece::new(iv(0, 1, 1, 1), rat(2, 1), rat(0, 1)).unwrap();
    let sh = RatPiece::translation(iv(0, 1, 2, 1), rat(1, 1));
    let c = dbl.then(&sh).unwrap();
    assert_eq!((c.slope.clone(), c.offset.clone(), c.dom.clone()), (rat(2, 1), rat(1, 1), iv(0, 1, 1, 1)));

    let a = RatPiece::identity(iv(0, 1, 1, 1));
    let b = RatPiece::identity(iv(2, 1, 3, 1));
    assert!(a.then(&b).is_none());
}

#[test]
fn ordinal_piece_at_0_1() {
    let p = ordinal().piece(Idx { n: 0, m: 1 }).unwrap();
    assert_eq!(p.dom, iv(3, 4, 7, 8));
    assert_eq!(p.img(), iv(-1, 3, -1, 4));
}

#[test]
fn psi_piece_at_3() {
    let p = psi_odd().piece(Idx { n: 3, m: 0 }).unwrap();
    assert_eq!(p.dom, iv(1, 5, 1, 4));
    assert_eq!(p.img(), iv(5, 1, 7, 1));
}

#[test]
fn index_below_start_is_rejected() {
    let c = ordinal();
    let idx = Idx { n: 0, m: 0 };
    assert_eq!(c.piece(idx), Err(CascadeError::IndexOutOfRange(idx)));
    // Off the progression counts as out of range too.
    let idx = Idx { n: 2, m: 0 };
    assert_eq!(psi_odd().piece(idx), Err(CascadeError::IndexOutOfRange(idx)));
}

#[test]
fn ordinal_window_near_zero() {
    let c = ordinal();
    let w = set(&[iv(-1, 10, 0, 1)]);
    let (pieces, tail) = c.pieces_meeting(&w, Side::Img).unwrap();
    assert!(tail);
    for (idx, p) in &pieces {
        let k = nhatlas::ratcore::pairing(idx.n, idx.m);
        assert!(k >= 9, "piece {idx} with k = {k}");
        assert!(w.meets_interval(&p.img()));
    }
    // k = 8 sits just outside: (-1/9, -1/10).
    assert_eq!(nhatlas::ratcore::pairing(1, 2), 8);
    let p = c.piece(Idx { n: 1, m: 2 }).unwrap();
    assert_eq!(p.img(), iv(-1, 9, -1, 10));
    assert!(!w.meets_interval(&p.img()));
}

#[test]
fn empty_window_meets_nothing() {
    for c in [ordinal(), psi_odd()] {
        for side in [Side::Dom, Side::Img] {
            assert_eq!(c.pieces_meeting(&RatSet::empty(), side).unwrap(), (vec![], false));
        }
    }
}

#[test]
fn psi_window_between_images() {
    let (pieces, tail) = psi_odd().pieces_meeting(&set(&[iv(100, 1, 101, 1)]), Side::Img).unwrap();
    assert!(!tail);
    // The odd progression lands on (2n-1, 2n+1) for odd n, which skips (100, 101).
    assert!(pieces.is_empty(), "{pieces:?}");
}

#[test]
fn harmonic_limit() {
    let r = limit_eval(&e("(/ 1 (+ n 2))"), Direction::N).unwrap();
    assert_eq!(r.value, LimitValue::Ext(Ext::Fin(rat(0, 1))));
}

#[test]
fn inner_limit_in_closed_form() {
    let r = limit_eval(&e("(- (pow 1/2 n) (* 3 (pow 1/2 (+ n (+ m 2)))))"), Direction::M).unwrap();
    let LimitValue::ClosedForm(f) = r.value else { panic!("{:?}", r.value) };
    for n in 0..10u64 {
        assert_eq!(f.eval(n, 0), Some(rat(1, 1 << n)));
    }
}

#[test]
fn constant_limit() {
    for d in [Direction::N, Direction::M, Direction::Double] {
        assert_eq!(limit_eval(&e("5"), d).unwrap().value, LimitValue::Ext(Ext::Fin(rat(5, 1))));
    }
}

fn arity_one(dom: (&str, &str), img: (&str, &str)) -> Result<Cascade<Rat>, CascadeError> {
    Cascade::new(CascadeSpec {
        arity: Arity::One,
        start: (0, 0),
        filter: None,
        dom: (e(dom.0), e(dom.1)),
        img: (e(img.0), e(img.1)),
        orientation: Orientation::Preserve,
        tier: Tier::Analytic,
    })
}

#[test]
fn arity_one_single_pair() {
    let c = arity_one(
        ("(pow 1/2 (+ n 1))", "(pow 1/2 n)"),
        ("(- (pow 1/2 n))", "(- (pow 1/2 (+ n 1)))"),
    )
    .unwrap();
    let pairs = c.acc_pairs();
    assert_eq!(pairs.len(), 1);
    assert_eq!(pairs[0].kind, AccKind::Single);
    assert_eq!(pairs[0].dom, AccPoint::Fixed(Ext::Fin(rat(0, 1))));
    assert_eq!(pairs[0].img, AccPoint::Fixed(Ext::Fin(rat(0, 1))));
}

#[test]
fn constant_length_pieces_are_rejected() {
    let lo = "(/ n (+ n 1))";
    let r = arity_one((lo, "(+ (/ n (+ n 1)) 1/2)"), ("(- (pow 1/2 n))", "(- (pow 1/2 (+ n 1)))"));
    assert!(matches!(r, Err(CascadeError::NonVanishingDiameter(_))), "{r:?}");
}

#[test]
fn pieces_escaping_to_infinity_are_fine() {
    // Constant length, but nothing accumulates in the chart.
    let r = arity_one(("n", "(+ n 1/2)"), ("(- n)", "(+ (- n) 1/2)"));
    assert!(r.is_ok(), "{r:?}");
}

#[test]
fn ordinal_acc_pairs() {
    let pairs = ordinal().acc_pairs();
    let fam = pairs.iter().find(|p| p.kind == AccKind::Family).expect("family pair");
    let AccPoint::Family { expr, start, .. } = &fam.dom else { panic!("{fam:?}") };
    assert_eq!(*start, 0);
    for n in 0..8u64 {
        assert_eq!(expr.eval(n, 0).unwrap(), rat(1, 1 << n));
    }
    assert_eq!(fam.img, AccPoint::Fixed(Ext::Fin(rat(0, 1))));
    let dbl = pairs.iter().find(|p| p.kind == AccKind::Double).expect("double pair");
    assert_eq!(dbl.dom, AccPoint::Fixed(Ext::Fin(rat(0, 1))));
    assert_eq!(dbl.img, AccPoint::Fixed(Ext::Fin(rat(0, 1))));
}
