use super::{line_chart, fin_chart, pt, CatalogEntry, CatalogError, Expectation, Expected, FamilyShape, Source};
use crate::atlas::{AdjunctionSystem, Transition};
use crate::nhcalc::VerdictKind::{NotSeparated, Separated};
use crate::ratcore::{
    AccDecl, Arity, Cascade, CascadeSpec, Declared, Expr, Ext, LimitPoint, Orientation, Progression, Tier,
};
use crate::scalar::Scalar;

/// Members `base + scale·ratio^n`, `n ≥ 0`, decreasing to `base`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeoFamily<T> {
    pub base: T,
    pub scale: T,
    pub ratio: T,
}

/// A closed nowhere dense set: isolated points plus geometric families with their limits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EDescriptor<T> {
    pub points: Vec<T>,
    pub families: Vec<GeoFamily<T>>,
}

fn c<T: Scalar>(v: T) -> Expr<T> {
    Expr::c(v)
}

fn spec<T: Scalar>(
    arity: Arity,
    start: (u64, u64),
    filter: Option<Progression>,
    dom: (Expr<T>, Expr<T>),
    img: (Expr<T>, Expr<T>),
) -> CascadeSpec<T> {
    CascadeSpec { arity, start, filter, dom, img, orientation: Orientation::Preserve, tier: Tier::Analytic }
}

/// `(-1/(N·k+i+1), -1/(N·k+i+2))`: slot `i` of `N` interleaved image sequences.
fn slot<T: Scalar>(k: Expr<T>, i: usize, total: usize) -> (Expr<T>, Expr<T>) {
    let base = Expr::int(total as i64) * k + Expr::int(i as i64);
    (
        Expr::int(-1) / (base.clone() + Expr::int(1)),
        Expr::int(-1) / (base + Expr::int(2)),
    )
}

/// `E` sits in chart 1; every point of `E` is approached from the left by
/// pieces whose images pile up at 0 in chart 0, so `NH(0₀) = E × {1}`.
pub fn make_cascade_e<T: Scalar>(e: &EDescriptor<T>) -> Result<CatalogEntry<T>, CatalogError> {
    let mut feats: Vec<T> = e.points.clone();
    for f in &e.families {
        if !f.scale.is_positive() || !f.ratio.is_positive() || f.ratio >= T::one() {
            return Err(CatalogError::InvalidParams("families need scale > 0 and 0 < ratio < 1".into()));
        }
        feats.push(f.base.clone());
        feats.push(f.base.clone() + f.scale.clone());
    }
    for x in &e.points {
        let hit = e.families.iter().any(|f| *x >= f.base && *x <= f.base.clone() + f.scale.clone());
        if hit {
            return Err(CatalogError::InvalidParams(format!("point {} meets a family hull", x.fmt_exact())));
        }
    }
    let total = e.points.len() + e.families.len();
    if total == 0 {
        return Err(CatalogError::InvalidParams("empty set".into()));
    }
    let mut cascades = Vec::new();
    let mut slot_i = 0;
    for f in &e.families {
        // p_n = base + s r^n, gap g_n = s r^n (1 - r), pieces (p_n - g_n 2^-m, p_n - g_n 2^-(m+1)), m ≥ 1.
        let rn = Expr::pow(f.ratio.clone(), Expr::n());
        let p = c(f.base.clone()) + c(f.scale.clone()) * rn.clone();
        let g = c(f.scale.clone() * (T::one() - f.ratio.clone())) * rn;
        let half = T::from_frac(1, 2);
        let lo = p.clone() - g.clone() * Expr::pow(half.clone(), Expr::m());
        let hi = p - g * Expr::pow(half.clone(), Expr::m() + Expr::int(1));
        let k = Expr::pairing(Expr::n(), Expr::m());
        cascades.push(Cascade::new(spec(Arity::Two, (0, 1), None, (lo, hi), slot(k, slot_i, total)))?);
        slot_i += 1;
    }
    for x in &e.points {
        let d = feats
            .iter()
            .filter(|y| *y != x)
            .map(|y| (y.clone() - x.clone()).abs())
            .min()
            .map_or_else(T::one, |g| g.half());
        let half = T::from_frac(1, 2);
        let lo = c(x.clone()) - c(d.clone()) * Expr::pow(half.clone(), Expr::n());
        let hi = c(x.clone()) - c(d) * Expr::pow(half, Expr::n() + Expr::int(1));
        cascades.push(Cascade::new(spec(Arity::One, (0, 0), None, (lo, hi), slot(Expr::n(), slot_i, total)))?);
        slot_i += 1;
    }
    let mut s = AdjunctionSystem::new(vec![line_chart(0), line_chart(1)])?;
    s.glue(Transition::new(1, 0, vec![], cascades))?;
    let params = format!(
        "points={};families={}",
        e.points.iter().map(|x| x.fmt_exact()).collect::<Vec<_>>().join(","),
        e.families
            .iter()
            .map(|f| format!("{}+{}*{}^n", f.base.fmt_exact(), f.scale.fmt_exact(), f.ratio.fmt_exact()))
            .collect::<Vec<_>>()
            .join(",")
    );
    let mut exp = Vec::new();
    let ord = EDescriptor {
        points: vec![],
        families: vec![GeoFamily { base: T::zero(), scale: T::one(), ratio: T::from_frac(1, 2) }],
    };
    if *e == ord {
        exp.push(ordinal_nh(Source::Derived));
    }
    Ok(CatalogEntry {
        name: "cascade_e".into(),
        params,
        system: s,
        chart_names: vec![(0, "R0".into()), (1, "R1".into())],
        expectations: exp,
    })
}

fn ordinal_nh<T: Scalar>(src: Source) -> Expectation<T> {
    Expectation::new(
        "NH(0) is the sequence 2^-n with its limit",
        src,
        Expected::Nh {
            p: pt(0, 0, 1),
            isolated: vec![],
            families: vec![FamilyShape {
                first: vec![pt(1, 1, 1), pt(1, 1, 2), pt(1, 1, 4)],
                limit: Some(pt(1, 0, 1)),
                included: true,
            }],
        },
    )
}

/// `NH(0₀) ≅ ω+1`: chart 1 holds `p_n = 2^-n` and 0.
pub fn make_nh_ordinal<T: Scalar>() -> Result<CatalogEntry<T>, CatalogError> {
    let mut e = make_cascade_e(&EDescriptor {
        points: vec![],
        families: vec![GeoFamily { base: T::zero(), scale: T::one(), ratio: T::from_frac(1, 2) }],
    })?;
    e.name = "nh_ordinal".into();
    e.params = String::new();
    e.expectations = vec![
        Expectation::new(
            "0 against p_3",
            Source::Stated,
            Expected::Verdict { p: pt(0, 0, 1), q: pt(1, 1, 8), kind: NotSeparated },
        ),
        ordinal_nh(Source::Stated),
        Expectation::new(
            "0 against 1/3",
            Source::Derived,
            Expected::Verdict { p: pt(0, 0, 1), q: pt(1, 1, 3), kind: Separated },
        ),
    ];
    Ok(e)
}

/// Charts `A = 0`, `B = 1` and `p_c = 2 + c` for the progressions
/// `{n ≥ 1 : n ≡ c mod K}`.
pub fn make_psi_like<T: Scalar>(k: u64) -> Result<CatalogEntry<T>, CatalogError> {
    if k < 2 {
        return Err(CatalogError::InvalidParams("K must be at least 2".into()));
    }
    let kk = k as usize;
    let n = Expr::n;
    let one = || Expr::int(1);
    let two = || Expr::int(2);
    let mut s = AdjunctionSystem::new((0..kk + 2).map(line_chart).collect())?;

    let pair = || Expr::pairing(n(), Expr::m());
    let b_img = || (one() / (pair() + two()), one() / (pair() + one()));
    let a_to_b = spec(
        Arity::Two,
        (0, 0),
        None,
        (two() * n() + one() / (Expr::m() + two()), two() * n() + one() / (Expr::m() + one())),
        b_img(),
    );
    s.glue(Transition::new(0, 1, vec![], vec![Cascade::new(a_to_b)?]))?;

    for cc in 0..k {
        let prog = Some(Progression { modulus: k, residue: cc });
        let to_a = spec(
            Arity::One,
            (1, 0),
            prog,
            (one() / (n() + two()), one() / (n() + one())),
            (two() * n() - one(), two() * n() + one()),
        );
        // The A → B pieces pulled back through (1/(n+2), 1/(n+1)) ↦ (2n-1, 2n+1).
        let scale = two() * (n() + one()) * (n() + two());
        let dom = |d: Expr<T>| one() / (n() + two()) + (one() + one() / d) / scale.clone();
        let to_b = spec(Arity::Two, (1, 0), prog, (dom(Expr::m() + two()), dom(Expr::m() + one())), b_img());
        let chart = 2 + cc as usize;
        s.glue(Transition::new(chart, 0, vec![], vec![Cascade::new(to_a)?]))?;
        s.glue(Transition::new(chart, 1, vec![], vec![Cascade::new(to_b)?]))?;
    }

    let mut names = vec![(0, "A".to_string()), (1, "B".to_string())];
    names.extend((0..kk).map(|c| (2 + c, format!("p{c}"))));
    let mut exp = Vec::new();
    if k == 2 {
        exp.push(Expectation::new(
            "NH(0_B) is the even points of A and every 0_p",
            Source::Stated,
            Expected::Nh {
                p: pt(1, 0, 1),
                isolated: vec![pt(2, 0, 1), pt(3, 0, 1)],
                families: vec![FamilyShape { first: vec![pt(0, 0, 1), pt(0, 2, 1), pt(0, 4, 1)], limit: None, included: false }],
            },
        ));
        exp.push(Expectation::new(
            "0_B against 4_A",
            Source::Stated,
            Expected::Verdict { p: pt(1, 0, 1), q: pt(0, 4, 1), kind: NotSeparated },
        ));
        exp.push(Expectation::new(
            "0_p0 against 0_p1",
            Source::Stated,
            Expected::Verdict { p: pt(2, 0, 1), q: pt(3, 0, 1), kind: Separated },
        ));
        exp.push(Expectation::new(
            "0_B against the odd point 1_A",
            Source::Derived,
            Expected::Verdict { p: pt(1, 0, 1), q: pt(0, 1, 1), kind: Separated },
        ));
    }
    Ok(CatalogEntry { name: "psi_like".into(), params: k.to_string(), system: s, chart_names: names, expectations: exp })
}

/// `I_{n,k} = (-(1/2)^{n+1}(1 + (1/2)^k), -(1/2)^{n+1}(1 + (1/2)^{k+1}))`.
fn i_nk<T: Scalar>(n: Expr<T>, k: Expr<T>) -> (Expr<T>, Expr<T>) {
    let h = T::from_frac(1, 2);
    let outer = Expr::int(-1) * Expr::pow(h.clone(), n + Expr::int(1));
    (
        outer.clone() * (Expr::int(1) + Expr::pow(h.clone(), k.clone())),
        outer * (Expr::int(1) + Expr::pow(h, k + Expr::int(1))),
    )
}

/// Two copies of `(-1, 1)` whose left halves are glued by declared cascades:
/// `I_{n,2m}` on one floor goes to `I_{τ₀(m), 2a+1}` on the other, with
/// `a = 2^n(2τ₁(m)+1) - 1`, and the same rule with the floors swapped.
pub fn make_mutual_sequences<T: Scalar>() -> Result<CatalogEntry<T>, CatalogError> {
    let m = Expr::m;
    let a = Expr::pow(T::from_int(2), Expr::n()) * (Expr::int(2) * Expr::unpair1(m()) + Expr::int(1)) - Expr::int(1);
    let even = i_nk(Expr::n(), Expr::int(2) * m());
    let odd = i_nk(Expr::unpair0(m()), Expr::int(2) * a + Expr::int(1));
    let h = T::from_frac(1, 2);
    let pts = || {
        vec![
            LimitPoint::Family { expr: Expr::int(-1) * Expr::pow(h.clone(), Expr::n() + Expr::int(1)), start: 0 },
            LimitPoint::Fixed(Ext::Fin(T::zero())),
        ]
    };
    let declared = || {
        Tier::Declared(Declared {
            acc: vec![AccDecl { dom: pts(), img: pts() }],
            horizon: 8,
            tolerance: T::from_frac(1, 8),
        })
    };
    let mk = |dom: (Expr<T>, Expr<T>), img: (Expr<T>, Expr<T>)| {
        Cascade::new(CascadeSpec {
            arity: Arity::Two,
            start: (0, 0),
            filter: None,
            dom,
            img,
            orientation: Orientation::Preserve,
            tier: declared(),
        })
    };
    let c1 = mk(even.clone(), odd.clone())?;
    let c2 = mk(odd, even)?;
    let one = T::one();
    let mut s = AdjunctionSystem::new(vec![fin_chart(0, -one.clone(), one.clone()), fin_chart(1, -one.clone(), one)])?;
    s.glue(Transition::new(0, 1, vec![], vec![c1, c2]))?;

    let fam = |chart: usize| FamilyShape {
        first: vec![pt(chart, -1, 2), pt(chart, -1, 4), pt(chart, -1, 8)],
        limit: Some(pt(chart, 0, 1)),
        included: true,
    };
    let exp = vec![
        Expectation::new(
            "NH of 0 on floor 0",
            Source::Stated,
            Expected::Nh { p: pt(0, 0, 1), isolated: vec![], families: vec![fam(1)] },
        ),
        Expectation::new(
            "NH of 0 on floor 1, floors swapped",
            Source::Stated,
            Expected::Nh { p: pt(1, 0, 1), isolated: vec![], families: vec![fam(0)] },
        ),
        Expectation::new(
            "the two zeros",
            Source::Stated,
            Expected::Verdict { p: pt(0, 0, 1), q: pt(1, 0, 1), kind: NotSeparated },
        ),
    ];
    Ok(CatalogEntry {
        name: "mutual_sequences".into(),
        params: String::new(),
        system: s,
        chart_names: vec![(0, "floor0".into()), (1, "floor1".into())],
        expectations: exp,
    })
}
