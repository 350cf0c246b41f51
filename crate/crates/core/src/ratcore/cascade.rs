//! Closed-form infinite families of gluing pieces.
//!
//! Pieces are indexed by `n` (arity 1) or `(n, m)` (arity 2). Queries against
//! windows never enumerate the infinite family: endpoint sequences are
//! monotone in every index (validated up to a horizon), so each window
//! predicate switches value at most once, and the switch index is located by
//! exponential plus binary search. The tail beyond the switch is reported as a
//! [`Cluster`] of pieces lying wholly inside the windows.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use super::affine::{AffinePiece, Orientation};
use super::expr::{EvalError, Expr};
use super::interval::{Ext, Interval, OpenIntervalSet};
use super::limit::{Frac, LimitError, LimitValue};
use crate::scalar::Scalar;

/// Verification horizon for monotonicity and disjointness.
pub const HORIZON: u64 = 64;
/// Per-axis cap for two-index cascades, whose grid has `h²` pieces.
pub const GRID_HORIZON: u64 = 16;
/// Largest stride index a monotone search may visit.
const MAX_SEARCH: u64 = 1 << 26;
/// Largest number of pieces a single query may materialize.
const MAX_PARTIAL: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Arity {
    One,
    Two,
}

/// `n ≡ residue (mod modulus)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Progression {
    pub modulus: u64,
    pub residue: u64,
}

/// One coordinate of a declared accumulation set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LimitPoint<T> {
    Fixed(Ext<T>),
    /// The points `expr(n)` for `n ≥ start`; the limit is not implied.
    Family { expr: Expr<T>, start: u64 },
}

/// Declares that every pair in `dom × img` is an accumulation pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AccDecl<T> {
    pub dom: Vec<LimitPoint<T>>,
    pub img: Vec<LimitPoint<T>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Declared<T> {
    pub acc: Vec<AccDecl<T>>,
    /// Pieces with stride indices below `horizon` are materialized.
    pub horizon: u64,
    /// Distance within which materialized pieces must approach each declared pair.
    pub tolerance: T,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tier<T> {
    Analytic,
    Declared(Declared<T>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CascadeSpec<T> {
    pub arity: Arity,
    /// Least admissible `n` and `m` (`m` ignored for arity 1).
    pub start: (u64, u64),
    pub filter: Option<Progression>,
    pub dom: (Expr<T>, Expr<T>),
    pub img: (Expr<T>, Expr<T>),
    pub orientation: Orientation,
    pub tier: Tier<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Idx {
    pub n: u64,
    pub m: u64,
}

impl fmt::Display for Idx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.n, self.m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Dom,
    Img,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Dom => Side::Img,
            Side::Img => Side::Dom,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CascadeError {
    #[error("index {0} out of range")]
    IndexOutOfRange(Idx),
    #[error(transparent)]
    Limit(#[from] LimitError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("piece diameters do not vanish: {0}")]
    NonVanishingDiameter(String),
    #[error("endpoint sequence is not monotone: {0}")]
    NotMonotone(String),
    #[error("empty piece at index {0}")]
    EmptyPiece(Idx),
    #[error("pieces {0} and {1} overlap")]
    Overlap(Idx, Idx),
    #[error("monotone search exceeded its index budget")]
    SearchExhausted,
    #[error("window boundary sits on an accumulation point approached from both sides")]
    NonUniform,
    #[error("query would materialize too many pieces")]
    TooManyPieces,
    #[error("declared accumulation data inconclusive at the horizon")]
    TierTwoInconclusive,
    #[error("declared accumulation pair not confirmed: {0}")]
    TierTwoUnconfirmed(String),
}

/// A set of pieces lying wholly inside the query windows.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Cluster {
    /// Arity 1: every admissible `n` in `[from, to)`.
    Run { from: u64, to: Option<u64> },
    /// Arity 2: family `n`, every `m` in `[from, to)`.
    Family { n: u64, from: u64, to: Option<u64> },
    /// Arity 2: every admissible `n` in `[from, to)`, all `m`.
    Block { from: u64, to: Option<u64> },
    /// Declared tier: pieces beyond the horizon near declared pair `k`.
    Declared(usize),
}

impl Cluster {
    pub fn is_infinite(&self) -> bool {
        match self {
            Cluster::Run { to, .. } | Cluster::Family { to, .. } | Cluster::Block { to, .. } => {
                to.is_none()
            }
            Cluster::Declared(_) => true,
        }
    }
}

/// Result of a window query.
#[derive(Clone, Debug)]
pub struct Plan<T> {
    /// Pieces meeting the windows but not wholly inside them.
    pub partial: Vec<(Idx, AffinePiece<T>)>,
    pub clusters: Vec<Cluster>,
}

impl<T> Default for Plan<T> {
    fn default() -> Self {
        Plan { partial: Vec::new(), clusters: Vec::new() }
    }
}

impl<T> Plan<T> {
    pub fn is_empty(&self) -> bool {
        self.partial.is_empty() && self.clusters.is_empty()
    }
}

/// One side of an accumulation pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AccPoint<T> {
    Fixed(Ext<T>),
    /// Points `expr(n)` over the admissible outer indices.
    Family { expr: Expr<T>, start: u64, filter: Option<Progression> },
}

impl<T: Scalar> fmt::Display for AccPoint<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AccPoint::Fixed(e) => write!(f, "{e}"),
            AccPoint::Family { expr, start, filter: None } => write!(f, "{expr} [n ≥ {start}]"),
            AccPoint::Family { expr, start, filter: Some(p) } => {
                write!(f, "{expr} [n ≥ {start}, n ≡ {} mod {}]", p.residue, p.modulus)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AccKind {
    Single,
    Family,
    Double,
    Declared,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AccPair<T> {
    pub kind: AccKind,
    pub dom: AccPoint<T>,
    pub img: AccPoint<T>,
}

/// How a point pair matches an accumulation pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AccMatch {
    Single,
    Family(u64),
    Double,
    Declared(usize),
}

/// Where a family-limit equation holds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solve {
    Never,
    At(u64),
    Always,
}

#[derive(Clone, Debug)]
struct SideAnalysis<T> {
    /// Arity 1: the limit. Arity 2: `lim_m` with `n` free.
    fam: LimitValue<T>,
    /// Arity 1: the limit. Arity 2: `lim_n lim_m`.
    dbl: Ext<T>,
    /// Arity 2: `lim_n` of the endpoints of the first piece of each family.
    outer: (Ext<T>, Ext<T>),
}

#[derive(Clone, Debug)]
struct DeclaredData<T> {
    pieces: Vec<(Idx, AffinePiece<T>)>,
    confirmed: Result<(), String>,
    /// Finite coordinates of each declared pair up to the horizon, limits included.
    acc_pts: Vec<[Vec<T>; 2]>,
}

#[derive(Clone, Debug)]
pub struct Cascade<T> {
    spec: CascadeSpec<T>,
    first_n: u64,
    stride: u64,
    an: Option<(SideAnalysis<T>, SideAnalysis<T>)>,
    decl: Option<DeclaredData<T>>,
}

/// `[a, b)` over stride indices; `b = None` is unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct JRange {
    a: u64,
    b: Option<u64>,
}

impl JRange {
    const ALL: JRange = JRange { a: 0, b: None };
    const NONE: JRange = JRange { a: 0, b: Some(0) };

    fn is_empty(&self) -> bool {
        matches!(self.b, Some(b) if b <= self.a)
    }

    fn meet(self, o: JRange) -> JRange {
        let a = self.a.max(o.a);
        let b = match (self.b, o.b) {
            (None, x) | (x, None) => x,
            (Some(x), Some(y)) => Some(x.min(y)),
        };
        JRange { a, b }
    }

    fn len(&self) -> Option<u64> {
        self.b.map(|b| b.saturating_sub(self.a))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Rel {
    Lt,
    Le,
    Gt,
    Ge,
}

fn rel_holds<T: Ord>(x: &T, rel: Rel, c: &T) -> bool {
    match rel {
        Rel::Lt => x < c,
        Rel::Le => x <= c,
        Rel::Gt => x > c,
        Rel::Ge => x >= c,
    }
}

/// Stride range on which `f(j) rel c` holds, for `f` monotone with limit `lim`.
fn monotone_range<T: Scalar>(
    f: &dyn Fn(u64) -> Result<Ext<T>, CascadeError>,
    lim: &Ext<T>,
    rel: Rel,
    c: &Ext<T>,
) -> Result<JRange, CascadeError> {
    let all_or_none = |b: bool| if b { JRange::ALL } else { JRange::NONE };
    let v0 = rel_holds(&f(0)?, rel, c);
    let eventual = if lim != c {
        rel_holds(lim, rel, c)
    } else {
        // The sequence approaches c from one side and never crosses it.
        let far = rel_holds(&f(1 << 10)?, rel, c);
        if far != v0 {
            far
        } else {
            v0
        }
    };
    if eventual == v0 {
        return Ok(all_or_none(v0));
    }
    let mut hi = 1u64;
    while rel_holds(&f(hi)?, rel, c) != eventual {
        hi *= 2;
        if hi > MAX_SEARCH {
            return Err(CascadeError::SearchExhausted);
        }
    }
    let mut lo = hi / 2; // predicate still equals v0 at lo
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if rel_holds(&f(mid)?, rel, c) == eventual {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(if v0 { JRange { a: 0, b: Some(hi) } } else { JRange { a: hi, b: None } })
}

/// A window on one side of the pieces.
#[derive(Clone, Debug)]
struct SideWin<T> {
    lo: Ext<T>,
    hi: Ext<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    /// Open pieces meeting open windows.
    Open,
    /// Closed pieces meeting closed windows.
    Closed,
}

struct Query<T> {
    dom: Option<SideWin<T>>,
    img: Option<SideWin<T>>,
    mode: Mode,
}

impl<T: Scalar> Query<T> {
    fn side(&self, s: Side) -> Option<&SideWin<T>> {
        match s {
            Side::Dom => self.dom.as_ref(),
            Side::Img => self.img.as_ref(),
        }
    }
}

/// One level of the index hierarchy: endpoints and their limits per side.
trait Level<T> {
    fn lo(&self, s: Side, j: u64) -> Result<Ext<T>, CascadeError>;
    fn hi(&self, s: Side, j: u64) -> Result<Ext<T>, CascadeError>;
    fn lim_lo(&self, s: Side) -> Ext<T>;
    fn lim_hi(&self, s: Side) -> Ext<T>;
}

fn hits<T: Scalar>(p: &AffinePiece<T>, dom: &Interval<T>, img: &Interval<T>) -> bool {
    p.push(dom).is_some_and(|i| i.meets(img))
}

/// The members of a declared limit point up to the horizon, and its limit.
fn limit_point_values<T: Scalar>(lp: &LimitPoint<T>) -> Vec<T> {
    match lp {
        LimitPoint::Fixed(Ext::Fin(v)) => vec![v.clone()],
        LimitPoint::Fixed(_) => vec![],
        LimitPoint::Family { expr, start } => {
            let mut out: Vec<T> = (0..HORIZON).filter_map(|j| expr.eval(start + j, 0).ok()).collect();
            if let Some(Ext::Fin(l)) = Frac::from_expr(expr).ok().and_then(|f| f.lim_n().ok()) {
                out.push(l);
            }
            out
        }
    }
}

/// `(meets, inside)` stride ranges of a level.
fn level_ranges<T: Scalar>(lv: &dyn Level<T>, q: &Query<T>) -> Result<(JRange, JRange), CascadeError> {
    let mut meets = JRange::ALL;
    let mut inside = JRange::ALL;
    for s in [Side::Dom, Side::Img] {
        let Some(w) = q.side(s) else { continue };
        let lo_f = |j| lv.lo(s, j);
        let hi_f = |j| lv.hi(s, j);
        let (r1, r2) = match q.mode {
            Mode::Open => (Rel::Lt, Rel::Gt),
            Mode::Closed => (Rel::Le, Rel::Ge),
        };
        meets = meets.meet(monotone_range(&lo_f, &lv.lim_lo(s), r1, &w.hi)?);
        if meets.is_empty() {
            return Ok((JRange::NONE, JRange::NONE));
        }
        meets = meets.meet(monotone_range(&hi_f, &lv.lim_hi(s), r2, &w.lo)?);
        if meets.is_empty() {
            return Ok((JRange::NONE, JRange::NONE));
        }
        if q.mode == Mode::Open {
            inside = inside.meet(monotone_range(&lo_f, &lv.lim_lo(s), Rel::Ge, &w.lo)?);
            inside = inside.meet(monotone_range(&hi_f, &lv.lim_hi(s), Rel::Le, &w.hi)?);
        }
    }
    if q.mode == Mode::Closed {
        inside = JRange::NONE;
    }
    Ok((meets, inside.meet(meets)))
}

/// Splits `meets` into the part outside `inside` (at most two runs).
fn outside_runs(meets: JRange, inside: JRange) -> Result<Vec<(u64, u64)>, CascadeError> {
    if meets.is_empty() {
        return Ok(vec![]);
    }
    if inside.is_empty() {
        let b = meets.b.ok_or(CascadeError::NonUniform)?;
        return Ok(vec![(meets.a, b)]);
    }
    let mut out = Vec::new();
    if meets.a < inside.a {
        out.push((meets.a, inside.a));
    }
    if let Some(ib) = inside.b {
        match meets.b {
            Some(mb) if mb > ib => out.push((ib, mb)),
            None => return Err(CascadeError::NonUniform),
            _ => {}
        }
    }
    let total: u64 = out.iter().map(|(a, b)| b - a).sum();
    if total as usize > MAX_PARTIAL {
        return Err(CascadeError::TooManyPieces);
    }
    Ok(out)
}

struct OneLevel<'a, T> {
    c: &'a Cascade<T>,
}

impl<'a, T: Scalar> Level<T> for OneLevel<'a, T> {
    fn lo(&self, s: Side, j: u64) -> Result<Ext<T>, CascadeError> {
        Ok(Ext::Fin(self.c.expr(s, false).eval(self.c.nth(j), 0)?))
    }
    fn hi(&self, s: Side, j: u64) -> Result<Ext<T>, CascadeError> {
        Ok(Ext::Fin(self.c.expr(s, true).eval(self.c.nth(j), 0)?))
    }
    fn lim_lo(&self, s: Side) -> Ext<T> {
        self.c.side_an(s).dbl.clone()
    }
    fn lim_hi(&self, s: Side) -> Ext<T> {
        self.c.side_an(s).dbl.clone()
    }
}

/// Family hulls over the outer index.
struct OuterLevel<'a, T> {
    c: &'a Cascade<T>,
}

impl<'a, T: Scalar> Level<T> for OuterLevel<'a, T> {
    fn lo(&self, s: Side, j: u64) -> Result<Ext<T>, CascadeError> {
        let n = self.c.nth(j);
        let first = Ext::Fin(self.c.expr(s, false).eval(n, self.c.spec.start.1)?);
        Ok(first.min(self.c.fam_at(s, n)?))
    }
    fn hi(&self, s: Side, j: u64) -> Result<Ext<T>, CascadeError> {
        let n = self.c.nth(j);
        let first = Ext::Fin(self.c.expr(s, true).eval(n, self.c.spec.start.1)?);
        Ok(first.max(self.c.fam_at(s, n)?))
    }
    fn lim_lo(&self, s: Side) -> Ext<T> {
        let a = self.c.side_an(s);
        a.outer.0.clone().min(a.dbl.clone())
    }
    fn lim_hi(&self, s: Side) -> Ext<T> {
        let a = self.c.side_an(s);
        a.outer.1.clone().max(a.dbl.clone())
    }
}

/// The pieces of one family over the inner index.
struct InnerLevel<'a, T> {
    c: &'a Cascade<T>,
    n: u64,
    lims: (Ext<T>, Ext<T>),
}

impl<'a, T: Scalar> Level<T> for InnerLevel<'a, T> {
    fn lo(&self, s: Side, j: u64) -> Result<Ext<T>, CascadeError> {
        Ok(Ext::Fin(self.c.expr(s, false).eval(self.n, self.c.spec.start.1 + j)?))
    }
    fn hi(&self, s: Side, j: u64) -> Result<Ext<T>, CascadeError> {
        Ok(Ext::Fin(self.c.expr(s, true).eval(self.n, self.c.spec.start.1 + j)?))
    }
    fn lim_lo(&self, s: Side) -> Ext<T> {
        match s {
            Side::Dom => self.lims.0.clone(),
            Side::Img => self.lims.1.clone(),
        }
    }
    fn lim_hi(&self, s: Side) -> Ext<T> {
        self.lim_lo(s)
    }
}

fn dist_to<T: Scalar>(iv: &Interval<T>, x: &T) -> Option<T> {
    if iv.closure_contains(x) {
        return Some(T::zero());
    }
    match (&iv.lo, &iv.hi) {
        (Ext::Fin(a), _) if x < a => Some(a.clone() - x.clone()),
        (_, Ext::Fin(b)) if x > b => Some(x.clone() - b.clone()),
        _ => None,
    }
}

impl<T: Scalar> Cascade<T> {
    pub fn new(spec: CascadeSpec<T>) -> Result<Self, CascadeError> {
        let (first_n, stride) = match spec.filter {
            None => (spec.start.0, 1),
            Some(p) => {
                let k = p.modulus.max(1);
                let r = p.residue % k;
                let s = spec.start.0;
                let first = s + (r + k - s % k) % k;
                (first, k)
            }
        };
        let mut c = Cascade { spec, first_n, stride, an: None, decl: None };
        match &c.spec.tier {
            Tier::Analytic => {
                let d = c.analyze(Side::Dom)?;
                let i = c.analyze(Side::Img)?;
                c.an = Some((d, i));
            }
            Tier::Declared(dc) => {
                let pieces = c.materialize_raw(dc.horizon)?;
                let pts = |lps: &[LimitPoint<T>]| lps.iter().flat_map(limit_point_values).collect::<Vec<T>>();
                let acc_pts = dc.acc.iter().map(|a| [pts(&a.dom), pts(&a.img)]).collect();
                c.decl = Some(DeclaredData { pieces, confirmed: Ok(()), acc_pts });
                let confirmed = c.confirm_declared();
                c.decl.as_mut().unwrap().confirmed = confirmed;
            }
        }
        Ok(c)
    }

    pub fn spec(&self) -> &CascadeSpec<T> {
        &self.spec
    }

    pub fn arity(&self) -> Arity {
        self.spec.arity
    }

    pub fn is_declared(&self) -> bool {
        matches!(self.spec.tier, Tier::Declared(_))
    }

    /// Declared tier: whether every declared pair was confirmed at the horizon.
    pub fn confirmation(&self) -> Result<(), String> {
        match &self.decl {
            Some(d) => d.confirmed.clone(),
            None => Ok(()),
        }
    }

    fn expr(&self, s: Side, hi: bool) -> &Expr<T> {
        let pair = match s {
            Side::Dom => &self.spec.dom,
            Side::Img => &self.spec.img,
        };
        if hi { &pair.1 } else { &pair.0 }
    }

    fn side_an(&self, s: Side) -> &SideAnalysis<T> {
        let (d, i) = self.an.as_ref().expect("analytic cascade");
        match s {
            Side::Dom => d,
            Side::Img => i,
        }
    }

    /// Admissible outer index of stride position `j`.
    pub fn nth(&self, j: u64) -> u64 {
        self.first_n + self.stride * j
    }

    /// Stride position of `n`, if admissible.
    pub fn position(&self, n: u64) -> Option<u64> {
        (n >= self.first_n && (n - self.first_n) % self.stride == 0)
            .then(|| (n - self.first_n) / self.stride)
    }

    pub fn valid(&self, idx: Idx) -> bool {
        self.position(idx.n).is_some()
            && match self.spec.arity {
                Arity::One => idx.m == 0,
                Arity::Two => idx.m >= self.spec.start.1,
            }
    }

    fn fam_at(&self, s: Side, n: u64) -> Result<Ext<T>, CascadeError> {
        match &self.side_an(s).fam {
            LimitValue::Ext(e) => Ok(e.clone()),
            LimitValue::ClosedForm(f) => f
                .eval(n, 0)
                .map(Ext::Fin)
                .ok_or(CascadeError::Eval(EvalError::DivisionByZero((n, 0)))),
            LimitValue::NoLimit => Err(CascadeError::NonUniform),
        }
    }

    fn analyze(&self, s: Side) -> Result<SideAnalysis<T>, CascadeError> {
        let lo = Frac::from_expr(self.expr(s, false))?;
        let hi = Frac::from_expr(self.expr(s, true))?;
        let side = match s {
            Side::Dom => "domain",
            Side::Img => "image",
        };
        match self.spec.arity {
            Arity::One => {
                if lo.uses_m() || hi.uses_m() {
                    return Err(LimitError::GrammarUnsupported("m in an arity-1 cascade".into()).into());
                }
                let (a, b) = (lo.lim_n()?, hi.lim_n()?);
                if a != b {
                    return Err(CascadeError::NonVanishingDiameter(format!(
                        "{side} endpoints tend to {a} and {b}"
                    )));
                }
                Ok(SideAnalysis { fam: LimitValue::Ext(a.clone()), dbl: a.clone(), outer: (a.clone(), a) })
            }
            Arity::Two => {
                let h = HORIZON;
                let fa = lo.lim_m(self.first_n, h)?;
                let fb = hi.lim_m(self.first_n, h)?;
                if matches!(fa, LimitValue::NoLimit) || !fa.same_as(&fb) {
                    return Err(CascadeError::NonVanishingDiameter(format!(
                        "{side} endpoints of a family tend to {fa} and {fb}"
                    )));
                }
                let dbl = fa.outer()?;
                let m0 = self.spec.start.1;
                let o0 = lo.subst_m(m0)?.lim_n()?;
                let o1 = hi.subst_m(m0)?.lim_n()?;
                if o0 != dbl || o1 != dbl {
                    return Err(CascadeError::NonVanishingDiameter(format!(
                        "{side} family hulls do not shrink to {dbl}"
                    )));
                }
                Ok(SideAnalysis { fam: fa, dbl, outer: (o0, o1) })
            }
        }
    }

    fn raw_piece(&self, idx: Idx) -> Result<AffinePiece<T>, CascadeError> {
        let ev = |e: &Expr<T>| e.eval(idx.n, idx.m);
        let dom = Interval::fin(ev(&self.spec.dom.0)?, ev(&self.spec.dom.1)?)
            .ok_or(CascadeError::EmptyPiece(idx))?;
        let img = Interval::fin(ev(&self.spec.img.0)?, ev(&self.spec.img.1)?)
            .ok_or(CascadeError::EmptyPiece(idx))?;
        AffinePiece::between(dom, &img, self.spec.orientation).ok_or(CascadeError::EmptyPiece(idx))
    }

    /// The materialized piece at `idx`.
    pub fn piece(&self, idx: Idx) -> Result<AffinePiece<T>, CascadeError> {
        if !self.valid(idx) {
            return Err(CascadeError::IndexOutOfRange(idx));
        }
        self.raw_piece(idx)
    }

    fn idx_at(&self, j: u64, mj: u64) -> Idx {
        match self.spec.arity {
            Arity::One => Idx { n: self.nth(j), m: 0 },
            Arity::Two => Idx { n: self.nth(j), m: self.spec.start.1 + mj },
        }
    }

    fn materialize_raw(&self, h: u64) -> Result<Vec<(Idx, AffinePiece<T>)>, CascadeError> {
        let mut out = Vec::new();
        for j in 0..h {
            match self.spec.arity {
                Arity::One => {
                    let idx = self.idx_at(j, 0);
                    out.push((idx, self.raw_piece(idx)?));
                }
                Arity::Two => {
                    for mj in 0..h {
                        let idx = self.idx_at(j, mj);
                        out.push((idx, self.raw_piece(idx)?));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Pieces with every stride index below `h`.
    pub fn materialize(&self, h: u64) -> Result<Vec<(Idx, AffinePiece<T>)>, CascadeError> {
        if let Some(d) = &self.decl {
            return Ok(d.pieces.iter().filter(|(i, _)| self.stride_pos(*i) < (h, h)).cloned().collect());
        }
        self.materialize_raw(h)
    }

    fn stride_pos(&self, i: Idx) -> (u64, u64) {
        let j = self.position(i.n).unwrap_or(u64::MAX);
        (j, i.m.saturating_sub(self.spec.start.1))
    }

    /// Monotonicity, nonemptiness and disjointness up to horizon `h`.
    pub fn verify(&self, h: u64) -> Result<(), CascadeError> {
        let h = match &self.spec.tier {
            Tier::Declared(d) => h.min(d.horizon),
            Tier::Analytic => h,
        };
        let h = if self.spec.arity == Arity::Two { h.min(GRID_HORIZON) } else { h };
        let pieces = self.materialize_raw(h)?;
        for s in [Side::Dom, Side::Img] {
            let mut ivs: Vec<(Interval<T>, Idx)> = pieces
                .iter()
                .map(|(i, p)| (if s == Side::Dom { p.dom.clone() } else { p.img() }, *i))
                .collect();
            ivs.sort_by(|a, b| a.0.lo.cmp(&b.0.lo));
            for w in ivs.windows(2) {
                if w[1].0.lo < w[0].0.hi {
                    return Err(CascadeError::Overlap(w[0].1, w[1].1));
                }
            }
        }
        if self.is_declared() {
            return Ok(());
        }
        let check = |seq: Vec<Ext<T>>, what: String| -> Result<(), CascadeError> {
            let mut dir = Ordering::Equal;
            for w in seq.windows(2) {
                let o = w[1].cmp(&w[0]);
                if o != Ordering::Equal {
                    if dir != Ordering::Equal && o != dir {
                        return Err(CascadeError::NotMonotone(what));
                    }
                    dir = o;
                }
            }
            Ok(())
        };
        for s in [Side::Dom, Side::Img] {
            match self.spec.arity {
                Arity::One => {
                    let lv = OneLevel { c: self };
                    check((0..h).map(|j| lv.lo(s, j)).collect::<Result<_, _>>()?, format!("{s:?} lo"))?;
                    check((0..h).map(|j| lv.hi(s, j)).collect::<Result<_, _>>()?, format!("{s:?} hi"))?;
                }
                Arity::Two => {
                    let lv = OuterLevel { c: self };
                    check((0..h).map(|j| lv.lo(s, j)).collect::<Result<_, _>>()?, format!("{s:?} hull lo"))?;
                    check((0..h).map(|j| lv.hi(s, j)).collect::<Result<_, _>>()?, format!("{s:?} hull hi"))?;
                    for j in 0..h {
                        let n = self.nth(j);
                        let inner = InnerLevel { c: self, n, lims: (Ext::NegInf, Ext::NegInf) };
                        let lo: Vec<_> = (0..h).map(|k| inner.lo(s, k)).collect::<Result<_, _>>()?;
                        let hi: Vec<_> = (0..h).map(|k| inner.hi(s, k)).collect::<Result<_, _>>()?;
                        check(lo, format!("{s:?} lo of family {n}"))?;
                        check(hi, format!("{s:?} hi of family {n}"))?;
                    }
                }
            }
        }
        Ok(())
    }

    /// The inverse family: domain and image exchanged.
    pub fn inverse(&self) -> Result<Self, CascadeError> {
        let mut spec = self.spec.clone();
        std::mem::swap(&mut spec.dom, &mut spec.img);
        if let Tier::Declared(d) = &mut spec.tier {
            for a in &mut d.acc {
                std::mem::swap(&mut a.dom, &mut a.img);
            }
        }
        Cascade::new(spec)
    }

    fn window(iv: Option<&Interval<T>>) -> Option<SideWin<T>> {
        iv.map(|w| SideWin { lo: w.lo.clone(), hi: w.hi.clone() })
    }

    /// Pieces meeting the given windows (either may be absent).
    pub fn plan(&self, dom: Option<&Interval<T>>, img: Option<&Interval<T>>) -> Result<Plan<T>, CascadeError> {
        let q = Query { dom: Self::window(dom), img: Self::window(img), mode: Mode::Open };
        if self.decl.is_some() {
            return self.plan_declared(dom, img);
        }
        let mut plan = Plan::default();
        match self.spec.arity {
            Arity::One => {
                let (meets, inside) = level_ranges(&OneLevel { c: self }, &q)?;
                for (a, b) in outside_runs(meets, inside)? {
                    for j in a..b {
                        let idx = self.idx_at(j, 0);
                        plan.partial.push((idx, self.raw_piece(idx)?));
                    }
                }
                if !inside.is_empty() {
                    plan.clusters.push(Cluster::Run {
                        from: self.nth(inside.a),
                        to: inside.b.map(|b| self.nth(b)),
                    });
                }
            }
            Arity::Two => {
                let (meets, inside) = level_ranges(&OuterLevel { c: self }, &q)?;
                if !inside.is_empty() {
                    plan.clusters.push(Cluster::Block {
                        from: self.nth(inside.a),
                        to: inside.b.map(|b| self.nth(b)),
                    });
                }
                for (a, b) in outside_runs(meets, inside)? {
                    for j in a..b {
                        self.plan_family(j, &q, &mut plan)?;
                        if plan.partial.len() > MAX_PARTIAL {
                            return Err(CascadeError::TooManyPieces);
                        }
                    }
                }
            }
        }
        Ok(plan)
    }

    /// Pieces whose side `s` meets `window`, and whether infinitely many more
    /// pile up inside it. Those are summarized by the flag, not listed.
    pub fn pieces_meeting(
        &self,
        window: &OpenIntervalSet<T>,
        s: Side,
    ) -> Result<(Vec<(Idx, AffinePiece<T>)>, bool), CascadeError> {
        let mut out: Vec<(Idx, AffinePiece<T>)> = Vec::new();
        let mut tail = false;
        for iv in window.intervals() {
            let plan = match s {
                Side::Dom => self.plan(Some(iv), None)?,
                Side::Img => self.plan(None, Some(iv))?,
            };
            out.extend(plan.partial);
            for cl in &plan.clusters {
                match cl {
                    Cluster::Declared(_) => return Err(CascadeError::TierTwoInconclusive),
                    c if c.is_infinite() => tail = true,
                    c => out.extend(self.cluster_pieces(c, MAX_PARTIAL as u64)?),
                }
            }
        }
        out.sort_by_key(|(idx, _)| *idx);
        out.dedup_by_key(|(idx, _)| *idx);
        Ok((out, tail))
    }

    fn inner(&self, j: u64) -> Result<InnerLevel<'_, T>, CascadeError> {
        let n = self.nth(j);
        Ok(InnerLevel { c: self, n, lims: (self.fam_at(Side::Dom, n)?, self.fam_at(Side::Img, n)?) })
    }

    fn plan_family(&self, j: u64, q: &Query<T>, plan: &mut Plan<T>) -> Result<(), CascadeError> {
        let lv = self.inner(j)?;
        let (meets, inside) = level_ranges(&lv, q)?;
        for (a, b) in outside_runs(meets, inside)? {
            for mj in a..b {
                let idx = self.idx_at(j, mj);
                plan.partial.push((idx, self.raw_piece(idx)?));
            }
        }
        if !inside.is_empty() {
            let m0 = self.spec.start.1;
            plan.clusters.push(Cluster::Family {
                n: lv.n,
                from: m0 + inside.a,
                to: inside.b.map(|b| m0 + b),
            });
        }
        Ok(())
    }

    fn plan_declared(&self, dom: Option<&Interval<T>>, img: Option<&Interval<T>>) -> Result<Plan<T>, CascadeError> {
        let d = self.decl.as_ref().unwrap();
        let mut plan = Plan::default();
        for (idx, p) in &d.pieces {
            let ok_d = dom.is_none_or(|w| w.meets(&p.dom));
            let ok_i = img.is_none_or(|w| w.meets(&p.img()));
            if ok_d && ok_i {
                plan.partial.push((*idx, p.clone()));
            }
        }
        for (k, [pd, pi]) in d.acc_pts.iter().enumerate() {
            let hit = |pts: &[T], w: Option<&Interval<T>>| w.is_none_or(|w| pts.iter().any(|v| w.contains(v)));
            if hit(pd, dom) && hit(pi, img) {
                plan.clusters.push(Cluster::Declared(k));
            }
        }
        Ok(plan)
    }

    /// Pieces whose closed domain contains `x` and closed image contains `y`.
    /// The pair must not be an accumulation pair of the cascade.
    pub fn touching(&self, x: &T, y: &T) -> Result<Vec<(Idx, AffinePiece<T>)>, CascadeError> {
        if let Some(d) = &self.decl {
            return Ok(d
                .pieces
                .iter()
                .filter(|(_, p)| p.dom.closure_contains(x) && p.img().closure_contains(y))
                .cloned()
                .collect());
        }
        let pt = |v: &T| Some(SideWin { lo: Ext::Fin(v.clone()), hi: Ext::Fin(v.clone()) });
        let q = Query { dom: pt(x), img: pt(y), mode: Mode::Closed };
        self.closed_search(&q)
    }

    /// Pieces whose closed domain (or image) contains `v`.
    pub fn touching_side(&self, s: Side, v: &T) -> Result<Vec<(Idx, AffinePiece<T>)>, CascadeError> {
        if let Some(d) = &self.decl {
            return Ok(d
                .pieces
                .iter()
                .filter(|(_, p)| match s {
                    Side::Dom => p.dom.closure_contains(v),
                    Side::Img => p.img().closure_contains(v),
                })
                .cloned()
                .collect());
        }
        let w = Some(SideWin { lo: Ext::Fin(v.clone()), hi: Ext::Fin(v.clone()) });
        let q = match s {
            Side::Dom => Query { dom: w, img: None, mode: Mode::Closed },
            Side::Img => Query { dom: None, img: w, mode: Mode::Closed },
        };
        let target = Ext::Fin(v.clone());
        match self.spec.arity {
            Arity::One => self.closed_search(&q),
            Arity::Two => {
                let (meets, _) = level_ranges(&OuterLevel { c: self }, &q)?;
                if meets.b.is_some() {
                    return self.closed_search(&q);
                }
                // Infinitely many hulls touch v: only possible when v is the
                // double limit, and then no piece of a family converging to v
                // can have v as an endpoint.
                if self.side_an(s).dbl != target {
                    return Err(CascadeError::NonUniform);
                }
                match &self.side_an(s).fam {
                    LimitValue::Ext(e) if *e == target => Ok(vec![]),
                    _ => Err(CascadeError::NonUniform),
                }
            }
        }
    }

    fn closed_search(&self, q: &Query<T>) -> Result<Vec<(Idx, AffinePiece<T>)>, CascadeError> {
        let mut out = Vec::new();
        let run = |meets: JRange| -> Result<(u64, u64), CascadeError> {
            let b = meets.b.ok_or(CascadeError::NonUniform)?;
            if meets.len().unwrap_or(0) as usize > MAX_PARTIAL {
                return Err(CascadeError::TooManyPieces);
            }
            Ok((meets.a, b))
        };
        match self.spec.arity {
            Arity::One => {
                let (meets, _) = level_ranges(&OneLevel { c: self }, q)?;
                if meets.is_empty() {
                    return Ok(out);
                }
                let (a, b) = run(meets)?;
                for j in a..b {
                    let idx = self.idx_at(j, 0);
                    out.push((idx, self.raw_piece(idx)?));
                }
            }
            Arity::Two => {
                let (meets, _) = level_ranges(&OuterLevel { c: self }, q)?;
                if meets.is_empty() {
                    return Ok(out);
                }
                let (a, b) = run(meets)?;
                for j in a..b {
                    let lv = self.inner(j)?;
                    // A family never touches its own limit point.
                    let at_limit = [Side::Dom, Side::Img].iter().any(|s| match q.side(*s) {
                        Some(w) => w.lo == lv.lim_lo(*s),
                        None => false,
                    });
                    let (m_meets, _) = level_ranges(&lv, q)?;
                    if m_meets.is_empty() {
                        continue;
                    }
                    if m_meets.b.is_none() && at_limit {
                        continue;
                    }
                    let (ma, mb) = run(m_meets)?;
                    for mj in ma..mb {
                        let idx = self.idx_at(j, mj);
                        out.push((idx, self.raw_piece(idx)?));
                    }
                }
            }
        }
        Ok(out)
    }

    /// The piece whose open domain (or image) contains `v`, if any.
    pub fn containing(&self, s: Side, v: &T) -> Result<Option<(Idx, AffinePiece<T>)>, CascadeError> {
        let found = self.touching_side(s, v)?;
        Ok(found.into_iter().find(|(_, p)| match s {
            Side::Dom => p.dom.contains(v),
            Side::Img => p.img().contains(v),
        }))
    }

    /// Solves `fam_s(n) = v` over admissible `n` (arity 2).
    pub fn solve_family(&self, s: Side, v: &T) -> Result<Solve, CascadeError> {
        let target = Ext::Fin(v.clone());
        match &self.side_an(s).fam {
            LimitValue::Ext(e) => Ok(if *e == target { Solve::Always } else { Solve::Never }),
            LimitValue::NoLimit => Err(CascadeError::NonUniform),
            LimitValue::ClosedForm(f) => {
                if f.minus_const(v).is_zero() {
                    return Ok(Solve::Always);
                }
                let g = |j: u64| self.fam_at(s, self.nth(j));
                let lim = self.side_an(s).dbl.clone();
                let g0 = g(0)?;
                if g0 == target {
                    return Ok(Solve::At(self.nth(0)));
                }
                let rel = match g0.cmp(&lim) {
                    Ordering::Less => Rel::Ge,
                    Ordering::Greater => Rel::Le,
                    Ordering::Equal => return Ok(Solve::Never),
                };
                let r = monotone_range(&g, &lim, rel, &target)?;
                if r.is_empty() || r.b.is_some() {
                    return Ok(Solve::Never);
                }
                Ok(if g(r.a)? == target { Solve::At(self.nth(r.a)) } else { Solve::Never })
            }
        }
    }

    /// Whether `(x, y)` is an accumulation pair; returns how it matches.
    pub fn acc_match(&self, x: &T, y: &T) -> Result<Option<AccMatch>, CascadeError> {
        if let Tier::Declared(dc) = &self.spec.tier {
            for (k, a) in dc.acc.iter().enumerate() {
                if a.dom.iter().any(|p| self.lp_contains(p, x)) && a.img.iter().any(|p| self.lp_contains(p, y)) {
                    return Ok(Some(AccMatch::Declared(k)));
                }
            }
            return Ok(None);
        }
        let (fx, fy) = (Ext::Fin(x.clone()), Ext::Fin(y.clone()));
        let (d, i) = self.an.as_ref().unwrap();
        if d.dbl == fx && i.dbl == fy {
            return Ok(Some(match self.spec.arity {
                Arity::One => AccMatch::Single,
                Arity::Two => AccMatch::Double,
            }));
        }
        if self.spec.arity == Arity::One {
            return Ok(None);
        }
        let check = |n: u64| -> Result<bool, CascadeError> { Ok(self.fam_at(Side::Img, n)? == fy) };
        Ok(match self.solve_family(Side::Dom, x)? {
            Solve::Never => None,
            Solve::At(n) => check(n)?.then_some(AccMatch::Family(n)),
            Solve::Always => match self.solve_family(Side::Img, y)? {
                Solve::Never => None,
                Solve::At(n) => Some(AccMatch::Family(n)),
                Solve::Always => Some(AccMatch::Family(self.first_n)),
            },
        })
    }

    /// Whether `v` is a declared accumulation coordinate on side `s`.
    pub fn is_declared_point(&self, s: Side, v: &T) -> bool {
        let Tier::Declared(dc) = &self.spec.tier else { return false };
        dc.acc.iter().any(|a| {
            let pts = if s == Side::Dom { &a.dom } else { &a.img };
            pts.iter().any(|p| self.lp_contains(p, v))
        })
    }

    fn lp_contains(&self, lp: &LimitPoint<T>, v: &T) -> bool {
        match lp {
            LimitPoint::Fixed(e) => e.fin() == Some(v),
            LimitPoint::Family { expr, start } => {
                let f = |j: u64| expr.eval(start + j, 0).ok();
                let Some(v0) = f(0) else { return false };
                if v0 == *v {
                    return true;
                }
                // Families are monotone: scan until the values pass v.
                let up = f(1).is_some_and(|v1| v1 > v0);
                // A strictly monotone family never reaches its limit, nor anything past it.
                if let Some(l) = Frac::from_expr(expr).ok().and_then(|fr| fr.lim_n().ok()) {
                    let fv = Ext::Fin(v.clone());
                    if (up && fv >= l) || (!up && fv <= l) {
                        return false;
                    }
                }
                for j in 1..4096 {
                    match f(j) {
                        Some(w) if w == *v => return true,
                        Some(w) if (up && w > *v) || (!up && w < *v) => return false,
                        None => return false,
                        _ => {}
                    }
                }
                false
            }
        }
    }

    /// Accumulation partners of a domain point: `(kind, partner)` where the
    /// partner is either a single image point or a family over `n`.
    pub fn partners(&self, x: &T) -> Result<Vec<(AccKind, AccPoint<T>, bool)>, CascadeError> {
        let fx = Ext::Fin(x.clone());
        let mut out = Vec::new();
        if let Tier::Declared(dc) = &self.spec.tier {
            for a in &dc.acc {
                if a.dom.iter().any(|p| self.lp_contains(p, x)) {
                    for p in &a.img {
                        let ap = match p {
                            LimitPoint::Fixed(e) => AccPoint::Fixed(e.clone()),
                            LimitPoint::Family { expr, start } => {
                                AccPoint::Family { expr: expr.clone(), start: *start, filter: None }
                            }
                        };
                        out.push((AccKind::Declared, ap, true));
                    }
                }
            }
            return Ok(out);
        }
        let (d, i) = self.an.as_ref().unwrap();
        let double_hit = d.dbl == fx;
        if double_hit {
            let k = if self.spec.arity == Arity::One { AccKind::Single } else { AccKind::Double };
            out.push((k, AccPoint::Fixed(i.dbl.clone()), true));
        }
        if self.spec.arity == Arity::Two {
            match self.solve_family(Side::Dom, x)? {
                Solve::Never => {}
                Solve::At(n) => out.push((AccKind::Family, AccPoint::Fixed(self.fam_at(Side::Img, n)?), false)),
                Solve::Always => {
                    let expr = match &i.fam {
                        LimitValue::ClosedForm(f) => f.to_expr(),
                        LimitValue::Ext(Ext::Fin(v)) => Expr::Const(v.clone()),
                        _ => return Ok(out),
                    };
                    out.push((
                        AccKind::Family,
                        AccPoint::Family { expr, start: self.spec.start.0, filter: self.spec.filter },
                        double_hit,
                    ));
                }
            }
        }
        Ok(out)
    }

    /// All accumulation pairs.
    pub fn acc_pairs(&self) -> Vec<AccPair<T>> {
        if let Tier::Declared(dc) = &self.spec.tier {
            let conv = |p: &LimitPoint<T>| match p {
                LimitPoint::Fixed(e) => AccPoint::Fixed(e.clone()),
                LimitPoint::Family { expr, start } => {
                    AccPoint::Family { expr: expr.clone(), start: *start, filter: None }
                }
            };
            let mut out = Vec::new();
            for a in &dc.acc {
                for x in &a.dom {
                    for y in &a.img {
                        out.push(AccPair { kind: AccKind::Declared, dom: conv(x), img: conv(y) });
                    }
                }
            }
            return out;
        }
        let (d, i) = self.an.as_ref().unwrap();
        let fam = |s: &SideAnalysis<T>| match &s.fam {
            LimitValue::ClosedForm(f) => AccPoint::Family {
                expr: f.to_expr(),
                start: self.spec.start.0,
                filter: self.spec.filter,
            },
            other => AccPoint::Fixed(other.ext().cloned().unwrap_or(Ext::PosInf)),
        };
        match self.spec.arity {
            Arity::One => vec![AccPair {
                kind: AccKind::Single,
                dom: AccPoint::Fixed(d.dbl.clone()),
                img: AccPoint::Fixed(i.dbl.clone()),
            }],
            Arity::Two => vec![
                AccPair { kind: AccKind::Family, dom: fam(d), img: fam(i) },
                AccPair {
                    kind: AccKind::Double,
                    dom: AccPoint::Fixed(d.dbl.clone()),
                    img: AccPoint::Fixed(i.dbl.clone()),
                },
            ],
        }
    }

    /// `lim_m` on one side as a function of `n` (arity 2), or the limit (arity 1).
    pub fn family_limit(&self, s: Side) -> Option<LimitValue<T>> {
        self.an.as_ref().map(|_| self.side_an(s).fam.clone())
    }

    pub fn double_limit(&self, s: Side) -> Option<Ext<T>> {
        self.an.as_ref().map(|_| self.side_an(s).dbl.clone())
    }

    /// Family limit point at a given `n`.
    pub fn family_limit_at(&self, s: Side, n: u64) -> Result<Ext<T>, CascadeError> {
        self.fam_at(s, n)
    }

    /// Smallest interval containing every piece on side `s`.
    pub fn extent(&self, s: Side) -> Result<Interval<T>, CascadeError> {
        if let Some(d) = &self.decl {
            let ivs: Vec<Interval<T>> = d
                .pieces
                .iter()
                .map(|(_, p)| if s == Side::Dom { p.dom.clone() } else { p.img() })
                .collect();
            let lo = ivs.iter().map(|i| i.lo.clone()).min().unwrap_or(Ext::PosInf);
            let hi = ivs.iter().map(|i| i.hi.clone()).max().unwrap_or(Ext::NegInf);
            return Ok(Interval { lo, hi });
        }
        let (lo, hi) = match self.spec.arity {
            Arity::One => {
                let lv = OneLevel { c: self };
                (lv.lo(s, 0)?.min(lv.lim_lo(s)), lv.hi(s, 0)?.max(lv.lim_hi(s)))
            }
            Arity::Two => {
                let lv = OuterLevel { c: self };
                (lv.lo(s, 0)?.min(lv.lim_lo(s)), lv.hi(s, 0)?.max(lv.lim_hi(s)))
            }
        };
        Ok(Interval { lo, hi })
    }

    /// Whether cluster `c` contains piece `idx`.
    pub fn cluster_contains(&self, c: &Cluster, idx: Idx) -> bool {
        if !self.valid(idx) {
            return false;
        }
        let within = |v: u64, from: u64, to: Option<u64>| v >= from && to.is_none_or(|t| v < t);
        match c {
            Cluster::Run { from, to } => within(idx.n, *from, *to),
            Cluster::Family { n, from, to } => idx.n == *n && within(idx.m, *from, *to),
            Cluster::Block { from, to } => within(idx.n, *from, *to),
            Cluster::Declared(_) => false,
        }
    }

    /// Whether some piece maps part of `dom` into `img`. Stops at the first hit.
    pub fn windows_meet(&self, dom: &Interval<T>, img: &Interval<T>) -> Result<bool, CascadeError> {
        if self.decl.is_some() {
            let plan = self.plan_declared(Some(dom), Some(img))?;
            return Ok(!plan.clusters.is_empty() || plan.partial.iter().any(|(_, p)| hits(p, dom, img)));
        }
        let q = Query { dom: Self::window(Some(dom)), img: Self::window(Some(img)), mode: Mode::Open };
        let any_partial = |runs: Vec<(u64, u64)>, at: &dyn Fn(u64) -> Idx| -> Result<bool, CascadeError> {
            for (a, b) in runs {
                for j in a..b {
                    if hits(&self.raw_piece(at(j))?, dom, img) {
                        return Ok(true);
                    }
                }
            }
            Ok(false)
        };
        match self.spec.arity {
            Arity::One => {
                let (meets, inside) = level_ranges(&OneLevel { c: self }, &q)?;
                Ok(!inside.is_empty() || any_partial(outside_runs(meets, inside)?, &|j| self.idx_at(j, 0))?)
            }
            Arity::Two => {
                let (meets, inside) = level_ranges(&OuterLevel { c: self }, &q)?;
                if !inside.is_empty() {
                    return Ok(true);
                }
                for (a, b) in outside_runs(meets, inside)? {
                    for j in a..b {
                        let (fm, fi) = level_ranges(&self.inner(j)?, &q)?;
                        if !fi.is_empty() || any_partial(outside_runs(fm, fi)?, &|mj| self.idx_at(j, mj))? {
                            return Ok(true);
                        }
                    }
                }
                Ok(false)
            }
        }
    }

    /// Whether every piece of cluster `a` lies in cluster `b`.
    pub fn cluster_within(&self, a: &Cluster, b: &Cluster) -> bool {
        let range = |f: u64, t: Option<u64>, g: u64, u: Option<u64>| {
            g <= f && match (t, u) {
                (_, None) => true,
                (None, Some(_)) => false,
                (Some(t), Some(u)) => t <= u,
            }
        };
        match (a, b) {
            _ if a == b => true,
            (Cluster::Run { from: f, to: t }, Cluster::Run { from: g, to: u })
            | (Cluster::Block { from: f, to: t }, Cluster::Block { from: g, to: u }) => range(*f, *t, *g, *u),
            (Cluster::Family { n, from: f, to: t }, Cluster::Family { n: k, from: g, to: u }) => {
                n == k && range(*f, *t, *g, *u)
            }
            (Cluster::Family { n, from, .. }, Cluster::Block { .. }) => {
                self.cluster_contains(b, Idx { n: *n, m: *from })
            }
            _ => false,
        }
    }

    /// Up to `k` pieces of a cluster, in index order.
    pub fn cluster_pieces(&self, c: &Cluster, k: u64) -> Result<Vec<(Idx, AffinePiece<T>)>, CascadeError> {
        let mut out = Vec::new();
        match c {
            Cluster::Run { from, to } => {
                let mut n = *from;
                while out.len() < k as usize && to.is_none_or(|t| n < t) {
                    let idx = Idx { n, m: 0 };
                    out.push((idx, self.raw_piece(idx)?));
                    n += self.stride;
                }
            }
            Cluster::Family { n, from, to } => {
                let mut m = *from;
                while out.len() < k as usize && to.is_none_or(|t| m < t) {
                    let idx = Idx { n: *n, m };
                    out.push((idx, self.raw_piece(idx)?));
                    m += 1;
                }
            }
            Cluster::Block { from, to } => {
                let side = (k as f64).sqrt().ceil() as u64;
                let mut n = *from;
                let mut rows = 0;
                while rows < side && to.is_none_or(|t| n < t) {
                    for dm in 0..side {
                        let idx = Idx { n, m: self.spec.start.1 + dm };
                        out.push((idx, self.raw_piece(idx)?));
                    }
                    n += self.stride;
                    rows += 1;
                }
            }
            Cluster::Declared(_) => {}
        }
        Ok(out)
    }

    /// The accumulation points of a cluster on side `s`, with the limit of the
    /// limits for blocks. Finite clusters have none.
    pub fn cluster_limits(&self, c: &Cluster, s: Side, k: u64) -> Result<Vec<Ext<T>>, CascadeError> {
        if self.an.is_none() {
            return Ok(vec![]);
        }
        Ok(match c {
            Cluster::Run { to: None, .. } => vec![self.side_an(s).dbl.clone()],
            Cluster::Family { n, to: None, .. } => vec![self.fam_at(s, *n)?],
            Cluster::Block { from, to } => {
                let mut v = Vec::new();
                let mut n = *from;
                while (v.len() as u64) < k && to.is_none_or(|t| n < t) {
                    v.push(self.fam_at(s, n)?);
                    n += self.stride;
                }
                if to.is_none() {
                    v.push(self.side_an(s).dbl.clone());
                }
                v
            }
            _ => vec![],
        })
    }

    fn confirm_declared(&self) -> Result<(), String> {
        let Tier::Declared(dc) = &self.spec.tier else { return Ok(()) };
        let d = self.decl.as_ref().unwrap();
        let samples = |pts: &[LimitPoint<T>]| -> Vec<T> {
            let mut v = Vec::new();
            for p in pts {
                match p {
                    LimitPoint::Fixed(Ext::Fin(x)) => v.push(x.clone()),
                    LimitPoint::Fixed(_) => {}
                    LimitPoint::Family { expr, start } => {
                        for j in 0..3 {
                            if let Ok(x) = expr.eval(start + j, 0) {
                                v.push(x);
                            }
                        }
                    }
                }
            }
            v
        };
        for (k, a) in dc.acc.iter().enumerate() {
            for x in samples(&a.dom) {
                for y in samples(&a.img) {
                    let near = d.pieces.iter().any(|(_, p)| {
                        let dx = dist_to(&p.dom, &x);
                        let dy = dist_to(&p.img(), &y);
                        matches!((dx, dy), (Some(a), Some(b)) if a <= dc.tolerance && b <= dc.tolerance)
                    });
                    if !near {
                        return Err(format!("pair {k} at ({x}, {y})"));
                    }
                }
            }
        }
        Ok(())
    }
}
