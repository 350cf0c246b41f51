use std::fmt;

use crate::atlas::{AdjunctionSystem, AtlasError, MfdPoint};
use crate::ratcore::{AccMatch, AffinePiece, Ext, Idx, Side};
use crate::scalar::Scalar;

/// Halvings tried before giving up on certifying a radius.
const MAX_HALVINGS: u32 = 256;

/// Why two points cannot be separated. `at` and `limit` are the chart
/// representatives the witness relates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness<T> {
    /// `at` is a domain endpoint of a finite piece whose one-sided image limit is `limit`.
    PieceBoundary { piece: AffinePiece<T>, at: MfdPoint<T>, limit: MfdPoint<T> },
    /// Same, for one materialized piece of a cascade.
    CascadeEndpoint { cascade: usize, idx: Idx, at: MfdPoint<T>, limit: MfdPoint<T> },
    /// `(at, limit)` is an accumulation pair of a cascade.
    CascadeAcc { cascade: usize, matched: AccMatch, at: MfdPoint<T>, limit: MfdPoint<T> },
}

impl<T: Scalar> Witness<T> {
    pub fn points(&self) -> (&MfdPoint<T>, &MfdPoint<T>) {
        match self {
            Witness::PieceBoundary { at, limit, .. }
            | Witness::CascadeEndpoint { at, limit, .. }
            | Witness::CascadeAcc { at, limit, .. } => (at, limit),
        }
    }
}

impl<T: Scalar> fmt::Display for Witness<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::PieceBoundary { piece, at, limit } => {
                write!(f, "piece boundary: {at} is an endpoint of {piece}, one-sided image {limit}")
            }
            Witness::CascadeEndpoint { cascade, idx, at, limit } => {
                write!(f, "cascade {cascade} piece {idx}: endpoint {at} ↦ {limit}")
            }
            Witness::CascadeAcc { cascade, matched, at, limit } => {
                write!(f, "cascade {cascade} accumulation pair ({at}, {limit}) via {matched:?}")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VerdictKind {
    Equal,
    Separated,
    NotSeparated,
    Unknown,
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            VerdictKind::Equal => "Equal",
            VerdictKind::Separated => "Separated",
            VerdictKind::NotSeparated => "NotSeparated",
            VerdictKind::Unknown => "Unknown",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict<T> {
    Equal,
    /// Basic neighborhoods of radius `eps_star` are disjoint.
    Separated { eps_star: T },
    NotSeparated(Witness<T>),
    /// Declared data beyond its horizon decides the question.
    Unknown { depth: u64 },
}

impl<T: Scalar> Verdict<T> {
    pub fn kind(&self) -> VerdictKind {
        match self {
            Verdict::Equal => VerdictKind::Equal,
            Verdict::Separated { .. } => VerdictKind::Separated,
            Verdict::NotSeparated(_) => VerdictKind::NotSeparated,
            Verdict::Unknown { .. } => VerdictKind::Unknown,
        }
    }
}

/// A verdict plus whether it leans on declared-tier data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Separation<T> {
    pub verdict: Verdict<T>,
    pub tier2: bool,
}

impl<T: Scalar> Separation<T> {
    pub fn kind(&self) -> VerdictKind {
        self.verdict.kind()
    }
}

/// Looks for a witness between two representatives in different charts.
pub(crate) fn find_witness<T: Scalar>(
    s: &AdjunctionSystem<T>,
    a: &MfdPoint<T>,
    b: &MfdPoint<T>,
) -> Result<Option<Witness<T>>, AtlasError> {
    let Some(t) = s.transition(a.chart, b.chart) else { return Ok(None) };
    let (x, y) = (&a.coord, &b.coord);
    for p in &t.pieces {
        let ends = [p.dom.lo.fin(), p.dom.hi.fin()];
        if ends.contains(&Some(x)) && p.apply(x) == *y {
            return Ok(Some(Witness::PieceBoundary { piece: p.clone(), at: a.clone(), limit: b.clone() }));
        }
    }
    for (k, c) in t.cascades.iter().enumerate() {
        if let Some(m) = c.acc_match(x, y)? {
            return Ok(Some(Witness::CascadeAcc { cascade: k, matched: m, at: a.clone(), limit: b.clone() }));
        }
        for (idx, p) in c.touching(x, y)? {
            let ends = [p.dom.lo.fin(), p.dom.hi.fin()];
            if ends.contains(&Some(x)) && p.apply(x) == *y {
                return Ok(Some(Witness::CascadeEndpoint { cascade: k, idx, at: a.clone(), limit: b.clone() }));
            }
        }
    }
    Ok(None)
}

/// Whether the radius-`eps` basic neighborhoods of `p` and `q` meet, computed
/// in the chart of `q`.
pub fn nbhds_meet<T: Scalar>(s: &AdjunctionSystem<T>, p: &MfdPoint<T>, q: &MfdPoint<T>, eps: &T) -> Result<bool, AtlasError> {
    let wp = s.window(p, eps)?;
    let wq = s.window(q, eps)?;
    if p.chart == q.chart {
        return Ok(wp.meets(&wq));
    }
    let Some(t) = s.transition(p.chart, q.chart) else { return Ok(false) };
    if t.pieces.iter().any(|pc| pc.push(&wp).is_some_and(|iv| iv.meets(&wq))) {
        return Ok(true);
    }
    for c in &t.cascades {
        let plan = c.plan(Some(&wp), Some(&wq))?;
        if !plan.clusters.is_empty() || plan.partial.iter().any(|(_, pc)| pc.push(&wp).is_some_and(|iv| iv.meets(&wq))) {
            return Ok(true);
        }
    }
    Ok(false)
}

fn features<T: Scalar>(s: &AdjunctionSystem<T>, p: &MfdPoint<T>, q: &MfdPoint<T>) -> Result<Vec<(bool, T)>, AtlasError> {
    let mut f = Vec::new();
    if p.chart == q.chart {
        f.push((true, q.coord.clone()));
        return Ok(f);
    }
    if let Some(t) = s.transition(p.chart, q.chart) {
        f.extend(t.finite_breakpoints(Side::Dom).into_iter().map(|v| (true, v)));
        f.extend(t.finite_breakpoints(Side::Img).into_iter().map(|v| (false, v)));
        for c in &t.cascades {
            for (side, on_p) in [(Side::Dom, true), (Side::Img, false)] {
                if let Some(Ext::Fin(v)) = c.double_limit(side) {
                    f.push((on_p, v));
                }
            }
        }
    }
    Ok(f)
}

/// Half the least distance from `p` and `q` to the breakpoints and limit
/// points of the gluing between their charts, halved further until the
/// neighborhoods are disjoint.
fn certify_radius<T: Scalar>(s: &AdjunctionSystem<T>, p: &MfdPoint<T>, q: &MfdPoint<T>) -> Result<Option<T>, AtlasError> {
    let mut best: Option<T> = None;
    for (on_p, v) in features(s, p, q)? {
        let x = if on_p { &p.coord } else { &q.coord };
        let d = (x.clone() - v).abs();
        if d.is_positive() && best.as_ref().is_none_or(|b| d < *b) {
            best = Some(d);
        }
    }
    let mut eps = best.map(|d| d.half()).unwrap_or_else(|| T::from_frac(1, 2));
    for _ in 0..MAX_HALVINGS {
        if !nbhds_meet(s, p, q, &eps)? {
            return Ok(Some(eps));
        }
        eps = eps.half();
    }
    Ok(None)
}

fn touches_declared<T: Scalar>(s: &AdjunctionSystem<T>, charts_p: &[usize], charts_q: &[usize]) -> bool {
    charts_p.iter().any(|a| {
        charts_q.iter().any(|b| s.transition(*a, *b).is_some_and(|t| t.has_declared()))
    })
}

/// Decides whether `p` and `q` can be separated.
pub fn separation<T: Scalar>(s: &AdjunctionSystem<T>, p: &MfdPoint<T>, q: &MfdPoint<T>) -> Result<Separation<T>, AtlasError> {
    s.check_point(p)?;
    s.check_point(q)?;
    let unknown = |tier2| Separation { verdict: Verdict::Unknown { depth: declared_depth(s) }, tier2 };
    let (rp, rq) = match (s.representatives(p), s.representatives(q)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(AtlasError::Unresolved(_)), _) | (_, Err(AtlasError::Unresolved(_))) => return Ok(unknown(true)),
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };
    let cp: Vec<usize> = rp.reps.iter().map(|r| r.chart).collect();
    let cq: Vec<usize> = rq.reps.iter().map(|r| r.chart).collect();
    let tier2 = touches_declared(s, &cp, &cq);
    if rp.reps.contains(q) {
        return Ok(Separation { verdict: Verdict::Equal, tier2 });
    }
    for a in &rp.reps {
        for b in rq.reps.iter().filter(|b| b.chart != a.chart) {
            match find_witness(s, a, b) {
                Ok(Some(w)) => {
                    let t = s.transition(a.chart, b.chart).expect("witness transition");
                    if let Witness::CascadeAcc { cascade, .. } = &w {
                        if t.cascades[*cascade].confirmation().is_err() {
                            return Ok(unknown(true));
                        }
                    }
                    return Ok(Separation { verdict: Verdict::NotSeparated(w), tier2 });
                }
                Ok(None) => {}
                Err(AtlasError::Unresolved(_)) => return Ok(unknown(true)),
                Err(e) => return Err(e),
            }
        }
    }
    match certify_radius(s, p, q) {
        Ok(Some(eps_star)) => Ok(Separation { verdict: Verdict::Separated { eps_star }, tier2 }),
        Ok(None) => Ok(unknown(tier2)),
        Err(AtlasError::Unresolved(_)) => Ok(unknown(true)),
        Err(e) => Err(e),
    }
}

fn declared_depth<T: Scalar>(s: &AdjunctionSystem<T>) -> u64 {
    s.transitions()
        .flat_map(|t| t.cascades.iter())
        .filter_map(|c| match &c.spec().tier {
            crate::ratcore::Tier::Declared(d) => Some(d.horizon),
            _ => None,
        })
        .max()
        .unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleResult {
    Consistent,
    Inconsistent(String),
    /// The verdict was Unknown, or the brute-force check needs undeclared data.
    Inconclusive,
}

/// Whether the basic neighborhood of `p` meets the window of `q`, straight
/// from the gluing data of the two charts.
fn brute_meet<T: Scalar>(s: &AdjunctionSystem<T>, p: &MfdPoint<T>, q: &MfdPoint<T>, eps: &T) -> Result<bool, AtlasError> {
    let wp = s.window(p, eps)?;
    let wq = s.window(q, eps)?;
    if p.chart == q.chart {
        return Ok(wp.meets(&wq));
    }
    let Some(t) = s.transition(p.chart, q.chart) else { return Ok(false) };
    if t.pieces.iter().any(|pc| pc.push(&wp).is_some_and(|i| i.meets(&wq))) {
        return Ok(true);
    }
    for c in &t.cascades {
        if c.windows_meet(&wp, &wq)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Intersects basic neighborhoods at `eps = 2^-r`, `r = 1..=depth`, both ways,
/// and compares the pattern with `verdict`.
pub fn separation_oracle<T: Scalar>(
    s: &AdjunctionSystem<T>,
    p: &MfdPoint<T>,
    q: &MfdPoint<T>,
    verdict: &Verdict<T>,
    depth: u32,
) -> Result<OracleResult, AtlasError> {
    if matches!(verdict, Verdict::Unknown { .. }) {
        return Ok(OracleResult::Inconclusive);
    }
    let meet = |eps: &T| -> Result<Option<bool>, AtlasError> {
        let a = brute_meet(s, p, q, eps);
        let b = brute_meet(s, q, p, eps);
        match (a, b) {
            (Ok(a), Ok(b)) if a == b => Ok(Some(a)),
            (Ok(a), Ok(b)) => Err(AtlasError::Unresolved(format!("asymmetric traces at {eps}: {a} vs {b}"))),
            (Err(AtlasError::Unresolved(_)), _) | (_, Err(AtlasError::Unresolved(_))) => Ok(None),
            (Err(e), _) | (_, Err(e)) => Err(e),
        }
    };
    let mut eps = T::one();
    for r in 1..=depth {
        eps = eps.half();
        let m = match meet(&eps) {
            Ok(Some(m)) => m,
            Ok(None) => return Ok(OracleResult::Inconclusive),
            Err(AtlasError::Unresolved(msg)) => return Ok(OracleResult::Inconsistent(msg)),
            Err(e) => return Err(e),
        };
        let bad = match verdict {
            Verdict::Equal | Verdict::NotSeparated(_) => !m,
            Verdict::Separated { eps_star } => m && eps <= *eps_star,
            Verdict::Unknown { .. } => false,
        };
        if bad {
            return Ok(OracleResult::Inconsistent(format!(
                "verdict {} but neighborhoods {} at radius 2^-{r}",
                verdict.kind(),
                if m { "meet" } else { "are disjoint" }
            )));
        }
    }
    if let Verdict::Separated { eps_star } = verdict {
        match meet(eps_star) {
            Ok(Some(false)) => {}
            Ok(Some(true)) => {
                return Ok(OracleResult::Inconsistent(format!("neighborhoods meet at the certified radius {eps_star}")))
            }
            Ok(None) => return Ok(OracleResult::Inconclusive),
            Err(AtlasError::Unresolved(msg)) => return Ok(OracleResult::Inconsistent(msg)),
            Err(e) => return Err(e),
        }
    }
    Ok(OracleResult::Consistent)
}
