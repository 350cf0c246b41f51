use std::collections::BTreeSet;
use std::fmt;

use crate::atlas::{AdjunctionSystem, AtlasError, MfdPoint};
use crate::ratcore::{AccKind, AccPoint, Expr, Ext, Frac, Progression, Side};
use crate::scalar::Scalar;

/// Members compared when deciding whether two families coincide.
const DEDUP_SAMPLE: u64 = 16;
const DEDUP_WINDOW: u64 = 64;
const MEMBER_SEARCH: u64 = 1 << 26;

/// The points `expr(n)` of chart `chart`, over admissible `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NhFamily<T> {
    pub chart: usize,
    pub expr: Expr<T>,
    pub start: u64,
    pub filter: Option<Progression>,
    /// Canonical limit point, when the limit lies inside the chart.
    pub limit: Option<MfdPoint<T>>,
    /// Whether the limit is itself non-Hausdorff from the base point.
    pub limit_included: bool,
    pub declared: bool,
}

impl<T: Scalar> NhFamily<T> {
    fn admits(&self, n: u64) -> bool {
        n >= self.start && self.filter.is_none_or(|p| n % p.modulus == p.residue % p.modulus)
    }

    /// The `j`-th admissible index.
    pub fn index(&self, j: u64) -> u64 {
        match self.filter {
            None => self.start + j,
            Some(p) => {
                let r = p.residue % p.modulus;
                let first = self.start + (r + p.modulus - self.start % p.modulus) % p.modulus;
                first + p.modulus * j
            }
        }
    }

    /// The first `k` members, skipping indices where the form is undefined.
    pub fn members(&self, k: u64) -> Vec<MfdPoint<T>> {
        (0..k)
            .filter_map(|j| self.expr.eval(self.index(j), 0).ok())
            .map(|v| MfdPoint::new(self.chart, v))
            .collect()
    }

    /// The index `n` with `expr(n) = v`, assuming the family is monotone.
    pub fn index_of(&self, v: &T) -> Option<u64> {
        let f = |j: u64| self.expr.eval(self.index(j), 0).ok();
        let v0 = f(0)?;
        if v0 == *v {
            return Some(self.index(0));
        }
        let up = f(1)? > v0;
        let passed = |w: &T| if up { w >= v } else { w <= v };
        if !passed(&f(1)?) {
            let mut hi = 2;
            while hi < MEMBER_SEARCH && !passed(&f(hi)?) {
                hi *= 2;
            }
            if hi >= MEMBER_SEARCH {
                return None;
            }
            let mut lo = hi / 2;
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if passed(&f(mid)?) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return (f(hi)? == *v).then(|| self.index(hi));
        }
        (f(1)? == *v).then(|| self.index(1))
    }

    pub fn contains(&self, p: &MfdPoint<T>) -> bool {
        p.chart == self.chart && self.index_of(&p.coord).is_some_and(|n| self.admits(n))
    }
}

impl<T: Scalar> fmt::Display for NhFamily<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chart {}: {} for n ≥ {}", self.chart, self.expr, self.start)?;
        if let Some(p) = self.filter {
            write!(f, ", n ≡ {} mod {}", p.residue, p.modulus)?;
        }
        match &self.limit {
            Some(l) if self.limit_included => write!(f, ", limit {l} (included)"),
            Some(l) => write!(f, ", limit {l}"),
            None => Ok(()),
        }
    }
}

/// The points non-Hausdorff from `point`, in canonical form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NhDescription<T> {
    pub point: MfdPoint<T>,
    pub isolated: Vec<MfdPoint<T>>,
    pub families: Vec<NhFamily<T>>,
    pub tier2: bool,
}

impl<T: Scalar> NhDescription<T> {
    pub fn is_empty(&self) -> bool {
        self.isolated.is_empty() && self.families.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.families.is_empty()
    }

    /// Whether the (canonical) point `q` belongs to the set.
    pub fn contains(&self, s: &AdjunctionSystem<T>, q: &MfdPoint<T>) -> Result<bool, AtlasError> {
        let rq = reps_or_self(s, q)?;
        if rq.iter().any(|r| self.isolated.contains(r)) {
            return Ok(true);
        }
        for f in &self.families {
            if f.limit_included && f.limit.as_ref().is_some_and(|l| rq.contains(l)) {
                return Ok(true);
            }
            if rq.iter().any(|r| f.contains(r)) {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Isolated points plus up to `k` members of each family, canonical.
    pub fn sample(&self, s: &AdjunctionSystem<T>, k: u64) -> Result<Vec<MfdPoint<T>>, AtlasError> {
        let mut v: BTreeSet<MfdPoint<T>> = self.isolated.iter().cloned().collect();
        for f in &self.families {
            for m in f.members(k) {
                v.insert(canon(s, &m)?);
            }
            if f.limit_included {
                v.extend(f.limit.clone());
            }
        }
        Ok(v.into_iter().collect())
    }
}

impl<T: Scalar> fmt::Display for NhDescription<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NH({}) = {{", self.point)?;
        let mut parts: Vec<String> = self.isolated.iter().map(|p| p.to_string()).collect();
        parts.extend(self.families.iter().map(|x| format!("[{x}]")));
        write!(f, "{}}}", parts.join(", "))?;
        if self.tier2 {
            write!(f, " (declared data)")?;
        }
        Ok(())
    }
}

fn canon<T: Scalar>(s: &AdjunctionSystem<T>, p: &MfdPoint<T>) -> Result<MfdPoint<T>, AtlasError> {
    match s.canonical(p) {
        Err(AtlasError::Unresolved(_)) => Ok(p.clone()),
        r => r,
    }
}

/// Representatives, or just `p` where declared data leaves it unresolved.
fn reps_or_self<T: Scalar>(s: &AdjunctionSystem<T>, p: &MfdPoint<T>) -> Result<Vec<MfdPoint<T>>, AtlasError> {
    match s.representatives(p) {
        Ok(r) => Ok(r.reps),
        Err(AtlasError::Unresolved(_)) => Ok(vec![p.clone()]),
        Err(e) => Err(e),
    }
}

fn inside<T: Scalar>(s: &AdjunctionSystem<T>, c: usize, v: &Ext<T>) -> Result<Option<MfdPoint<T>>, AtlasError> {
    Ok(match v {
        Ext::Fin(x) if s.chart(c)?.extent.contains(x) => Some(MfdPoint::new(c, x.clone())),
        _ => None,
    })
}

/// Every point non-Hausdorff from `p`.
pub fn nh_of<T: Scalar>(s: &AdjunctionSystem<T>, p: &MfdPoint<T>) -> Result<NhDescription<T>, AtlasError> {
    let reps = s.representatives(p)?;
    let mut tier2 = false;
    let mut iso: BTreeSet<MfdPoint<T>> = BTreeSet::new();
    let mut fams: Vec<NhFamily<T>> = Vec::new();
    for a in &reps.reps {
        for t in s.transitions_from(a.chart) {
            let x = &a.coord;
            for pc in &t.pieces {
                if [pc.dom.lo.fin(), pc.dom.hi.fin()].contains(&Some(x)) {
                    iso.extend(inside(s, t.to, &Ext::Fin(pc.apply(x)))?);
                }
            }
            for c in &t.cascades {
                tier2 |= c.is_declared();
                for (_, pc) in c.touching_side(Side::Dom, x)? {
                    if [pc.dom.lo.fin(), pc.dom.hi.fin()].contains(&Some(x)) {
                        iso.extend(inside(s, t.to, &Ext::Fin(pc.apply(x)))?);
                    }
                }
                for (kind, partner, included) in c.partners(x)? {
                    match partner {
                        AccPoint::Fixed(e) => iso.extend(inside(s, t.to, &e)?),
                        AccPoint::Family { expr, start, filter } => {
                            let declared = kind == AccKind::Declared;
                            let lim = if declared {
                                Frac::from_expr(&expr).and_then(|f| f.lim_n()).ok()
                            } else {
                                c.double_limit(Side::Img)
                            };
                            let limit = match lim {
                                Some(l) => inside(s, t.to, &l)?,
                                None => None,
                            };
                            // Declared families are included when their limit is declared too.
                            let limit_included = if declared {
                                limit.as_ref().is_some_and(|l| c.is_declared_point(Side::Img, &l.coord))
                            } else {
                                included && limit.is_some()
                            };
                            fams.push(NhFamily { chart: t.to, expr, start, filter, limit, limit_included, declared });
                        }
                    }
                }
            }
        }
    }

    let mut isolated: BTreeSet<MfdPoint<T>> = BTreeSet::new();
    for q in iso {
        let q = canon(s, &q)?;
        if !reps.reps.contains(&q) {
            isolated.insert(q);
        }
    }

    // Families with a constant form are single points.
    let mut kept: Vec<(NhFamily<T>, BTreeSet<MfdPoint<T>>)> = Vec::new();
    for mut f in fams {
        if let Ok(fr) = Frac::from_expr(&f.expr) {
            if let Some(v) = fr.as_constant() {
                if let Some(q) = inside(s, f.chart, &Ext::Fin(v))? {
                    isolated.insert(canon(s, &q)?);
                }
                continue;
            }
        }
        if let Some(l) = &f.limit {
            f.limit = Some(canon(s, l)?);
        }
        let mut sample = BTreeSet::new();
        for m in f.members(DEDUP_WINDOW) {
            sample.insert(canon(s, &m)?);
        }
        kept.push((f, sample));
    }
    let mut families: Vec<NhFamily<T>> = Vec::new();
    let mut windows: Vec<BTreeSet<MfdPoint<T>>> = Vec::new();
    for (f, sample) in kept {
        let head: Vec<MfdPoint<T>> = sample.iter().take(DEDUP_SAMPLE as usize).cloned().collect();
        if let Some(k) = windows.iter().position(|w| head.iter().all(|m| w.contains(m))) {
            families[k].limit_included |= f.limit_included && families[k].limit == f.limit;
            continue;
        }
        families.push(f);
        windows.push(sample);
    }

    let mut out_iso = Vec::new();
    'pts: for q in isolated {
        for f in &families {
            if f.limit_included && f.limit.as_ref() == Some(&q) {
                continue 'pts;
            }
            let rq = reps_or_self(s, &q)?;
            if rq.iter().any(|r| f.contains(r)) {
                continue 'pts;
            }
        }
        out_iso.push(q);
    }
    families.sort_by(|a, b| (a.chart, a.members(1)).cmp(&(b.chart, b.members(1))));
    Ok(NhDescription { point: reps.canonical().clone(), isolated: out_iso, families, tier2 })
}

/// A shared point of `NH(x)` and `NH(y)` for distinct `x`, `y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SortedViolation<T> {
    pub x: MfdPoint<T>,
    pub y: MfdPoint<T>,
    pub common: MfdPoint<T>,
}

/// Checks that the non-Hausdorff sets of the given points are pairwise
/// disjoint. Families are compared on their first `k` members.
pub fn sorted_check<T: Scalar>(
    s: &AdjunctionSystem<T>,
    pts: &[MfdPoint<T>],
    k: u64,
) -> Result<Vec<SortedViolation<T>>, AtlasError> {
    let mut canon_pts: Vec<MfdPoint<T>> = Vec::new();
    for p in pts {
        let c = s.canonical(p)?;
        if !canon_pts.contains(&c) {
            canon_pts.push(c);
        }
    }
    let descs = canon_pts.iter().map(|p| nh_of(s, p)).collect::<Result<Vec<_>, _>>()?;
    let mut out = Vec::new();
    for i in 0..descs.len() {
        for j in i + 1..descs.len() {
            let a = descs[i].sample(s, k)?;
            for q in a {
                if descs[j].contains(s, &q)? {
                    out.push(SortedViolation { x: descs[i].point.clone(), y: descs[j].point.clone(), common: q });
                    break;
                }
            }
        }
    }
    Ok(out)
}
