use std::fmt;

use petgraph::unionfind::UnionFind;

use super::system::{AdjunctionSystem, AtlasError, Transition};
use crate::ratcore::{AffinePiece, Interval, Side, HORIZON};
use crate::scalar::Scalar;

/// Cascade pieces materialized per index for the pairwise checks.
const PAIR_HORIZON: u64 = 12;
const TRIPLE_HORIZON: u64 = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationKind {
    Extent,
    Overlap,
    InversePairing,
    Cocycle,
    Disconnected,
    Cascade,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::Extent => "extent",
            ViolationKind::Overlap => "overlap",
            ViolationKind::InversePairing => "inverse-pairing",
            ViolationKind::Cocycle => "cocycle",
            ViolationKind::Disconnected => "disconnected",
            ViolationKind::Cascade => "cascade",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Checks that depend on declared-tier data and could not be settled.
    pub unverified: Vec<String>,
    pub chart_count: usize,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

struct Piece<T> {
    p: AffinePiece<T>,
    declared: bool,
    cascade: Option<usize>,
    label: String,
}

fn pieces<T: Scalar>(t: &Transition<T>, h: u64) -> Result<Vec<Piece<T>>, AtlasError> {
    let mut out: Vec<Piece<T>> = t
        .pieces
        .iter()
        .enumerate()
        .map(|(i, p)| Piece { p: p.clone(), declared: false, cascade: None, label: format!("piece {i} ({p})") })
        .collect();
    for (k, c) in t.cascades.iter().enumerate() {
        for (idx, p) in c.materialize(h)? {
            out.push(Piece { p, declared: c.is_declared(), cascade: Some(k), label: format!("cascade {k} index {idx}") });
        }
    }
    Ok(out)
}

fn overlaps<T: Scalar>(mut ivs: Vec<(Interval<T>, String)>) -> Option<(String, String)> {
    ivs.sort_by(|a, b| a.0.lo.cmp(&b.0.lo));
    ivs.windows(2).find(|w| w[1].0.lo < w[0].0.hi).map(|w| (w[0].1.clone(), w[1].1.clone()))
}

/// Checks extents, disjointness, inverse pairing, the cocycle condition and
/// connectivity. Violations are returned as data.
pub fn validate_system<T: Scalar>(s: &AdjunctionSystem<T>) -> ValidationReport {
    let mut rep = ValidationReport { violations: Vec::new(), unverified: Vec::new(), chart_count: s.chart_count() };
    let mut bad = |kind, detail: String| rep.violations.push(Violation { kind, detail });
    let mut unverified = Vec::new();

    for t in s.transitions() {
        let tag = format!("{} → {}", t.from, t.to);
        let (Ok(ef), Ok(et)) = (s.chart(t.from), s.chart(t.to)) else {
            bad(ViolationKind::Extent, format!("{tag}: unknown chart"));
            continue;
        };
        for (i, p) in t.pieces.iter().enumerate() {
            if !ef.extent.contains_interval(&p.dom) || !et.extent.contains_interval(&p.img()) {
                bad(ViolationKind::Extent, format!("{tag}: piece {i} ({p}) leaves its charts"));
            }
        }
        for (k, c) in t.cascades.iter().enumerate() {
            if let Err(e) = c.verify(HORIZON) {
                bad(ViolationKind::Cascade, format!("{tag}: cascade {k}: {e}"));
                continue;
            }
            if let Err(e) = c.confirmation() {
                unverified.push(format!("{tag}: cascade {k}: declared {e}"));
            }
            match (c.extent(Side::Dom), c.extent(Side::Img)) {
                (Ok(d), Ok(i)) if ef.extent.contains_interval(&d) && et.extent.contains_interval(&i) => {}
                (Ok(_), Ok(_)) => bad(ViolationKind::Extent, format!("{tag}: cascade {k} leaves its charts")),
                (Err(e), _) | (_, Err(e)) => bad(ViolationKind::Cascade, format!("{tag}: cascade {k}: {e}")),
            }
        }
        let ps = match pieces(t, PAIR_HORIZON) {
            Ok(ps) => ps,
            Err(e) => {
                bad(ViolationKind::Cascade, format!("{tag}: {e}"));
                continue;
            }
        };
        for side in [Side::Dom, Side::Img] {
            let ivs = ps
                .iter()
                .map(|x| (if side == Side::Dom { x.p.dom.clone() } else { x.p.img() }, x.label.clone()))
                .collect();
            if let Some((a, b)) = overlaps(ivs) {
                bad(ViolationKind::Overlap, format!("{tag}: {side:?} of {a} and {b} overlap"));
            }
        }

        // Inverse pairing.
        let Some(back) = s.transition(t.to, t.from) else {
            bad(ViolationKind::InversePairing, format!("{tag}: no inverse transition"));
            continue;
        };
        // A cascade whose mirror image sits in the reverse transition pairs
        // piece by piece; only the others are checked pointwise.
        let mirrored: Vec<bool> = t
            .cascades
            .iter()
            .map(|c| c.inverse().is_ok_and(|i| back.cascades.iter().any(|b| b.spec() == i.spec())))
            .collect();
        for x in ps.iter().filter(|x| x.cascade.is_none_or(|k| !mirrored[k])) {
            let y = x.p.img().sample();
            match back.piece_at(&y) {
                Ok(Some((_, q))) if q.dom == x.p.img() && q.same_map(&x.p.inverse()) => {}
                Ok(_) => bad(ViolationKind::InversePairing, format!("{tag}: {} has no inverse piece", x.label)),
                Err(AtlasError::Unresolved(m)) => unverified.push(format!("{tag}: inverse of {}: {m}", x.label)),
                Err(e) => bad(ViolationKind::Cascade, format!("{tag}: {e}")),
            }
        }
    }

    // Cocycle: ψ_jk ∘ ψ_ij agrees with ψ_ik wherever the composite is defined.
    for t1 in s.transitions() {
        for t2 in s.transitions_from(t1.to) {
            if t2.to == t1.from {
                continue;
            }
            let tag = format!("{} → {} → {}", t1.from, t1.to, t2.to);
            let (Ok(p1), Ok(p2)) = (pieces(t1, TRIPLE_HORIZON), pieces(t2, TRIPLE_HORIZON)) else { continue };
            let direct = s.transition(t1.from, t2.to);
            for a in &p1 {
                for b in &p2 {
                    let Some(r) = a.p.then(&b.p) else { continue };
                    let Some(d) = direct else {
                        bad(ViolationKind::Cocycle, format!("{tag}: composite {r} has no direct transition"));
                        continue;
                    };
                    match d.piece_at(&r.dom.sample()) {
                        Ok(Some((_, q))) if q.same_map(&r) && q.dom.contains_interval(&r.dom) => {}
                        Ok(_) if a.declared || b.declared => {
                            unverified.push(format!("{tag}: {} then {}", a.label, b.label))
                        }
                        Ok(_) => bad(ViolationKind::Cocycle, format!("{tag}: {} then {} disagrees", a.label, b.label)),
                        Err(AtlasError::Unresolved(m)) => unverified.push(format!("{tag}: {m}")),
                        Err(e) => bad(ViolationKind::Cascade, format!("{tag}: {e}")),
                    }
                }
            }
        }
    }

    let ids: Vec<usize> = s.charts().iter().map(|c| c.id).collect();
    let mut uf = UnionFind::<usize>::new(ids.len());
    for t in s.transitions().filter(|t| !t.is_empty()) {
        if let (Ok(a), Ok(b)) = (ids.binary_search(&t.from), ids.binary_search(&t.to)) {
            uf.union(a, b);
        }
    }
    let mut roots: Vec<usize> = (0..ids.len()).map(|i| uf.find(i)).collect();
    roots.sort_unstable();
    roots.dedup();
    if roots.len() > 1 {
        bad(ViolationKind::Disconnected, format!("gluing graph has {} components", roots.len()));
    }
    unverified.sort();
    unverified.dedup();
    rep.unverified = unverified;
    rep
}
