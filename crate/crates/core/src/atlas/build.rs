//! Completing finite gluing data by composition.

use std::collections::BTreeMap;

use super::system::{AdjunctionSystem, AtlasError, Transition};
use crate::ratcore::AffinePiece;
use crate::scalar::Scalar;

/// Merges pieces with the same formula whose domains overlap.
///
/// Pieces that merely touch stay apart: the shared endpoint need not be glued.
pub fn merge_pieces<T: Scalar>(mut ps: Vec<AffinePiece<T>>) -> Vec<AffinePiece<T>> {
    ps.sort_by(|a, b| a.dom.cmp(&b.dom));
    let mut out: Vec<AffinePiece<T>> = Vec::with_capacity(ps.len());
    for p in ps {
        if let Some(q) = out.iter_mut().rev().find(|q| q.same_map(&p) && q.dom.meets(&p.dom)) {
            q.dom.lo = q.dom.lo.clone().min(p.dom.lo.clone());
            q.dom.hi = q.dom.hi.clone().max(p.dom.hi.clone());
            continue;
        }
        out.push(p);
    }
    out
}

/// Adds `ψ_jk ∘ ψ_ij` to `ψ_ik` for every stored pair until nothing changes.
///
/// Only finite pieces take part; transitions carrying cascades are left alone.
pub fn close_transitions<T: Scalar>(s: &mut AdjunctionSystem<T>) -> Result<(), AtlasError> {
    loop {
        let mut grown: BTreeMap<(usize, usize), Vec<AffinePiece<T>>> = BTreeMap::new();
        for t1 in s.transitions().filter(|t| t.cascades.is_empty()) {
            for t2 in s.transitions_from(t1.to).filter(|t| t.cascades.is_empty() && t.to != t1.from) {
                for a in &t1.pieces {
                    for b in &t2.pieces {
                        if let Some(r) = a.then(b) {
                            grown.entry((t1.from, t2.to)).or_default().push(r);
                        }
                    }
                }
            }
        }
        let mut changed = false;
        for ((i, k), new) in grown {
            let old = s.transition(i, k).map(|t| t.pieces.clone()).unwrap_or_default();
            if s.transition(i, k).is_some_and(|t| !t.cascades.is_empty()) {
                continue;
            }
            let merged = merge_pieces(old.iter().cloned().chain(new).collect());
            if merged != old {
                changed = true;
                s.replace(Transition::new(i, k, merged, Vec::new()));
            }
        }
        if !changed {
            return Ok(());
        }
    }
}
