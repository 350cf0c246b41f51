use std::collections::BTreeSet;

use petgraph::unionfind::UnionFind;
use thiserror::Error;

use crate::atlas::{saturate, AdjunctionSystem, AtlasError, MfdPoint, QOpenSet};
use crate::ratcore::{Interval, OpenIntervalSet};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MaximalityError {
    #[error(transparent)]
    Atlas(#[from] AtlasError),
    #[error("transition {0} → {1} carries a cascade; certificates need finite transitions")]
    CascadeTransition(usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Necessary {
    Met,
    Failed,
}

/// Boundary and non-Hausdorff set of an open set `U`, compared point by point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaximalityCertificate<T> {
    /// The chart whose image is `U`, when `U` is a chart image.
    pub chart: Option<usize>,
    pub set: QOpenSet<T>,
    /// `NH(U)`, canonical and sorted. Finite, hence closed.
    pub nh: Vec<MfdPoint<T>>,
    /// `cl(U) - U`, canonical and sorted.
    pub boundary: Vec<MfdPoint<T>>,
    pub ch_maximal: bool,
    /// `M - U = cl(NH(U))`.
    pub h_maximal_necessary: Necessary,
    /// `NH(U) ∩ U = ∅`.
    pub hausdorff: bool,
    pub components: usize,
}

impl<T: Scalar> MaximalityCertificate<T> {
    pub fn connected(&self) -> bool {
        self.components == 1
    }
}

pub fn maximality_certificate<T: Scalar>(
    s: &AdjunctionSystem<T>,
    chart: usize,
) -> Result<MaximalityCertificate<T>, MaximalityError> {
    let u = QOpenSet::chart_image(s, chart)?;
    let mut c = maximality_certificate_set(s, &u)?;
    c.chart = Some(chart);
    Ok(c)
}

/// Certificate for an arbitrary open set; `u` is saturated first.
pub fn maximality_certificate_set<T: Scalar>(
    s: &AdjunctionSystem<T>,
    u: &QOpenSet<T>,
) -> Result<MaximalityCertificate<T>, MaximalityError> {
    if let Some(t) = s.transitions().find(|t| !t.cascades.is_empty()) {
        return Err(MaximalityError::CascadeTransition(t.from, t.to));
    }
    let u = saturate(s, u)?;
    let set = |c: usize| u.chart_set(c);
    let canon = |p: MfdPoint<T>| s.canonical(&p);

    let mut boundary = BTreeSet::new();
    let mut complement = BTreeSet::new();
    let mut thin = true;
    for ch in s.charts() {
        let uc = set(ch.id).intersect_interval(&ch.extent);
        for e in uc.endpoints() {
            if ch.extent.contains(&e) && !uc.contains(&e) {
                boundary.insert(canon(MfdPoint::new(ch.id, e))?);
            }
        }
        // The complement within the chart is finite exactly when the gaps are points.
        let ivs = uc.intervals();
        if ivs.is_empty() || ivs[0].lo != ch.extent.lo || ivs[ivs.len() - 1].hi != ch.extent.hi {
            thin = false;
        }
        for w in ivs.windows(2) {
            if w[0].hi != w[1].lo {
                thin = false;
            } else if let Some(x) = w[0].hi.fin() {
                complement.insert(canon(MfdPoint::new(ch.id, x.clone()))?);
            }
        }
    }

    let mut nh = BTreeSet::new();
    let mut hausdorff = true;
    for t in s.transitions() {
        let (uf, ut) = (set(t.from), set(t.to));
        for p in &t.pieces {
            for a in [p.dom.lo.fin(), p.dom.hi.fin()].into_iter().flatten() {
                if !uf.contains(a) {
                    continue;
                }
                let y = p.apply(a);
                if !s.chart(t.to)?.extent.contains(&y) {
                    continue;
                }
                if ut.contains(&y) {
                    hausdorff = false;
                } else {
                    nh.insert(canon(MfdPoint::new(t.to, y))?);
                }
            }
        }
    }

    // Components: one node per (chart, interval), joined across gluings.
    let mut nodes: Vec<(usize, Interval<T>)> = Vec::new();
    for ch in s.charts() {
        nodes.extend(set(ch.id).intervals().iter().map(|iv| (ch.id, iv.clone())));
    }
    let mut ufind = UnionFind::<usize>::new(nodes.len());
    for t in s.transitions() {
        for p in &t.pieces {
            for (i, (ca, a)) in nodes.iter().enumerate() {
                if *ca != t.from {
                    continue;
                }
                let Some(img) = p.push(a) else { continue };
                let img = OpenIntervalSet::single(img);
                for (j, (cb, b)) in nodes.iter().enumerate() {
                    if *cb == t.to && img.meets_interval(b) {
                        ufind.union(i, j);
                    }
                }
            }
        }
    }
    let mut roots: Vec<usize> = (0..nodes.len()).map(|i| ufind.find(i)).collect();
    roots.sort_unstable();
    roots.dedup();

    let nh: Vec<MfdPoint<T>> = nh.into_iter().collect();
    let boundary: Vec<MfdPoint<T>> = boundary.into_iter().collect();
    let ch_maximal = nh == boundary;
    let necessary = thin && complement.into_iter().collect::<Vec<_>>() == nh;
    Ok(MaximalityCertificate {
        chart: None,
        set: u,
        nh,
        boundary,
        ch_maximal,
        h_maximal_necessary: if necessary { Necessary::Met } else { Necessary::Failed },
        hausdorff,
        components: roots.len(),
    })
}
