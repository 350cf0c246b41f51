use std::collections::BTreeMap;
use std::fmt;

use super::system::{AdjunctionSystem, AtlasError, MfdPoint};
use crate::ratcore::{Cluster, Interval, OpenIntervalSet, Side};
use crate::scalar::Scalar;

/// Bounded clusters up to this size are expanded into explicit intervals.
const EXPAND_LIMIT: u64 = 4096;

/// Infinitely many cascade pieces, all lying inside `window` of chart `from`,
/// carried into chart `to`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Tail<T> {
    pub from: usize,
    pub to: usize,
    pub cascade: usize,
    pub cluster: Cluster,
    pub window: Interval<T>,
}

/// An open subset of the quotient, stored per chart.
///
/// The per-chart sets are finite unions of intervals; pieces of cascades that
/// pile up inside the set are kept symbolically as [`Tail`]s.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QOpenSet<T> {
    pub sets: BTreeMap<usize, OpenIntervalSet<T>>,
    pub tails: Vec<Tail<T>>,
}

impl<T: Scalar> QOpenSet<T> {
    pub fn empty() -> Self {
        QOpenSet { sets: BTreeMap::new(), tails: Vec::new() }
    }

    pub fn in_chart(chart: usize, set: OpenIntervalSet<T>) -> Self {
        let mut sets = BTreeMap::new();
        if !set.is_empty() {
            sets.insert(chart, set);
        }
        QOpenSet { sets, tails: Vec::new() }
    }

    /// The image of a whole chart.
    pub fn chart_image(s: &AdjunctionSystem<T>, chart: usize) -> Result<Self, AtlasError> {
        let ext = s.chart(chart)?.extent.clone();
        Ok(Self::in_chart(chart, OpenIntervalSet::single(ext)))
    }

    pub fn chart_set(&self, c: usize) -> OpenIntervalSet<T> {
        self.sets.get(&c).cloned().unwrap_or_default()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.values().all(|s| s.is_empty()) && self.tails.is_empty()
    }

    pub fn has_tail(&self) -> bool {
        !self.tails.is_empty()
    }

    fn add(&mut self, c: usize, iv: Interval<T>) {
        let cur = self.sets.entry(c).or_default();
        *cur = cur.union(&OpenIntervalSet::single(iv));
    }

    fn add_tail(&mut self, t: Tail<T>) {
        if !self.tails.contains(&t) {
            self.tails.push(t);
        }
    }

    /// Membership of a point given in one of its charts; assumes saturation.
    pub fn contains(&self, s: &AdjunctionSystem<T>, p: &MfdPoint<T>) -> Result<bool, AtlasError> {
        if self.sets.get(&p.chart).is_some_and(|set| set.contains(&p.coord)) {
            return Ok(true);
        }
        for t in self.tails.iter().filter(|t| t.to == p.chart) {
            let Some(tr) = s.transition(t.from, t.to) else { continue };
            let c = &tr.cascades[t.cascade];
            if let Some((idx, _)) = c.containing(Side::Img, &p.coord)? {
                if c.cluster_contains(&t.cluster, idx) {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    /// Whether chart `c` of this set covers `iv`, counting tail pieces.
    fn covers(&self, s: &AdjunctionSystem<T>, c: usize, iv: &Interval<T>) -> Result<bool, AtlasError> {
        if self.sets.get(&c).is_some_and(|set| set.contains_interval(iv)) {
            return Ok(true);
        }
        for t in self.tails.iter().filter(|t| t.to == c) {
            let Some(tr) = s.transition(t.from, t.to) else { continue };
            let casc = &tr.cascades[t.cascade];
            if let Some((idx, p)) = casc.containing(Side::Img, &iv.sample())? {
                if casc.cluster_contains(&t.cluster, idx) && p.img().contains_interval(iv) {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    /// Containment, checking tails on their first few pieces.
    pub fn is_subset(&self, s: &AdjunctionSystem<T>, o: &Self) -> Result<bool, AtlasError> {
        for (c, set) in &self.sets {
            for iv in set.intervals() {
                if !o.covers(s, *c, iv)? {
                    return Ok(false);
                }
            }
        }
        for t in &self.tails {
            let Some(tr) = s.transition(t.from, t.to) else { continue };
            let casc = &tr.cascades[t.cascade];
            let same = |u: &&Tail<T>| u.from == t.from && u.to == t.to && u.cascade == t.cascade;
            if o.tails.iter().filter(same).any(|u| casc.cluster_within(&t.cluster, &u.cluster)) {
                continue;
            }
            for (_, p) in casc.cluster_pieces(&t.cluster, 16)? {
                if !o.covers(s, t.to, &p.img())? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Pieces of each tail up to `k` per cluster, as intervals per chart.
    pub fn tail_samples(&self, s: &AdjunctionSystem<T>, k: u64) -> Result<BTreeMap<usize, OpenIntervalSet<T>>, AtlasError> {
        let mut out: BTreeMap<usize, OpenIntervalSet<T>> = BTreeMap::new();
        for t in &self.tails {
            let Some(tr) = s.transition(t.from, t.to) else { continue };
            let ivs = tr.cascades[t.cascade].cluster_pieces(&t.cluster, k)?.into_iter().map(|(_, p)| p.img());
            let e = out.entry(t.to).or_default();
            *e = e.union(&OpenIntervalSet::from_intervals(ivs));
        }
        Ok(out)
    }
}

impl<T: Scalar> fmt::Display for QOpenSet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, set) in &self.sets {
            if !first {
                write!(f, "; ")?;
            }
            first = false;
            write!(f, "chart {c}: {set}")?;
        }
        for t in &self.tails {
            write!(f, "; chart {}: tail {:?} of cascade {} from chart {}", t.to, t.cluster, t.cascade, t.from)?;
        }
        Ok(())
    }
}

/// Adds the image of `iv ⊂ chart from` in every other chart to `out`.
fn trace_into<T: Scalar>(
    s: &AdjunctionSystem<T>,
    from: usize,
    iv: &Interval<T>,
    out: &mut QOpenSet<T>,
) -> Result<(), AtlasError> {
    for t in s.transitions_from(from) {
        for p in &t.pieces {
            if let Some(img) = p.push(iv) {
                out.add(t.to, img);
            }
        }
        for (k, c) in t.cascades.iter().enumerate() {
            let plan = c.plan(Some(iv), None)?;
            for (_, p) in &plan.partial {
                if let Some(img) = p.push(iv) {
                    out.add(t.to, img);
                }
            }
            for cl in plan.clusters {
                let small = match &cl {
                    Cluster::Run { from, to: Some(to) } => to - from <= EXPAND_LIMIT,
                    Cluster::Family { from, to: Some(to), .. } => to - from <= EXPAND_LIMIT,
                    _ => false,
                };
                if small {
                    for (_, p) in c.cluster_pieces(&cl, EXPAND_LIMIT)? {
                        out.add(t.to, p.img());
                    }
                } else {
                    out.add_tail(Tail { from, to: t.to, cascade: k, cluster: cl, window: iv.clone() });
                }
            }
        }
    }
    Ok(())
}

/// `(x - eps, x + eps) ∩ extent` in the chart of `p`, with its trace in every chart.
pub fn basic_nbhd<T: Scalar>(s: &AdjunctionSystem<T>, p: &MfdPoint<T>, eps: &T) -> Result<QOpenSet<T>, AtlasError> {
    s.check_point(p)?;
    let w = s.window(p, eps)?;
    let mut out = QOpenSet::in_chart(p.chart, OpenIntervalSet::single(w.clone()));
    trace_into(s, p.chart, &w, &mut out)?;
    Ok(out)
}

/// The least saturated superset of `u`.
pub fn saturate<T: Scalar>(s: &AdjunctionSystem<T>, u: &QOpenSet<T>) -> Result<QOpenSet<T>, AtlasError> {
    let mut out = u.clone();
    for (c, set) in &u.sets {
        for iv in set.intervals() {
            trace_into(s, *c, iv, &mut out)?;
        }
    }
    Ok(out)
}
