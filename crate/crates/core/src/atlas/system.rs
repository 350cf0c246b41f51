use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::ratcore::{AffinePiece, Cascade, CascadeError, Ext, Idx, Interval, Side};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AtlasError {
    #[error("unknown chart {0}")]
    UnknownChart(usize),
    #[error("duplicate chart id {0}")]
    DuplicateChart(usize),
    #[error("point {0} lies outside its chart")]
    PointOutsideChart(String),
    #[error("radius must be positive")]
    BadRadius,
    #[error("transition {0} → {1} is stored twice")]
    DuplicateTransition(usize, usize),
    #[error("a chart cannot be glued to itself ({0})")]
    SelfTransition(usize),
    #[error(transparent)]
    Cascade(#[from] CascadeError),
    /// A declared-tier cascade cannot tell whether a piece beyond its horizon covers the point.
    #[error("declared data beyond the horizon decides {0}")]
    Unresolved(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Chart<T> {
    pub id: usize,
    pub extent: Interval<T>,
}

/// A point given in chart coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MfdPoint<T> {
    pub chart: usize,
    pub coord: T,
}

impl<T: Scalar> MfdPoint<T> {
    pub fn new(chart: usize, coord: T) -> Self {
        MfdPoint { chart, coord }
    }
}

impl<T: Scalar> fmt::Display for MfdPoint<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.chart, self.coord.fmt_exact())
    }
}

/// The equivalence class of a point: one representative per chart containing it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuotientPoint<T> {
    /// Sorted by chart id; the first entry is canonical.
    pub reps: Vec<MfdPoint<T>>,
}

impl<T: Scalar> QuotientPoint<T> {
    pub fn canonical(&self) -> &MfdPoint<T> {
        &self.reps[0]
    }

    pub fn in_chart(&self, c: usize) -> Option<&T> {
        self.reps.iter().find(|r| r.chart == c).map(|r| &r.coord)
    }
}

/// Where a transition sends a point, and through which piece.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PieceRef {
    Finite(usize),
    Cascade(usize, Idx),
}

/// `ψ_{from,to}`: finitely many affine pieces plus cascades.
#[derive(Clone, Debug)]
pub struct Transition<T> {
    pub from: usize,
    pub to: usize,
    pub pieces: Vec<AffinePiece<T>>,
    pub cascades: Vec<Cascade<T>>,
}

impl<T: Scalar> Transition<T> {
    pub fn new(from: usize, to: usize, mut pieces: Vec<AffinePiece<T>>, cascades: Vec<Cascade<T>>) -> Self {
        pieces.sort_by(|a, b| a.dom.cmp(&b.dom));
        Transition { from, to, pieces, cascades }
    }

    pub fn inverse(&self) -> Result<Self, CascadeError> {
        let pieces = self.pieces.iter().map(|p| p.inverse()).collect();
        let cascades = self.cascades.iter().map(|c| c.inverse()).collect::<Result<_, _>>()?;
        Ok(Transition::new(self.to, self.from, pieces, cascades))
    }

    pub fn has_declared(&self) -> bool {
        self.cascades.iter().any(|c| c.is_declared())
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty() && self.cascades.is_empty()
    }

    /// The piece whose open domain contains `x`.
    pub fn piece_at(&self, x: &T) -> Result<Option<(PieceRef, AffinePiece<T>)>, AtlasError> {
        let i = self.pieces.partition_point(|p| p.dom.hi.cmp_fin(x) != std::cmp::Ordering::Greater);
        if i < self.pieces.len() && self.pieces[i].dom.contains(x) {
            return Ok(Some((PieceRef::Finite(i), self.pieces[i].clone())));
        }
        for (k, c) in self.cascades.iter().enumerate() {
            if let Some((idx, p)) = c.containing(Side::Dom, x)? {
                return Ok(Some((PieceRef::Cascade(k, idx), p)));
            }
        }
        for c in &self.cascades {
            if c.is_declared() && declared_may_cover(c, x)? {
                return Err(AtlasError::Unresolved(format!("coordinate {x} of chart {}", self.from)));
            }
        }
        Ok(None)
    }

    pub fn apply(&self, x: &T) -> Result<Option<T>, AtlasError> {
        Ok(self.piece_at(x)?.map(|(_, p)| p.apply(x)))
    }

    /// Finite endpoints of the finite pieces on one side.
    pub fn finite_breakpoints(&self, s: Side) -> Vec<T> {
        let mut v = Vec::new();
        for p in &self.pieces {
            let iv = if s == Side::Dom { p.dom.clone() } else { p.img() };
            v.extend(iv.lo.fin().cloned());
            v.extend(iv.hi.fin().cloned());
        }
        v
    }
}

/// A point inside the region a declared cascade spans that no materialized
/// piece settles, and that is not a declared accumulation point.
fn declared_may_cover<T: Scalar>(c: &Cascade<T>, x: &T) -> Result<bool, AtlasError> {
    let ext = c.extent(Side::Dom)?;
    if !ext.closure_contains(x) {
        return Ok(false);
    }
    if !c.touching_side(Side::Dom, x)?.is_empty() {
        return Ok(false);
    }
    Ok(!c.is_declared_point(Side::Dom, x))
}

/// Charts and transitions satisfying (or meant to satisfy) the gluing axioms.
#[derive(Clone, Debug)]
pub struct AdjunctionSystem<T> {
    charts: Vec<Chart<T>>,
    transitions: BTreeMap<(usize, usize), Transition<T>>,
}

impl<T: Scalar> AdjunctionSystem<T> {
    pub fn new(mut charts: Vec<Chart<T>>) -> Result<Self, AtlasError> {
        charts.sort_by_key(|c| c.id);
        for w in charts.windows(2) {
            if w[0].id == w[1].id {
                return Err(AtlasError::DuplicateChart(w[0].id));
            }
        }
        Ok(AdjunctionSystem { charts, transitions: BTreeMap::new() })
    }

    /// Stores one transition as given; the inverse is not added.
    pub fn insert(&mut self, t: Transition<T>) -> Result<(), AtlasError> {
        self.chart(t.from)?;
        self.chart(t.to)?;
        if t.from == t.to {
            return Err(AtlasError::SelfTransition(t.from));
        }
        let key = (t.from, t.to);
        if self.transitions.contains_key(&key) {
            return Err(AtlasError::DuplicateTransition(t.from, t.to));
        }
        self.transitions.insert(key, t);
        Ok(())
    }

    /// Stores a transition together with its inverse.
    pub fn glue(&mut self, t: Transition<T>) -> Result<(), AtlasError> {
        let inv = t.inverse()?;
        self.insert(t)?;
        self.insert(inv)
    }

    /// Replaces (or inserts) a transition without touching its inverse.
    pub fn replace(&mut self, t: Transition<T>) {
        self.transitions.insert((t.from, t.to), t);
    }

    pub fn charts(&self) -> &[Chart<T>] {
        &self.charts
    }

    pub fn chart(&self, id: usize) -> Result<&Chart<T>, AtlasError> {
        self.charts
            .binary_search_by_key(&id, |c| c.id)
            .map(|i| &self.charts[i])
            .map_err(|_| AtlasError::UnknownChart(id))
    }

    pub fn transition(&self, from: usize, to: usize) -> Option<&Transition<T>> {
        self.transitions.get(&(from, to))
    }

    pub fn transitions(&self) -> impl Iterator<Item = &Transition<T>> {
        self.transitions.values()
    }

    pub fn transitions_from(&self, from: usize) -> impl Iterator<Item = &Transition<T>> {
        self.transitions.range((from, 0)..=(from, usize::MAX)).map(|(_, t)| t)
    }

    pub fn has_declared(&self) -> bool {
        self.transitions.values().any(|t| t.has_declared())
    }

    pub fn check_point(&self, p: &MfdPoint<T>) -> Result<(), AtlasError> {
        if self.chart(p.chart)?.extent.contains(&p.coord) {
            Ok(())
        } else {
            Err(AtlasError::PointOutsideChart(p.to_string()))
        }
    }

    /// The orbit of `p`: `p` plus its image under every transition from its chart.
    pub fn representatives(&self, p: &MfdPoint<T>) -> Result<QuotientPoint<T>, AtlasError> {
        self.check_point(p)?;
        let mut reps = vec![p.clone()];
        for t in self.transitions_from(p.chart) {
            if let Some(y) = t.apply(&p.coord)? {
                reps.push(MfdPoint::new(t.to, y));
            }
        }
        reps.sort();
        Ok(QuotientPoint { reps })
    }

    pub fn canonical(&self, p: &MfdPoint<T>) -> Result<MfdPoint<T>, AtlasError> {
        Ok(self.representatives(p)?.reps.swap_remove(0))
    }

    pub fn points_equal(&self, p: &MfdPoint<T>, q: &MfdPoint<T>) -> Result<bool, AtlasError> {
        if p.chart == q.chart {
            self.check_point(p)?;
            self.check_point(q)?;
            return Ok(p.coord == q.coord);
        }
        self.check_point(q)?;
        match self.transition(p.chart, q.chart) {
            None => {
                self.check_point(p)?;
                Ok(false)
            }
            Some(t) => {
                self.check_point(p)?;
                Ok(t.apply(&p.coord)?.as_ref() == Some(&q.coord))
            }
        }
    }

    /// `(x - eps, x + eps)` clipped to the chart.
    pub fn window(&self, p: &MfdPoint<T>, eps: &T) -> Result<Interval<T>, AtlasError> {
        if !eps.is_positive() {
            return Err(AtlasError::BadRadius);
        }
        let ext = &self.chart(p.chart)?.extent;
        Ok(Interval::ball(&p.coord, eps).intersect(ext).expect("window contains the point"))
    }

    /// Number of charts, an upper bound on the minimal chart count.
    pub fn chart_count(&self) -> usize {
        self.charts.len()
    }

    /// Whether `u` lies in the extended closure of the chart.
    pub fn extent_contains(&self, c: usize, v: &Ext<T>) -> Result<bool, AtlasError> {
        let e = &self.chart(c)?.extent;
        Ok(e.lo <= *v && *v <= e.hi)
    }
}
