use std::cmp::Ordering;
use std::fmt;

use crate::scalar::Scalar;

/// A rational extended by the two infinities.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ext<T> {
    NegInf,
    Fin(T),
    PosInf,
}

impl<T: Scalar> Ext<T> {
    pub fn fin(&self) -> Option<&T> {
        match self {
            Ext::Fin(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Ext::Fin(_))
    }

    pub fn neg(&self) -> Self {
        match self {
            Ext::NegInf => Ext::PosInf,
            Ext::PosInf => Ext::NegInf,
            Ext::Fin(v) => Ext::Fin(-v.clone()),
        }
    }

    /// `self - c`, with infinities absorbing.
    pub fn sub_fin(&self, c: &T) -> Self {
        match self {
            Ext::Fin(v) => Ext::Fin(v.clone() - c.clone()),
            other => other.clone(),
        }
    }

    pub fn add_fin(&self, c: &T) -> Self {
        match self {
            Ext::Fin(v) => Ext::Fin(v.clone() + c.clone()),
            other => other.clone(),
        }
    }

    pub fn cmp_fin(&self, c: &T) -> Ordering {
        match self {
            Ext::NegInf => Ordering::Less,
            Ext::PosInf => Ordering::Greater,
            Ext::Fin(v) => v.cmp(c),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Ext::NegInf => f64::NEG_INFINITY,
            Ext::PosInf => f64::INFINITY,
            Ext::Fin(v) => v.to_f64(),
        }
    }

    /// `"-inf"`, `"+inf"` or `"p/q"`.
    pub fn fmt_exact(&self) -> String {
        match self {
            Ext::NegInf => "-inf".into(),
            Ext::PosInf => "+inf".into(),
            Ext::Fin(v) => v.fmt_exact(),
        }
    }

    pub fn parse_exact(s: &str) -> Option<Self> {
        match s.trim() {
            "-inf" => Some(Ext::NegInf),
            "+inf" | "inf" => Some(Ext::PosInf),
            other => T::parse_exact(other).map(Ext::Fin),
        }
    }
}

impl<T: Scalar> From<T> for Ext<T> {
    fn from(v: T) -> Self {
        Ext::Fin(v)
    }
}

impl<T: Scalar> fmt::Display for Ext<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::NegInf => write!(f, "-inf"),
            Ext::PosInf => write!(f, "+inf"),
            Ext::Fin(v) => write!(f, "{v}"),
        }
    }
}

/// A nonempty open interval `(lo, hi)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval<T> {
    pub lo: Ext<T>,
    pub hi: Ext<T>,
}

impl<T: Scalar> Interval<T> {
    /// `None` unless `lo < hi`.
    pub fn new(lo: Ext<T>, hi: Ext<T>) -> Option<Self> {
        (lo < hi).then_some(Interval { lo, hi })
    }

    pub fn fin(lo: T, hi: T) -> Option<Self> {
        Self::new(Ext::Fin(lo), Ext::Fin(hi))
    }

    pub fn line() -> Self {
        Interval { lo: Ext::NegInf, hi: Ext::PosInf }
    }

    /// `(c - r, c + r)`, requires `r > 0`.
    pub fn ball(c: &T, r: &T) -> Self {
        Interval {
            lo: Ext::Fin(c.clone() - r.clone()),
            hi: Ext::Fin(c.clone() + r.clone()),
        }
    }

    pub fn contains(&self, x: &T) -> bool {
        self.lo.cmp_fin(x) == Ordering::Less && self.hi.cmp_fin(x) == Ordering::Greater
    }

    /// Membership in the closure, with infinities never members.
    pub fn closure_contains(&self, x: &T) -> bool {
        self.lo.cmp_fin(x) != Ordering::Greater && self.hi.cmp_fin(x) != Ordering::Less
    }

    pub fn meets(&self, o: &Self) -> bool {
        self.lo < o.hi && o.lo < self.hi
    }

    pub fn intersect(&self, o: &Self) -> Option<Self> {
        Self::new(self.lo.clone().max(o.lo.clone()), self.hi.clone().min(o.hi.clone()))
    }

    pub fn contains_interval(&self, o: &Self) -> bool {
        self.lo <= o.lo && o.hi <= self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn length(&self) -> Option<T> {
        match (&self.lo, &self.hi) {
            (Ext::Fin(a), Ext::Fin(b)) => Some(b.clone() - a.clone()),
            _ => None,
        }
    }

    /// A rational point strictly inside.
    pub fn sample(&self) -> T {
        match (&self.lo, &self.hi) {
            (Ext::Fin(a), Ext::Fin(b)) => (a.clone() + b.clone()).half(),
            (Ext::Fin(a), _) => a.clone() + T::one(),
            (_, Ext::Fin(b)) => b.clone() - T::one(),
            _ => T::zero(),
        }
    }
}

impl<T: Scalar> fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

/// A finite union of open intervals in canonical form.
///
/// Intervals are sorted, pairwise disjoint, and never overlap; two intervals
/// may share an endpoint, which is then absent from the set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OpenIntervalSet<T> {
    ivs: Vec<Interval<T>>,
}

impl<T> Default for OpenIntervalSet<T> {
    fn default() -> Self {
        OpenIntervalSet { ivs: Vec::new() }
    }
}

/// Boolean operation for [`OpenIntervalSet::combine`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetOp {
    Intersect,
    Union,
    Diff,
}

impl<T: Scalar> OpenIntervalSet<T> {
    pub fn empty() -> Self {
        OpenIntervalSet { ivs: Vec::new() }
    }

    pub fn single(iv: Interval<T>) -> Self {
        OpenIntervalSet { ivs: vec![iv] }
    }

    pub fn from_intervals<I: IntoIterator<Item = Interval<T>>>(it: I) -> Self {
        let mut v: Vec<Interval<T>> = it.into_iter().collect();
        v.sort_by(|a, b| a.lo.cmp(&b.lo).then(a.hi.cmp(&b.hi)));
        let mut out: Vec<Interval<T>> = Vec::with_capacity(v.len());
        for iv in v {
            if let Some(last) = out.last_mut() {
                if iv.lo < last.hi {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                    continue;
                }
            }
            out.push(iv);
        }
        OpenIntervalSet { ivs: out }
    }

    pub fn intervals(&self) -> &[Interval<T>] {
        &self.ivs
    }

    pub fn is_empty(&self) -> bool {
        self.ivs.is_empty()
    }

    /// Number of connected components.
    pub fn components(&self) -> usize {
        self.ivs.len()
    }

    pub fn contains(&self, x: &T) -> bool {
        let i = self.ivs.partition_point(|iv| iv.hi.cmp_fin(x) != Ordering::Greater);
        i < self.ivs.len() && self.ivs[i].contains(x)
    }

    pub fn contains_interval(&self, o: &Interval<T>) -> bool {
        let i = self.ivs.partition_point(|iv| iv.hi < o.hi);
        i < self.ivs.len() && self.ivs[i].contains_interval(o)
    }

    pub fn is_subset(&self, o: &Self) -> bool {
        self.ivs.iter().all(|iv| o.contains_interval(iv))
    }

    pub fn meets_interval(&self, o: &Interval<T>) -> bool {
        let i = self.ivs.partition_point(|iv| iv.hi <= o.lo);
        i < self.ivs.len() && self.ivs[i].meets(o)
    }

    pub fn union(&self, o: &Self) -> Self {
        Self::from_intervals(self.ivs.iter().chain(o.ivs.iter()).cloned())
    }

    pub fn intersect(&self, o: &Self) -> Self {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.ivs.len() && j < o.ivs.len() {
            let (a, b) = (&self.ivs[i], &o.ivs[j]);
            if let Some(c) = a.intersect(b) {
                out.push(c);
            }
            if a.hi < b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        OpenIntervalSet { ivs: out }
    }

    pub fn intersect_interval(&self, o: &Interval<T>) -> Self {
        OpenIntervalSet {
            ivs: self.ivs.iter().filter_map(|iv| iv.intersect(o)).collect(),
        }
    }

    /// The closed complement of the closure, as an open set: `ℝ \ cl(self)`.
    pub fn exterior(&self) -> Self {
        let mut out = Vec::new();
        let mut cur = Ext::NegInf;
        let mut i = 0;
        while i < self.ivs.len() {
            // Closure merges intervals that touch.
            let lo = self.ivs[i].lo.clone();
            let mut hi = self.ivs[i].hi.clone();
            while i + 1 < self.ivs.len() && self.ivs[i + 1].lo <= hi {
                i += 1;
                hi = hi.max(self.ivs[i].hi.clone());
            }
            if let Some(g) = Interval::new(cur, lo) {
                out.push(g);
            }
            cur = hi;
            i += 1;
        }
        if let Some(g) = Interval::new(cur, Ext::PosInf) {
            out.push(g);
        }
        OpenIntervalSet { ivs: out }
    }

    /// Open-interior difference: `self \ cl(o)`.
    pub fn diff(&self, o: &Self) -> Self {
        self.intersect(&o.exterior())
    }

    pub fn combine(&self, op: SetOp, o: &Self) -> Self {
        match op {
            SetOp::Intersect => self.intersect(o),
            SetOp::Union => self.union(o),
            SetOp::Diff => self.diff(o),
        }
    }

    /// Finite endpoints of all components, sorted and deduplicated.
    pub fn endpoints(&self) -> Vec<T> {
        let mut v: Vec<T> = self
            .ivs
            .iter()
            .flat_map(|iv| [iv.lo.fin().cloned(), iv.hi.fin().cloned()])
            .flatten()
            .collect();
        v.sort();
        v.dedup();
        v
    }
}

impl<T: Scalar> fmt::Display for OpenIntervalSet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ivs.is_empty() {
            return write!(f, "{{}}");
        }
        let parts: Vec<String> = self.ivs.iter().map(|iv| iv.to_string()).collect();
        write!(f, "{}", parts.join(" ∪ "))
    }
}
