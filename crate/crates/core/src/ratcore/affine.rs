use std::fmt;

use super::interval::{Ext, Interval, OpenIntervalSet};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    Preserve,
    Reverse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dir {
    Fwd,
    Inv,
}

/// `x ↦ slope·x + offset` restricted to an open interval.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffinePiece<T> {
    pub dom: Interval<T>,
    pub slope: T,
    pub offset: T,
}

impl<T: Scalar> AffinePiece<T> {
    /// `None` for a zero slope.
    pub fn new(dom: Interval<T>, slope: T, offset: T) -> Option<Self> {
        (!slope.is_zero()).then_some(AffinePiece { dom, slope, offset })
    }

    pub fn identity(dom: Interval<T>) -> Self {
        AffinePiece { dom, slope: T::one(), offset: T::zero() }
    }

    pub fn translation(dom: Interval<T>, by: T) -> Self {
        AffinePiece { dom, slope: T::one(), offset: by }
    }

    /// The unique affine map of bounded `dom` onto bounded `img`.
    pub fn between(dom: Interval<T>, img: &Interval<T>, o: Orientation) -> Option<Self> {
        let (d0, d1) = (dom.lo.fin()?.clone(), dom.hi.fin()?.clone());
        let (i0, i1) = (img.lo.fin()?.clone(), img.hi.fin()?.clone());
        let (t0, t1) = match o {
            Orientation::Preserve => (i0, i1),
            Orientation::Reverse => (i1, i0),
        };
        let slope = (t1 - t0.clone()) / (d1 - d0.clone());
        let offset = t0 - slope.clone() * d0;
        Self::new(dom, slope, offset)
    }

    pub fn orientation(&self) -> Orientation {
        if self.slope.is_positive() {
            Orientation::Preserve
        } else {
            Orientation::Reverse
        }
    }

    pub fn apply(&self, x: &T) -> T {
        self.slope.clone() * x.clone() + self.offset.clone()
    }

    pub fn unapply(&self, y: &T) -> T {
        (y.clone() - self.offset.clone()) / self.slope.clone()
    }

    pub fn apply_ext(&self, x: &Ext<T>) -> Ext<T> {
        match x {
            Ext::Fin(v) => Ext::Fin(self.apply(v)),
            inf if self.slope.is_positive() => inf.clone(),
            inf => inf.neg(),
        }
    }

    pub fn unapply_ext(&self, y: &Ext<T>) -> Ext<T> {
        match y {
            Ext::Fin(v) => Ext::Fin(self.unapply(v)),
            inf if self.slope.is_positive() => inf.clone(),
            inf => inf.neg(),
        }
    }

    /// Image of an interval (not clipped to the domain).
    pub fn map_interval(&self, iv: &Interval<T>) -> Interval<T> {
        let (a, b) = (self.apply_ext(&iv.lo), self.apply_ext(&iv.hi));
        if a < b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn unmap_interval(&self, iv: &Interval<T>) -> Interval<T> {
        let (a, b) = (self.unapply_ext(&iv.lo), self.unapply_ext(&iv.hi));
        if a < b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn img(&self) -> Interval<T> {
        self.map_interval(&self.dom)
    }

    pub fn inverse(&self) -> Self {
        let slope = T::one() / self.slope.clone();
        let offset = -(self.offset.clone() * slope.clone());
        AffinePiece { dom: self.img(), slope, offset }
    }

    /// Image of `iv ∩ dom`.
    pub fn push(&self, iv: &Interval<T>) -> Option<Interval<T>> {
        iv.intersect(&self.dom).map(|c| self.map_interval(&c))
    }

    /// Preimage of `iv ∩ img`.
    pub fn pull(&self, iv: &Interval<T>) -> Option<Interval<T>> {
        iv.intersect(&self.img()).map(|c| self.unmap_interval(&c))
    }

    pub fn apply_set(&self, dir: Dir, s: &OpenIntervalSet<T>) -> OpenIntervalSet<T> {
        OpenIntervalSet::from_intervals(s.intervals().iter().filter_map(|iv| match dir {
            Dir::Fwd => self.push(iv),
            Dir::Inv => self.pull(iv),
        }))
    }

    /// `next ∘ self` on `dom(self) ∩ self⁻¹(dom(next))`; `None` when empty.
    pub fn then(&self, next: &Self) -> Option<Self> {
        let dom = self.pull(&next.dom)?;
        Some(AffinePiece {
            dom,
            slope: next.slope.clone() * self.slope.clone(),
            offset: next.slope.clone() * self.offset.clone() + next.offset.clone(),
        })
    }

    /// Same affine formula (domains ignored).
    pub fn same_map(&self, o: &Self) -> bool {
        self.slope == o.slope && self.offset == o.offset
    }
}

impl<T: Scalar> fmt::Display for AffinePiece<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x ↦ {}·x + {} on {}", self.slope, self.offset, self.dom)
    }
}
