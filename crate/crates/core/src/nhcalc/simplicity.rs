use thiserror::Error;

use crate::atlas::{saturate, AdjunctionSystem, AtlasError, MfdPoint, QOpenSet};
use crate::ratcore::{Interval, OpenIntervalSet};
use crate::scalar::Scalar;

/// Radii `2^-1 .. 2^-SCHEDULE` are reported.
const SCHEDULE: u32 = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimplicityError {
    #[error(transparent)]
    Atlas(#[from] AtlasError),
    #[error("{0} lies in the open set")]
    InsideSet(String),
    #[error("{0} is not in the closure of the open set")]
    NotInClosure(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    /// Small neighborhoods meet the set in exactly this many components.
    Simple(usize),
    NotFSimple,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicityReport<T> {
    pub point: MfdPoint<T>,
    pub set: QOpenSet<T>,
    pub classification: Classification,
    /// The count is constant for every radius at most this.
    pub stabilization_eps: Option<T>,
    /// `(eps, components)` along the schedule; `None` means infinitely many.
    pub counts: Vec<(T, Option<usize>)>,
}

/// Components of `U ∩ B(p, eps)`, or `None` when infinitely many.
fn count<T: Scalar>(
    s: &AdjunctionSystem<T>,
    sat: &QOpenSet<T>,
    p: &MfdPoint<T>,
    eps: &T,
) -> Result<Option<usize>, AtlasError> {
    let w = s.window(p, eps)?;
    let mut here = sat.chart_set(p.chart).intersect_interval(&w);
    for tail in sat.tails.iter().filter(|t| t.to == p.chart) {
        let tr = s.transition(tail.from, tail.to).expect("tail transition");
        let c = &tr.cascades[tail.cascade];
        let plan = c.plan(Some(&tail.window), Some(&w))?;
        if plan.clusters.iter().any(|cl| cl.is_infinite()) {
            return Ok(None);
        }
        let mut extra: Vec<Interval<T>> = Vec::new();
        for (idx, pc) in &plan.partial {
            if c.cluster_contains(&tail.cluster, *idx) {
                extra.extend(pc.img().intersect(&w));
            }
        }
        for cl in &plan.clusters {
            for (idx, pc) in c.cluster_pieces(cl, u64::MAX)? {
                if c.cluster_contains(&tail.cluster, idx) {
                    extra.extend(pc.img().intersect(&w));
                }
            }
        }
        here = here.union(&OpenIntervalSet::from_intervals(extra));
    }
    Ok(Some(here.components()))
}

/// Counts components of `u ∩ B(p, eps)` as `eps` shrinks.
pub fn simplicity_at<T: Scalar>(
    s: &AdjunctionSystem<T>,
    u: &QOpenSet<T>,
    p: &MfdPoint<T>,
) -> Result<SimplicityReport<T>, SimplicityError> {
    let sat = saturate(s, u)?;
    if sat.contains(s, p)? {
        return Err(SimplicityError::InsideSet(p.to_string()));
    }
    let here = sat.chart_set(p.chart);
    let x = &p.coord;
    let ext = &s.chart(p.chart)?.extent;
    // Distance to the nearest feature other than x itself.
    let mut d: Option<T> = None;
    let mut consider = |v: &T| {
        let g = (v.clone() - x.clone()).abs();
        if g.is_positive() && d.as_ref().is_none_or(|b| g < *b) {
            d = Some(g);
        }
    };
    for e in here.endpoints() {
        consider(&e);
    }
    for e in [ext.lo.fin(), ext.hi.fin()].into_iter().flatten() {
        consider(e);
    }
    let stab = d.unwrap_or_else(T::one);

    let mut counts = Vec::new();
    let mut eps = T::one();
    for _ in 0..SCHEDULE {
        eps = eps.half();
        counts.push((eps.clone(), count(s, &sat, p, &eps)?));
    }
    let at_stab = count(s, &sat, p, &stab)?;
    let (classification, stabilization_eps) = match at_stab {
        None => (Classification::NotFSimple, None),
        Some(_) if counts.iter().any(|(_, c)| c.is_none()) => (Classification::NotFSimple, None),
        Some(0) => return Err(SimplicityError::NotInClosure(p.to_string())),
        Some(n) => (Classification::Simple(n), Some(stab)),
    };
    Ok(SimplicityReport { point: p.clone(), set: sat, classification, stabilization_eps, counts })
}
