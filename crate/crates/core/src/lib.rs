//! Exact workbench for non-Hausdorff 1-manifolds presented as adjunction
//! systems of interval charts.
//!
//! Everything exact is generic over a [`Scalar`] (any `Ratio<I>`); the aliases
//! below fix `BigRational`, which never overflows.

pub mod atlas;
pub mod catalog;
pub mod nhcalc;
pub mod ratcore;
pub mod scalar;

pub use scalar::Scalar;

pub type Rat = num_rational::BigRational;
pub type ExtRat = ratcore::Ext<Rat>;
pub type RatInterval = ratcore::Interval<Rat>;
pub type RatSet = ratcore::OpenIntervalSet<Rat>;
pub type RatPiece = ratcore::AffinePiece<Rat>;
pub type RatExpr = ratcore::Expr<Rat>;
pub type RatCascade = ratcore::Cascade<Rat>;
pub type System = atlas::AdjunctionSystem<Rat>;
pub type Point = atlas::MfdPoint<Rat>;
pub type QSet = atlas::QOpenSet<Rat>;

/// `p/q` as a [`Rat`]; panics on a zero denominator.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::from_frac(p, q)
}
