//! Two planar spaces whose separation facts are checked by shrinking
//! neighborhoods instead of exact data.
//!
//! `SphereBoundary` is `R² ∪ {0*}` where `0*` has the neighborhoods
//! `{0*} ∪ (B(0, 1+r) − closed B(0, 1))`. `Prufer` glues two planes `P₀, P₁`
//! along the left half plane `H` through `φ(x, y) = (x, yx + c)`.

use std::fmt;

use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Demo<F> {
    SphereBoundary,
    Prufer { c: F },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DemoPoint<F> {
    /// The extra point of the sphere-boundary space.
    ZeroStar,
    /// `(x, y)` in chart `chart`; the sphere-boundary plane is chart 0.
    Plane { chart: u8, x: F, y: F },
}

impl<F: Real> DemoPoint<F> {
    pub fn at(chart: u8, x: F, y: F) -> Self {
        DemoPoint::Plane { chart, x, y }
    }
}

impl<F: Real> fmt::Display for DemoPoint<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DemoPoint::ZeroStar => f.write_str("0*"),
            DemoPoint::Plane { chart, x, y } => write!(f, "P{chart}({x}, {y})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampledVerdict<F> {
    Equal,
    /// Neighborhoods met at every radius of the schedule.
    NotSeparated { down_to: F },
    /// First radius at which the neighborhoods were found disjoint.
    Separated { radius: F },
}

impl<F> SampledVerdict<F> {
    pub fn label(&self) -> &'static str {
        match self {
            SampledVerdict::Equal => "Equal",
            SampledVerdict::NotSeparated { .. } => "NotSeparated",
            SampledVerdict::Separated { .. } => "Separated",
        }
    }
}

/// `1, 1/2, 1/4, …` down to the first power of two at most `1e-6`.
pub fn radius_schedule<F: Real>() -> Vec<F> {
    let mut out = vec![F::one()];
    while *out.last().unwrap() > F::lit(1e-6) {
        out.push(*out.last().unwrap() / F::lit(2.0));
    }
    out
}

const GRID: usize = 64;

impl<F: Real> Demo<F> {
    pub fn name(&self) -> &'static str {
        match self {
            Demo::SphereBoundary => "sphereBoundary",
            Demo::Prufer { .. } => "prufer",
        }
    }

    /// `φ(x, y) = (x, yx + c)` on `x < 0`.
    fn phi(&self, x: F, y: F) -> (F, F) {
        let c = match self {
            Demo::Prufer { c } => *c,
            Demo::SphereBoundary => F::zero(),
        };
        (x, y * x + c)
    }

    /// Points of `H₁` are stored as their image in `H₀`.
    pub fn canonical(&self, p: DemoPoint<F>) -> DemoPoint<F> {
        match (self, p) {
            (Demo::Prufer { .. }, DemoPoint::Plane { chart: 1, x, y }) if x < F::zero() => {
                let (u, v) = self.phi(x, y);
                DemoPoint::Plane { chart: 0, x: u, y: v }
            }
            _ => p,
        }
    }

    pub fn check(&self, p: &DemoPoint<F>) -> bool {
        match (self, p) {
            (Demo::SphereBoundary, DemoPoint::ZeroStar) => true,
            (Demo::SphereBoundary, DemoPoint::Plane { chart, x, y }) => *chart == 0 && x.is_finite() && y.is_finite(),
            (Demo::Prufer { .. }, DemoPoint::Plane { chart, x, y }) => *chart <= 1 && x.is_finite() && y.is_finite(),
            _ => false,
        }
    }

    /// Whether the radius-`r` neighborhoods of two canonical points meet.
    pub fn nbhds_meet(&self, a: DemoPoint<F>, b: DemoPoint<F>, r: F) -> bool {
        match (self, a, b) {
            (_, DemoPoint::ZeroStar, DemoPoint::ZeroStar) => true,
            (Demo::SphereBoundary, DemoPoint::ZeroStar, DemoPoint::Plane { x, y, .. })
            | (Demo::SphereBoundary, DemoPoint::Plane { x, y, .. }, DemoPoint::ZeroStar) => {
                // Radii reached by B(q, r) against the annulus 1 < |z| < 1 + r.
                let n = x.hypot(y);
                let (lo, hi) = ((n - r).max(F::zero()), n + r);
                lo < F::one() + r && hi > F::one()
            }
            (Demo::Prufer { .. }, DemoPoint::Plane { chart: ca, x: xa, y: ya }, DemoPoint::Plane { chart: cb, x: xb, y: yb }) => {
                if ca == cb && (xa - xb).hypot(ya - yb) < r + r {
                    return true;
                }
                // Glued parts: search B_b ∩ H₁ (or B_a ∩ H₁) for a point whose
                // image under φ falls in the other ball.
                (cb == 1 && self.witness(xb, yb, xa, ya, r, ca)) || (ca == 1 && self.witness(xa, ya, xb, yb, r, cb))
            }
            (Demo::SphereBoundary, DemoPoint::Plane { x: xa, y: ya, .. }, DemoPoint::Plane { x: xb, y: yb, .. }) => {
                (xa - xb).hypot(ya - yb) < r + r
            }
            _ => false,
        }
    }

    /// A grid point of `B((bx, by), r) ∩ H₁` whose `φ` image lies within `r`
    /// of `(ax, ay)`. Images land in `P₀`, so only chart 0 targets can match.
    fn witness(&self, bx: F, by: F, ax: F, ay: F, r: F, other: u8) -> bool {
        if other != 0 {
            return false;
        }
        for i in 0..GRID {
            // Radii shrink geometrically so the grid reaches the glued edge.
            let rho = r * F::lit(0.5f64.powf(i as f64 / 4.0) * 0.999);
            for j in 0..GRID {
                let th = F::PI() * (F::lit(0.5) + F::lit((j as f64 + 0.5) / GRID as f64));
                let (x, y) = (bx + rho * th.cos(), by + rho * th.sin());
                if x >= F::zero() {
                    continue;
                }
                let (u, v) = self.phi(x, y);
                if (u - ax).hypot(v - ay) < r {
                    return true;
                }
            }
        }
        false
    }
}

/// Separation of `a` and `b` sampled along [`radius_schedule`].
pub fn planar_demo<F: Real>(demo: &Demo<F>, a: DemoPoint<F>, b: DemoPoint<F>) -> Option<SampledVerdict<F>> {
    if !demo.check(&a) || !demo.check(&b) {
        return None;
    }
    let (a, b) = (demo.canonical(a), demo.canonical(b));
    if a == b {
        return Some(SampledVerdict::Equal);
    }
    let sched = radius_schedule::<F>();
    for &r in &sched {
        if !demo.nbhds_meet(a, b, r) {
            return Some(SampledVerdict::Separated { radius: r });
        }
    }
    Some(SampledVerdict::NotSeparated { down_to: *sched.last().unwrap() })
}
