//! Basic neighborhoods `W(V, t, ε, σ)` of `M^R` and the floor maps `h_{t,σ}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::recipe::{FlowError, Recipe, SigmaVec};
use crate::Real;

/// A point `⟨x, t, σ⟩` of `M^R`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloorPoint<F> {
    pub x: Vec<F>,
    pub t: F,
    pub floor: SigmaVec,
}

/// `W(V, t, ε, σ)` with `V` the open sup-norm ball of `radius` about `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct WSpec<F> {
    pub center: Vec<F>,
    pub radius: F,
    pub t: F,
    pub eps: F,
    pub sigma: SigmaVec,
}

impl<F: Real> WSpec<F> {
    fn check(&self, r: &Recipe<F>) -> Result<(), FlowError> {
        r.check_sigma(&self.sigma)?;
        r.flow().check_point(&self.center)?;
        if !(self.radius > F::zero()) || !(self.eps > F::zero()) {
            return Err(FlowError::BadParams("radius and eps must be positive".into()));
        }
        Ok(())
    }
}

fn is_zero(s: &[i64]) -> bool {
    s.iter().all(|&c| c == 0)
}

/// How far `p` lies outside `W`: zero inside, positive outside, infinite when
/// `p` is on a floor or at a time `W` never reaches.
pub fn w_residual<F: Real>(r: &Recipe<F>, w: &WSpec<F>, p: &FloorPoint<F>) -> F {
    let fl = r.flow();
    let outside = |y: &[F]| (fl.distance(y, &w.center) - w.radius).max(F::zero());
    if p.t == w.t && p.floor == w.sigma {
        return outside(&p.x);
    }
    let dt = p.t - w.t;
    if !is_zero(&p.floor) || dt.abs() >= w.eps {
        return F::infinity();
    }
    if dt == F::zero() {
        // Only a ground-floor W holds its own central slice on floor ⟨0⟩.
        return if is_zero(&w.sigma) { outside(&p.x) } else { F::infinity() };
    }
    let back: Vec<i64> = w.sigma.iter().map(|c| -c).collect();
    outside(&r.push(&back, &p.x, dt))
}

#[derive(Debug, Clone, PartialEq)]
pub enum WOutcome<F> {
    Witness { point: FloorPoint<F>, residuals: [F; 2], tries: usize },
    /// `exhausted` is false when the two sets are disjoint for a structural
    /// reason, true when the sampling budget ran out.
    Empty { exhausted: bool, tries: usize },
}

impl<F> WOutcome<F> {
    pub fn found(&self) -> bool {
        matches!(self, WOutcome::Witness { .. })
    }
}

const RESIDUAL_CAP: f64 = 1e-9;
/// Offsets from a singular time are drawn log-uniformly across this many decades.
const DECADES: f64 = 12.0;

/// Look for a common point of two `W` sets.
pub fn w_intersection_sample<F: Real>(
    r: &Recipe<F>,
    a: &WSpec<F>,
    b: &WSpec<F>,
    budget: usize,
    seed: u64,
) -> Result<WOutcome<F>, FlowError> {
    a.check(r)?;
    b.check(r)?;
    let fl = r.flow();
    let accept = |pt: FloorPoint<F>, tries: usize| {
        let residuals = [w_residual(r, a, &pt), w_residual(r, b, &pt)];
        (residuals.iter().all(|&e| e < F::lit(RESIDUAL_CAP))).then_some(WOutcome::Witness { point: pt, residuals, tries })
    };
    if a.t == b.t && a.sigma == b.sigma {
        if let Some(x) = between(r, &a.center, a.radius, &b.center, b.radius) {
            if let Some(w) = accept(FloorPoint { x, t: a.t, floor: a.sigma.clone() }, 0) {
                return Ok(w);
            }
        }
    }
    let lo = (a.t - a.eps).max(b.t - b.eps);
    let hi = (a.t + a.eps).min(b.t + b.eps);
    if lo >= hi {
        return Ok(WOutcome::Empty { exhausted: false, tries: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let floor0 = vec![0; a.sigma.len()];
    for i in 0..budget {
        let u: f64 = rng.gen();
        let s = match i % 3 {
            0 | 1 => {
                let (t0, eps) = if i % 3 == 0 { (a.t, a.eps) } else { (b.t, b.eps) };
                let side = if rng.gen::<bool>() { F::one() } else { -F::one() };
                t0 + side * eps * F::lit(10f64.powf(-DECADES * u))
            }
            _ => lo + (hi - lo) * F::lit(u),
        };
        if !(s > lo && s < hi) || (s == a.t && !is_zero(&a.sigma)) || (s == b.t && !is_zero(&b.sigma)) {
            continue;
        }
        let ca = r.push(&a.sigma, &a.center, s - a.t);
        let cb = r.push(&b.sigma, &b.center, s - b.t);
        if fl.distance(&ca, &cb) >= a.radius + b.radius {
            continue;
        }
        let Some(x) = between(r, &ca, a.radius, &cb, b.radius) else { continue };
        if let Some(w) = accept(FloorPoint { x, t: s, floor: floor0.clone() }, i + 1) {
            return Ok(w);
        }
    }
    Ok(WOutcome::Empty { exhausted: true, tries: budget })
}

/// The point dividing `ca → cb` in the ratio of the radii; it lies strictly
/// inside both balls when they overlap.
fn between<F: Real>(r: &Recipe<F>, ca: &[F], ra: F, cb: &[F], rb: F) -> Option<Vec<F>> {
    let fl = r.flow();
    if fl.distance(ca, cb) >= ra + rb {
        return None;
    }
    let w = ra / (ra + rb);
    let x: Vec<F> = ca.iter().zip(cb).map(|(&u, &v)| u + fl.coord_delta(u, v) * w).collect();
    Some(fl.normalize(&x))
}

/// `h_{t,σ}`: ψ off the slice `s = t`, a floor shift on it.
pub fn h_map<F: Real>(r: &Recipe<F>, t: F, sigma: &[i64], p: &FloorPoint<F>) -> Result<FloorPoint<F>, FlowError> {
    r.check_sigma(sigma)?;
    r.check_sigma(&p.floor)?;
    r.flow().check_point(&p.x)?;
    if p.t == t {
        let floor = p.floor.iter().zip(sigma).map(|(a, b)| a + b).collect();
        return Ok(FloorPoint { x: p.x.clone(), t, floor });
    }
    Ok(FloorPoint { x: r.push(sigma, &p.x, p.t - t), t: p.t, floor: p.floor.clone() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HReport<F> {
    pub samples: usize,
    /// Largest `|h_{t,−σ}(h_{t,σ}(p)) − p|`.
    pub roundtrip_max: F,
    /// Largest error recovering the `V` point behind an image of a `W` point.
    pub w_recovery_max: F,
    /// Every image sat on the floor the definition predicts.
    pub floors_ok: bool,
    /// `σ = 0` and every image equals its argument bit for bit.
    pub identity_exact: bool,
}

impl<F: Real> HReport<F> {
    pub fn ok(&self, tol: F) -> bool {
        self.roundtrip_max < tol && self.w_recovery_max < tol && self.floors_ok
    }
}

/// Check `h_{t,σ}` on random points and random `W` points. Off-slice times
/// stay at least `10⁻⁴` from `t` so displacements remain representable.
pub fn h_map_check<F: Real>(r: &Recipe<F>, t: F, sigma: &[i64], samples: usize, seed: u64) -> Result<HReport<F>, FlowError> {
    r.check_sigma(sigma)?;
    let fl = r.flow();
    let d = fl.dim();
    let k = sigma.len();
    let neg: SigmaVec = sigma.iter().map(|c| -c).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = HReport { samples, roundtrip_max: F::zero(), w_recovery_max: F::zero(), floors_ok: true, identity_exact: is_zero(sigma) };
    let base_point = |rng: &mut ChaCha8Rng| -> Vec<F> {
        (0..d).map(|_| if fl.is_compact() { F::lit(rng.gen::<f64>()) } else { F::lit(rng.gen_range(-10.0..10.0)) }).collect()
    };
    let time = |rng: &mut ChaCha8Rng| -> F {
        if rng.gen_ratio(1, 4) {
            t
        } else {
            let side = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            t + F::lit(side * 10f64.powf(-4.0 * rng.gen::<f64>()))
        }
    };
    for _ in 0..samples {
        let floor: SigmaVec = (0..k).map(|_| rng.gen_range(-3..=3)).collect();
        let p = FloorPoint { x: base_point(&mut rng), t: time(&mut rng), floor };
        let q = h_map(r, t, sigma, &p)?;
        if rep.identity_exact && q != p {
            rep.identity_exact = false;
        }
        let want_floor: SigmaVec = if p.t == t { p.floor.iter().zip(sigma).map(|(a, b)| a + b).collect() } else { p.floor.clone() };
        rep.floors_ok &= q.floor == want_floor && q.t == p.t;
        let back = h_map(r, t, &neg, &q)?;
        rep.floors_ok &= back.floor == p.floor;
        rep.roundtrip_max = rep.roundtrip_max.max(fl.distance(&back.x, &p.x));

        // A point of W(V, t, 1, τ) built from v ∈ V, pushed by h_{t,σ}, must
        // pull back to v through W(V, t, 1, τ+σ).
        let tau = p.floor;
        let v = base_point(&mut rng);
        let s = time(&mut rng);
        let w = if s == t { FloorPoint { x: v.clone(), t, floor: tau.clone() } } else { FloorPoint { x: r.push(&tau, &v, s - t), t: s, floor: vec![0; k] } };
        let img = h_map(r, t, sigma, &w)?;
        let sum: SigmaVec = tau.iter().zip(sigma).map(|(a, b)| a + b).collect();
        let recovered = if s == t {
            rep.floors_ok &= img.floor == sum;
            img.x.clone()
        } else {
            rep.floors_ok &= is_zero(&img.floor);
            let back: SigmaVec = sum.iter().map(|c| -c).collect();
            r.push(&back, &img.x, s - t)
        };
        rep.w_recovery_max = rep.w_recovery_max.max(fl.distance(&recovered, &v));
    }
    Ok(rep)
}
