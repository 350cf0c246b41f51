//! Empirical accumulation sets `A(x, σ)`: where `Φ_{g_σ(t)}(x)` piles up as
//! `t → 0`.

use crate::recipe::{FlowError, Recipe, SigmaVec};
use crate::Real;

/// Golden-ratio approximant; keeps `t_k = γ/k` off the integer lattice.
pub const GAMMA: f64 = 0.6180339887;
/// Below this diameter the cloud is a single point.
pub const SINGLETON_DIAMETER: f64 = 1e-6;
/// Occupancy needed to call a hull or window covered.
pub const COVERED: f64 = 0.99;

#[derive(Debug, Clone, PartialEq)]
pub struct AccParams<F> {
    pub samples: usize,
    pub gamma: F,
    /// Bins per axis; 256 on one-dimensional bases and 32 otherwise when unset.
    pub bins: Option<usize>,
    /// Half width of the window watched on the line.
    pub half_width: F,
    pub keep_cloud: bool,
}

impl<F: Real> Default for AccParams<F> {
    fn default() -> Self {
        AccParams { samples: 100_000, gamma: F::lit(GAMMA), bins: None, half_width: F::lit(8.0), keep_cloud: false }
    }
}

impl<F: Real> AccParams<F> {
    pub fn with_samples(samples: usize) -> Self {
        AccParams { samples, ..Self::default() }
    }
}

/// Occupancy of a uniform grid over the box `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coverage<F> {
    pub lo: Vec<F>,
    pub hi: Vec<F>,
    pub bins: usize,
    pub occupied: usize,
    pub total: usize,
}

impl<F: Real> Coverage<F> {
    pub fn fraction(&self) -> f64 {
        self.occupied as f64 / self.total as f64
    }

    pub fn bin_width(&self) -> F {
        (self.hi[0] - self.lo[0]) / F::lit(self.bins as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AccShape<F> {
    Full,
    Interval { lo: F, hi: F },
    Singleton,
    /// Extremes grow without bound and the watched window is covered.
    UnboundedWindowCoverage { lo: F, hi: F },
    Partial,
}

impl<F> AccShape<F> {
    pub fn label(&self) -> &'static str {
        match self {
            AccShape::Full => "full",
            AccShape::Interval { .. } => "interval",
            AccShape::Singleton => "singleton",
            AccShape::UnboundedWindowCoverage { .. } => "unboundedWindowCoverage",
            AccShape::Partial => "partial",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccEstimate<F> {
    pub x: Vec<F>,
    pub sigma: SigmaVec,
    pub params: AccParams<F>,
    /// Samples in order: `t = γ/k` for `k = 1..K`, then `t = −γ/k`.
    pub cloud: Option<Vec<Vec<F>>>,
    /// Largest distance from `x` over the cloud.
    pub radius: F,
    /// Cloud extremes, per axis.
    pub hull: (Vec<F>, Vec<F>),
    /// Whole base on compact bases, the hull on the line.
    pub coverage: Coverage<F>,
    /// The watched window on the line.
    pub window: Option<Coverage<F>>,
    pub shape: AccShape<F>,
    compact: bool,
}

/// Samples `Φ_{g_σ(±γ/k)}(x)` and classifies what they fill.
pub fn accumulation_estimate<F: Real>(
    r: &Recipe<F>,
    x: &[F],
    sigma: &[i64],
    params: &AccParams<F>,
) -> Result<AccEstimate<F>, FlowError> {
    r.check_sigma(sigma)?;
    r.flow().check_point(x)?;
    if params.samples < 1000 {
        return Err(FlowError::BadParams(format!("need at least 10³ samples, got {}", params.samples)));
    }
    if !(params.gamma > F::zero()) || !(params.half_width > F::zero()) {
        return Err(FlowError::BadParams("gamma and window must be positive".into()));
    }
    let x = r.flow().normalize(x);
    let k = params.samples;
    let sample = |i: usize| {
        let (sign, j) = if i < k { (F::one(), i + 1) } else { (-F::one(), i + 1 - k) };
        r.push(sigma, &x, sign * params.gamma / F::lit(j as f64))
    };
    if r.flow().is_compact() {
        compact_estimate(r, &x, sigma, params, sample)
    } else {
        let cloud: Vec<F> = (0..2 * k).map(|i| sample(i)[0]).collect();
        Ok(line_estimate(x, sigma.to_vec(), params, cloud))
    }
}

fn compact_estimate<F: Real>(
    r: &Recipe<F>,
    x: &[F],
    sigma: &[i64],
    params: &AccParams<F>,
    sample: impl Fn(usize) -> Vec<F>,
) -> Result<AccEstimate<F>, FlowError> {
    let d = x.len();
    let bins = params.bins.unwrap_or(if d == 1 { 256 } else { 32 });
    let total = bins.checked_pow(d as u32).filter(|&t| t <= 1 << 28).ok_or_else(|| FlowError::BadParams("grid too fine".into()))?;
    let mut grid = vec![false; total];
    let mut cloud = params.keep_cloud.then(Vec::new);
    let mut radius = F::zero();
    let (mut lo, mut hi) = (vec![F::infinity(); d], vec![F::neg_infinity(); d]);
    for i in 0..2 * params.samples {
        let y = sample(i);
        grid[cell(&y, bins)] = true;
        radius = radius.max(r.flow().distance(x, &y));
        for a in 0..d {
            lo[a] = lo[a].min(y[a]);
            hi[a] = hi[a].max(y[a]);
        }
        if let Some(c) = cloud.as_mut() {
            c.push(y);
        }
    }
    let occupied = grid.iter().filter(|&&b| b).count();
    let coverage = Coverage { lo: vec![F::zero(); d], hi: vec![F::one(); d], bins, occupied, total };
    let shape = if radius < F::lit(SINGLETON_DIAMETER / 2.0) {
        AccShape::Singleton
    } else if occupied == total {
        AccShape::Full
    } else {
        AccShape::Partial
    };
    Ok(AccEstimate {
        x: x.to_vec(),
        sigma: sigma.to_vec(),
        params: params.clone(),
        cloud,
        radius,
        hull: (lo, hi),
        coverage,
        window: None,
        shape,
        compact: true,
    })
}

/// Row-major cell of a point of `[0, 1)^d`.
fn cell<F: Real>(y: &[F], bins: usize) -> usize {
    y.iter().fold(0, |acc, &v| acc * bins + bin_of(v, F::zero(), F::one(), bins).unwrap_or(0))
}

fn bin_of<F: Real>(v: F, lo: F, hi: F, bins: usize) -> Option<usize> {
    if v < lo || v > hi {
        return None;
    }
    let i = ((v - lo) / (hi - lo) * F::lit(bins as f64)).floor().to_usize().unwrap_or(0);
    Some(i.min(bins - 1))
}

/// Bins of `[lo, hi]` hit by the path through `cloud`. Consecutive samples of
/// one branch come from a continuous curve, so the segment between them is
/// covered too.
fn path_coverage<F: Real>(cloud: &[F], branch: usize, lo: F, hi: F, bins: usize) -> Coverage<F> {
    let mut diff = vec![0i64; bins + 1];
    let mut mark = |a: F, b: F| {
        let (a, b) = (a.min(b).max(lo), a.max(b).min(hi));
        if a > b {
            return;
        }
        let (i, j) = (bin_of(a, lo, hi, bins).unwrap(), bin_of(b, lo, hi, bins).unwrap());
        diff[i] += 1;
        diff[j + 1] -= 1;
    };
    for part in [&cloud[..branch], &cloud[branch..]] {
        if let [only] = part {
            mark(*only, *only);
        }
        for w in part.windows(2) {
            mark(w[0], w[1]);
        }
    }
    let mut run = 0;
    let occupied = diff[..bins]
        .iter()
        .filter(|&&d| {
            run += d;
            run > 0
        })
        .count();
    Coverage { lo: vec![lo], hi: vec![hi], bins, occupied, total: bins }
}

fn line_estimate<F: Real>(x: Vec<F>, sigma: SigmaVec, params: &AccParams<F>, cloud: Vec<F>) -> AccEstimate<F> {
    let k = params.samples;
    let bins = params.bins.unwrap_or(256);
    let x0 = x[0];
    let (lo, hi) = extremes(&cloud);
    let radius = (hi - x0).max(x0 - lo);
    let coverage = if hi > lo {
        path_coverage(&cloud, k, lo, hi, bins)
    } else {
        Coverage { lo: vec![lo], hi: vec![hi], bins, occupied: bins, total: bins }
    };
    let (wlo, whi) = (x0 - params.half_width, x0 + params.half_width);
    let window = path_coverage(&cloud, k, wlo, whi, bins);
    // Extremes over the first half of each branch; unbounded sets keep growing.
    let half = k / 2;
    let (elo, ehi) = extremes(cloud[..half].iter().chain(&cloud[k..k + half]));
    let grows = (hi - x0) > F::lit(1.5) * (ehi - x0) && (x0 - lo) > F::lit(1.5) * (x0 - elo);
    let shape = if radius < F::lit(SINGLETON_DIAMETER / 2.0) {
        AccShape::Singleton
    } else if grows && lo < wlo && hi > whi && window.fraction() >= COVERED {
        AccShape::UnboundedWindowCoverage { lo: wlo, hi: whi }
    } else if !grows && coverage.fraction() >= COVERED {
        AccShape::Interval { lo, hi }
    } else {
        AccShape::Partial
    };
    AccEstimate {
        x,
        sigma,
        params: params.clone(),
        cloud: params.keep_cloud.then(|| cloud.iter().map(|&v| vec![v]).collect()),
        radius,
        hull: (vec![lo], vec![hi]),
        coverage,
        window: Some(window),
        shape,
        compact: false,
    }
}

fn extremes<'a, F: Real>(it: impl IntoIterator<Item = &'a F>) -> (F, F) {
    it.into_iter().fold((F::infinity(), F::neg_infinity()), |(a, b), &v| (a.min(v), b.max(v)))
}

impl<F: Real> AccEstimate<F> {
    /// Recompute both coverage tables from the stored cloud.
    pub fn recompute_coverage(&self) -> Option<(Coverage<F>, Option<Coverage<F>>)> {
        let cloud = self.cloud.as_ref()?;
        if self.compact {
            let d = self.x.len();
            let bins = self.coverage.bins;
            let mut grid = vec![false; self.coverage.total];
            for y in cloud {
                grid[cell(y, bins)] = true;
            }
            let occupied = grid.iter().filter(|&&b| b).count();
            return Some((Coverage { lo: vec![F::zero(); d], hi: vec![F::one(); d], bins, occupied, total: grid.len() }, None));
        }
        let flat: Vec<F> = cloud.iter().map(|v| v[0]).collect();
        let again = line_estimate(self.x.clone(), self.sigma.clone(), &self.params, flat);
        Some((again.coverage, again.window))
    }

    /// Whether `y` lies in the estimated set. `None` within one bin of its
    /// edge, outside the watched window of an unbounded set, and for partial
    /// sets.
    pub fn contains(&self, y: &[F]) -> Option<bool> {
        let outside = |lo: F, hi: F, bin: F| {
            let v = y[0];
            if v >= lo && v <= hi {
                Some(true)
            } else if v < lo - bin || v > hi + bin {
                Some(false)
            } else {
                None
            }
        };
        match &self.shape {
            AccShape::Full => Some(true),
            AccShape::Partial => None,
            AccShape::Singleton => {
                let d = if self.compact { self.dist_compact(y) } else { (y[0] - self.x[0]).abs() };
                if d == F::zero() {
                    Some(true)
                } else if d > F::lit(SINGLETON_DIAMETER) {
                    Some(false)
                } else {
                    None
                }
            }
            AccShape::Interval { lo, hi } => outside(*lo, *hi, self.bin_width()),
            AccShape::UnboundedWindowCoverage { lo, hi } => outside(*lo, *hi, F::zero()).filter(|&b| b),
        }
    }

    /// Width of one bin of the grid that decided the shape.
    pub fn bin_width(&self) -> F {
        match (&self.shape, &self.window) {
            (AccShape::Singleton, _) => F::lit(SINGLETON_DIAMETER),
            (AccShape::UnboundedWindowCoverage { .. }, Some(w)) => w.bin_width(),
            _ => self.coverage.bin_width(),
        }
    }

    fn dist_compact(&self, y: &[F]) -> F {
        let half = F::lit(0.5);
        self.x
            .iter()
            .zip(y)
            .map(|(&a, &b)| {
                let d = crate::recipe::wrap(b - a + half) - half;
                d.abs()
            })
            .fold(F::zero(), F::max)
    }
}

/// The slice of `NH(⟨x, t, σ⟩)` on floor `τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction<F> {
    pub floor: SigmaVec,
    pub t: F,
    pub diff: SigmaVec,
    /// `A(x, σ−τ)`; absent when `τ = σ`, where the slice is empty.
    pub estimate: Option<AccEstimate<F>>,
}

pub fn nh_predict<F: Real>(
    r: &Recipe<F>,
    x: &[F],
    t: F,
    sigma: &[i64],
    tau: &[i64],
    params: &AccParams<F>,
) -> Result<Prediction<F>, FlowError> {
    r.check_sigma(sigma)?;
    r.check_sigma(tau)?;
    let diff: SigmaVec = sigma.iter().zip(tau).map(|(a, b)| a - b).collect();
    let estimate = if diff.iter().all(|&c| c == 0) { None } else { Some(accumulation_estimate(r, x, &diff, params)?) };
    Ok(Prediction { floor: tau.to_vec(), t, diff, estimate })
}
