use std::fmt;

use thiserror::Error;

use crate::Real;

/// Floor index `σ ∈ Z^k`.
pub type SigmaVec = Vec<i64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("ψ is undefined at t = s")]
    SingularTime,
    #[error("a recipe needs at least one function")]
    EmptyG,
    #[error("floor vector has length {got}, recipe has {want} functions")]
    SigmaLength { want: usize, got: usize },
    #[error("torus slopes {0} and {1} are (numerically) rationally dependent")]
    ResonantSlopes(usize, usize),
    #[error("point has dimension {got}, base has dimension {want}")]
    DimensionMismatch { want: usize, got: usize },
    #[error("bad parameters: {0}")]
    BadParams(String),
}

/// The time functions available to a recipe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GFn {
    Recip,
    SinRecip,
    SinRecipOver,
    Zero,
}

impl GFn {
    pub const ALL: [GFn; 4] = [GFn::Recip, GFn::SinRecip, GFn::SinRecipOver, GFn::Zero];

    pub fn eval<F: Real>(self, t: F) -> F {
        match self {
            GFn::Recip => t.recip(),
            GFn::SinRecip => t.recip().sin(),
            GFn::SinRecipOver => t.recip().sin() / t,
            GFn::Zero => F::zero(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GFn::Recip => "1/t",
            GFn::SinRecip => "sin(1/t)",
            GFn::SinRecipOver => "sin(1/t)/t",
            GFn::Zero => "0",
        }
    }

    pub fn parse(s: &str) -> Option<GFn> {
        GFn::ALL.into_iter().find(|g| g.name() == s)
    }
}

impl fmt::Display for GFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Base<F> {
    /// `R/Z` with `Φ_t(x) = x + t`.
    Circle,
    /// `R` with `Φ_t(x) = x + t`.
    Line,
    /// `T^d` with the linear flow of the given slope vector.
    Torus(Vec<F>),
}

/// The manifold `N` together with its flow.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSpec<F> {
    base: Base<F>,
}

/// A convergent `p/q` with `q²·|r − p/q|` below this marks `r` as rational:
/// the next partial quotient would exceed about a thousand.
const RESONANCE_TOL: f64 = 1e-3;
const RESONANCE_MAX_DEN: f64 = 1e6;

impl<F: Real> FlowSpec<F> {
    pub fn circle() -> Self {
        FlowSpec { base: Base::Circle }
    }

    pub fn line() -> Self {
        FlowSpec { base: Base::Line }
    }

    pub fn torus(slopes: Vec<F>) -> Result<Self, FlowError> {
        if slopes.is_empty() {
            return Err(FlowError::BadParams("torus of dimension 0".into()));
        }
        if slopes.iter().any(|s| !s.is_finite() || s.is_zero()) {
            return Err(FlowError::BadParams("torus slopes must be finite and nonzero".into()));
        }
        for i in 0..slopes.len() {
            for j in i + 1..slopes.len() {
                let r = (slopes[j] / slopes[i]).to_f64().unwrap_or(f64::NAN);
                if resonant(r) {
                    return Err(FlowError::ResonantSlopes(i, j));
                }
            }
        }
        Ok(FlowSpec { base: Base::Torus(slopes) })
    }

    pub fn base(&self) -> &Base<F> {
        &self.base
    }

    pub fn dim(&self) -> usize {
        match &self.base {
            Base::Circle | Base::Line => 1,
            Base::Torus(th) => th.len(),
        }
    }

    pub fn is_compact(&self) -> bool {
        !matches!(self.base, Base::Line)
    }

    pub fn check_point(&self, x: &[F]) -> Result<(), FlowError> {
        if x.len() != self.dim() {
            return Err(FlowError::DimensionMismatch { want: self.dim(), got: x.len() });
        }
        Ok(())
    }

    /// `Φ_τ(x)`. On compact bases the displacement is reduced mod 1 before it
    /// is added, so inverse flows cancel to rounding of order one ulp.
    pub fn flow(&self, x: &[F], tau: F) -> Vec<F> {
        match &self.base {
            Base::Line => vec![x[0] + tau],
            Base::Circle => vec![wrap(x[0] + wrap(tau))],
            Base::Torus(th) => x.iter().zip(th).map(|(&xi, &s)| wrap(xi + wrap(tau * s))).collect(),
        }
    }

    /// Sup-norm distance, measured around the circle on compact bases.
    pub fn distance(&self, a: &[F], b: &[F]) -> F {
        a.iter().zip(b).map(|(&u, &v)| self.coord_delta(u, v).abs()).fold(F::zero(), F::max)
    }

    /// Signed shortest displacement from `u` to `v` along one axis.
    pub fn coord_delta(&self, u: F, v: F) -> F {
        let d = v - u;
        if self.is_compact() {
            let half = F::lit(0.5);
            let w = wrap(d + half) - half;
            if w < -half { w + F::one() } else { w }
        } else {
            d
        }
    }

    /// Bring `x` into the fundamental domain.
    pub fn normalize(&self, x: &[F]) -> Vec<F> {
        if self.is_compact() { x.iter().map(|&v| wrap(v)).collect() } else { x.to_vec() }
    }
}

impl<F: Real> fmt::Display for FlowSpec<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.base {
            Base::Circle => f.write_str("circle"),
            Base::Line => f.write_str("line"),
            Base::Torus(th) => {
                write!(f, "torus(")?;
                for (i, s) in th.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{s}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// `v mod 1` in `[0, 1)`.
pub(crate) fn wrap<F: Real>(v: F) -> F {
    let w = v - v.floor();
    if w >= F::one() { F::zero() } else { w }
}

/// Whether a convergent `p/q` of `r` with `q ≤ 10⁶` is unusually good.
fn resonant(r: f64) -> bool {
    if !r.is_finite() {
        return true;
    }
    let (mut h0, mut h1) = (1.0f64, r.floor());
    let (mut k0, mut k1) = (0.0f64, 1.0f64);
    let mut frac = r - r.floor();
    loop {
        if k1 * k1 * (r - h1 / k1).abs() < RESONANCE_TOL {
            return true;
        }
        if frac < 1e-15 {
            return true;
        }
        let inv = 1.0 / frac;
        let a = inv.floor();
        frac = inv - a;
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if k2 > RESONANCE_MAX_DEN {
            return false;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
    }
}

/// `⟨G, N, Φ_t⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct Recipe<F> {
    pub name: String,
    g: Vec<GFn>,
    flow: FlowSpec<F>,
}

impl<F: Real> Recipe<F> {
    pub fn new(name: impl Into<String>, g: Vec<GFn>, flow: FlowSpec<F>) -> Result<Self, FlowError> {
        if g.is_empty() {
            return Err(FlowError::EmptyG);
        }
        Ok(Recipe { name: name.into(), g, flow })
    }

    pub fn circle_recip() -> Self {
        Self::new("circle", vec![GFn::Recip], FlowSpec::circle()).unwrap()
    }

    pub fn sines() -> Self {
        Self::new("sines", vec![GFn::SinRecip], FlowSpec::line()).unwrap()
    }

    pub fn sines2() -> Self {
        Self::new("sines2", vec![GFn::SinRecipOver], FlowSpec::line()).unwrap()
    }

    pub fn sines3() -> Self {
        Self::new("sines3", vec![GFn::SinRecip, GFn::SinRecipOver, GFn::Zero], FlowSpec::line()).unwrap()
    }

    /// Irrational flow on `T^d` with `g = 1/t`. Slopes are `√p` over the first primes.
    pub fn torus_recip(d: usize) -> Result<Self, FlowError> {
        Self::new(format!("torus{d}"), vec![GFn::Recip], FlowSpec::torus(root_slopes(d)?)?)
    }

    /// `G = {1/t, sin(1/t), 0}` on the torus: slices are tori, arcs and points.
    pub fn torus_mixed(d: usize) -> Result<Self, FlowError> {
        Self::new(format!("torus{d}_mixed"), vec![GFn::Recip, GFn::SinRecip, GFn::Zero], FlowSpec::torus(root_slopes(d)?)?)
    }

    /// `circle`, `sines`, `sines2`, `sines3`, `torusD` or `torusD_mixed`.
    pub fn named(name: &str) -> Result<Self, FlowError> {
        match name {
            "circle" => Ok(Self::circle_recip()),
            "sines" => Ok(Self::sines()),
            "sines2" => Ok(Self::sines2()),
            "sines3" => Ok(Self::sines3()),
            _ => {
                let rest = name.strip_prefix("torus").ok_or_else(|| FlowError::BadParams(format!("unknown recipe {name}")))?;
                let (d, mixed) = match rest.strip_suffix("_mixed") {
                    Some(d) => (d, true),
                    None => (rest, false),
                };
                let d: usize = d.parse().map_err(|_| FlowError::BadParams(format!("unknown recipe {name}")))?;
                if mixed { Self::torus_mixed(d) } else { Self::torus_recip(d) }
            }
        }
    }

    pub fn g(&self) -> &[GFn] {
        &self.g
    }

    pub fn flow(&self) -> &FlowSpec<F> {
        &self.flow
    }

    pub fn check_sigma(&self, sigma: &[i64]) -> Result<(), FlowError> {
        if sigma.len() != self.g.len() {
            return Err(FlowError::SigmaLength { want: self.g.len(), got: sigma.len() });
        }
        Ok(())
    }

    /// `g_σ(t) = Σ σ_i g_i(t)`. Zero coefficients contribute exactly nothing.
    pub fn g_sigma(&self, sigma: &[i64], t: F) -> F {
        self.g
            .iter()
            .zip(sigma)
            .filter(|(_, &c)| c != 0)
            .fold(F::zero(), |acc, (g, &c)| acc + F::lit(c as f64) * g.eval(t))
    }

    /// Flow `x` for the time `g_σ(dt)`.
    pub fn push(&self, sigma: &[i64], x: &[F], dt: F) -> Vec<F> {
        if sigma.iter().all(|&c| c == 0) {
            return x.to_vec();
        }
        self.flow.flow(x, self.g_sigma(sigma, dt))
    }
}

fn root_slopes<F: Real>(d: usize) -> Result<Vec<F>, FlowError> {
    const PRIMES: [f64; 8] = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0];
    if d == 0 || d > PRIMES.len() {
        return Err(FlowError::BadParams(format!("torus dimension {d} outside 1..=8")));
    }
    Ok(PRIMES[..d].iter().map(|p| F::lit(p.sqrt())).collect())
}

/// `ψ_{s,σ}(x, t) = ⟨Φ_{g_σ(t−s)}(x), t⟩`.
pub fn psi<F: Real>(r: &Recipe<F>, s: F, sigma: &[i64], x: &[F], t: F) -> Result<(Vec<F>, F), FlowError> {
    r.check_sigma(sigma)?;
    r.flow.check_point(x)?;
    if t == s {
        return Err(FlowError::SingularTime);
    }
    Ok((r.push(sigma, x, t - s), t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_ratio_is_not_resonant() {
        assert!(!resonant((1.0 + 5f64.sqrt()) / 2.0));
        assert!(!resonant(2f64.sqrt()));
        assert!(resonant(0.75));
        assert!(resonant(355.0 / 113.0));
    }

    #[test]
    fn circle_delta_is_shortest() {
        let c = FlowSpec::<f64>::circle();
        assert!((c.coord_delta(0.9, 0.1) - 0.2).abs() < 1e-15);
        assert!((c.coord_delta(0.1, 0.9) + 0.2).abs() < 1e-15);
        assert!((c.distance(&[0.0], &[0.5]) - 0.5).abs() < 1e-15);
    }
}
