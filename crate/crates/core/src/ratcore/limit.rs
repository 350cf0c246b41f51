//! Dominant-term limits of exp-polynomial fractions.
//!
//! Every expression of the decidable fragment normalizes to `P/Q` where `P`
//! and `Q` are finite sums of monomials `c · n^a · m^b · u^n · v^m` with
//! positive rational bases `u`, `v`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::expr::Expr;
use super::interval::Ext;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LimitError {
    #[error("expression leaves the decidable fragment: {0}")]
    GrammarUnsupported(String),
    #[error("denominator vanishes identically")]
    ZeroDenominator,
}

/// Monomial key, ordered by growth in `n` first.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mono<T> {
    pub bn: T,
    pub pn: u32,
    pub bm: T,
    pub pm: u32,
}

impl<T: Scalar> Mono<T> {
    fn unit() -> Self {
        Mono { bn: T::one(), pn: 0, bm: T::one(), pm: 0 }
    }

    fn times(&self, o: &Self) -> Self {
        Mono {
            bn: self.bn.clone() * o.bn.clone(),
            pn: self.pn + o.pn,
            bm: self.bm.clone() * o.bm.clone(),
            pm: self.pm + o.pm,
        }
    }

    fn uses_m(&self) -> bool {
        self.pm > 0 || !self.bm.is_one()
    }

    fn m_key(&self) -> (T, u32) {
        (self.bm.clone(), self.pm)
    }

    fn n_part(&self) -> Self {
        Mono { bn: self.bn.clone(), pn: self.pn, bm: T::one(), pm: 0 }
    }

    fn eval(&self, n: u64, m: u64) -> T {
        let nn = T::from_int(n as i64);
        let mm = T::from_int(m as i64);
        nn.ipow(self.pn as u64) * self.bn.ipow(n) * mm.ipow(self.pm as u64) * self.bm.ipow(m)
    }
}

/// A finite exp-polynomial with nonzero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EPoly<T> {
    pub terms: BTreeMap<Mono<T>, T>,
}

impl<T: Scalar> EPoly<T> {
    pub fn zero() -> Self {
        EPoly { terms: BTreeMap::new() }
    }

    pub fn constant(c: T) -> Self {
        let mut p = Self::zero();
        p.push(Mono::unit(), c);
        p
    }

    fn mono(k: Mono<T>) -> Self {
        let mut p = Self::zero();
        p.push(k, T::one());
        p
    }

    fn push(&mut self, k: Mono<T>, c: T) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(k) {
            Entry::Vacant(v) => {
                if !c.is_zero() {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                let s = o.get().clone() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value when the polynomial has no index dependence.
    pub fn as_constant(&self) -> Option<T> {
        match self.terms.len() {
            0 => Some(T::zero()),
            1 => {
                let (k, v) = self.terms.iter().next().unwrap();
                (*k == Mono::unit()).then(|| v.clone())
            }
            _ => None,
        }
    }

    pub fn uses_m(&self) -> bool {
        self.terms.keys().any(|k| k.uses_m())
    }

    fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (k, v) in &o.terms {
            r.push(k.clone(), v.clone());
        }
        r
    }

    fn neg(&self) -> Self {
        EPoly { terms: self.terms.iter().map(|(k, v)| (k.clone(), -v.clone())).collect() }
    }

    fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero();
        for (k1, v1) in &self.terms {
            for (k2, v2) in &o.terms {
                r.push(k1.times(k2), v1.clone() * v2.clone());
            }
        }
        r
    }

    fn scale(&self, c: &T) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        EPoly { terms: self.terms.iter().map(|(k, v)| (k.clone(), v.clone() * c.clone())).collect() }
    }

    pub fn eval(&self, n: u64, m: u64) -> T {
        self.terms.iter().fold(T::zero(), |acc, (k, v)| acc + v.clone() * k.eval(n, m))
    }

    pub fn subst_m(&self, m: u64) -> Self {
        let mut r = Self::zero();
        for (k, v) in &self.terms {
            let f = Mono { bn: T::one(), pn: 0, bm: k.bm.clone(), pm: k.pm }.eval(0, m);
            r.push(k.n_part(), v.clone() * f);
        }
        r
    }

    /// Leading term in `n` (requires an `m`-free polynomial).
    fn lead_n(&self) -> Option<(&Mono<T>, &T)> {
        self.terms.iter().next_back()
    }

    /// Groups terms by their `m` part; values are `m`-free polynomials.
    fn group_m(&self) -> BTreeMap<(T, u32), EPoly<T>> {
        let mut g: BTreeMap<(T, u32), EPoly<T>> = BTreeMap::new();
        for (k, v) in &self.terms {
            g.entry(k.m_key()).or_insert_with(EPoly::zero).push(k.n_part(), v.clone());
        }
        g
    }

    fn to_expr(&self) -> Expr<T> {
        let mut out: Option<Expr<T>> = None;
        for (k, v) in &self.terms {
            let mut factors: Vec<Expr<T>> = Vec::new();
            for _ in 0..k.pn {
                factors.push(Expr::N);
            }
            if !k.bn.is_one() {
                factors.push(Expr::pow(k.bn.clone(), Expr::N));
            }
            for _ in 0..k.pm {
                factors.push(Expr::M);
            }
            if !k.bm.is_one() {
                factors.push(Expr::pow(k.bm.clone(), Expr::M));
            }
            let term = if factors.is_empty() {
                Expr::Const(v.clone())
            } else {
                let prod = factors.into_iter().reduce(|a, b| a * b).unwrap();
                if v.is_one() { prod } else { Expr::Const(v.clone()) * prod }
            };
            out = Some(match out {
                None => term,
                Some(acc) => acc + term,
            });
        }
        out.unwrap_or(Expr::int(0))
    }
}

/// `num / den` in exp-polynomial normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Frac<T> {
    pub num: EPoly<T>,
    pub den: EPoly<T>,
}

impl<T: Scalar> Frac<T> {
    pub fn constant(c: T) -> Self {
        Frac { num: EPoly::constant(c), den: EPoly::constant(T::one()) }
    }

    fn poly(p: EPoly<T>) -> Self {
        Frac { num: p, den: EPoly::constant(T::one()) }
    }

    fn tidy(mut self) -> Result<Self, LimitError> {
        if self.den.is_zero() {
            return Err(LimitError::ZeroDenominator);
        }
        if let Some(d) = self.den.as_constant() {
            if !d.is_one() {
                self.num = self.num.scale(&(T::one() / d));
                self.den = EPoly::constant(T::one());
            }
        }
        if self.num.is_zero() {
            self.den = EPoly::constant(T::one());
        }
        Ok(self)
    }

    pub fn from_expr(e: &Expr<T>) -> Result<Self, LimitError> {
        let unsupported = |s: &str| Err(LimitError::GrammarUnsupported(s.to_string()));
        let f = match e {
            Expr::Const(v) => Frac::constant(v.clone()),
            Expr::N => Frac::poly(EPoly::mono(Mono { pn: 1, ..Mono::unit() })),
            Expr::M => Frac::poly(EPoly::mono(Mono { pm: 1, ..Mono::unit() })),
            Expr::Add(a, b) => Self::from_expr(a)?.add(&Self::from_expr(b)?)?,
            Expr::Sub(a, b) => Self::from_expr(a)?.add(&Self::from_expr(b)?.neg())?,
            Expr::Neg(a) => Self::from_expr(a)?.neg(),
            Expr::Mul(a, b) => {
                let (x, y) = (Self::from_expr(a)?, Self::from_expr(b)?);
                Frac { num: x.num.mul(&y.num), den: x.den.mul(&y.den) }
            }
            Expr::Div(a, b) => {
                let (x, y) = (Self::from_expr(a)?, Self::from_expr(b)?);
                if y.num.is_zero() {
                    return Err(LimitError::ZeroDenominator);
                }
                Frac { num: x.num.mul(&y.den), den: x.den.mul(&y.num) }
            }
            Expr::Pow(q, ex) => {
                if !q.is_positive() {
                    return unsupported("non-positive power base");
                }
                let f = Self::from_expr(ex)?;
                if f.den.as_constant().is_none() {
                    return unsupported("exponent is not affine in the indices");
                }
                let (mut cn, mut cm, mut c0) = (T::zero(), T::zero(), T::zero());
                for (k, v) in &f.num.terms {
                    let id = |x: &T| x.is_one();
                    match (k.pn, k.pm, id(&k.bn), id(&k.bm)) {
                        (0, 0, true, true) => c0 = v.clone(),
                        (1, 0, true, true) => cn = v.clone(),
                        (0, 1, true, true) => cm = v.clone(),
                        _ => return unsupported("exponent is not affine in the indices"),
                    }
                }
                let pw = |c: &T| -> Result<T, LimitError> {
                    if !c.is_integral() {
                        return Err(LimitError::GrammarUnsupported(
                            "non-integer exponent coefficient".into(),
                        ));
                    }
                    let k = c.abs().to_index().ok_or_else(|| {
                        LimitError::GrammarUnsupported("exponent coefficient too large".into())
                    })?;
                    Ok(if c.is_negative() { (T::one() / q.clone()).ipow(k) } else { q.ipow(k) })
                };
                let key = Mono { bn: pw(&cn)?, pn: 0, bm: pw(&cm)?, pm: 0 };
                let mut p = EPoly::zero();
                p.push(key, pw(&c0)?);
                Frac::poly(p)
            }
            Expr::Unpair0(_) | Expr::Unpair1(_) => {
                return unsupported("inverse pairing has no dominant-term normal form")
            }
        };
        f.tidy()
    }

    fn add(&self, o: &Self) -> Result<Self, LimitError> {
        if self.den == o.den {
            return Frac { num: self.num.add(&o.num), den: self.den.clone() }.tidy();
        }
        Frac {
            num: self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            den: self.den.mul(&o.den),
        }
        .tidy()
    }

    fn neg(&self) -> Self {
        Frac { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn as_constant(&self) -> Option<T> {
        Some(self.num.as_constant()? / self.den.as_constant()?)
    }

    pub fn uses_m(&self) -> bool {
        self.num.uses_m() || self.den.uses_m()
    }

    /// Exact equality as functions of the indices.
    pub fn same_function(&self, o: &Self) -> bool {
        self.num.mul(&o.den).add(&o.num.mul(&self.den).neg()).is_zero()
    }

    pub fn minus_const(&self, c: &T) -> Self {
        Frac { num: self.num.add(&self.den.scale(&-c.clone())), den: self.den.clone() }
    }

    pub fn eval(&self, n: u64, m: u64) -> Option<T> {
        let d = self.den.eval(n, m);
        (!d.is_zero()).then(|| self.num.eval(n, m) / d)
    }

    pub fn subst_m(&self, m: u64) -> Result<Self, LimitError> {
        Frac { num: self.num.subst_m(m), den: self.den.subst_m(m) }.tidy()
    }

    pub fn to_expr(&self) -> Expr<T> {
        match self.den.as_constant() {
            Some(d) if d.is_one() => self.num.to_expr(),
            _ => self.num.to_expr() / self.den.to_expr(),
        }
    }

    /// Limit as `n → ∞` of an `m`-free fraction.
    pub fn lim_n(&self) -> Result<Ext<T>, LimitError> {
        if self.uses_m() {
            return Err(LimitError::GrammarUnsupported("n-limit of an expression in m".into()));
        }
        let Some((kp, cp)) = self.num.lead_n() else {
            return Ok(Ext::Fin(T::zero()));
        };
        let (kq, cq) = self.den.lead_n().ok_or(LimitError::ZeroDenominator)?;
        let gp = (&kp.bn, kp.pn);
        let gq = (&kq.bn, kq.pn);
        Ok(match gp.cmp(&gq) {
            Ordering::Less => Ext::Fin(T::zero()),
            Ordering::Equal => Ext::Fin(cp.clone() / cq.clone()),
            Ordering::Greater => {
                if cp.is_positive() == cq.is_positive() {
                    Ext::PosInf
                } else {
                    Ext::NegInf
                }
            }
        })
    }

    /// Limit as `m → ∞` with `n` free.
    pub fn lim_m(&self, n_start: u64, horizon: u64) -> Result<LimitValue<T>, LimitError> {
        let gp = self.num.group_m();
        let gq = self.den.group_m();
        let Some((kp, cp)) = gp.iter().next_back() else {
            return Ok(LimitValue::Ext(Ext::Fin(T::zero())));
        };
        let (kq, cq) = gq.iter().next_back().ok_or(LimitError::ZeroDenominator)?;
        Ok(match kp.cmp(kq) {
            Ordering::Less => LimitValue::Ext(Ext::Fin(T::zero())),
            Ordering::Equal => {
                let f = Frac { num: cp.clone(), den: cq.clone() }.tidy()?;
                match f.as_constant() {
                    Some(c) => LimitValue::Ext(Ext::Fin(c)),
                    None => LimitValue::ClosedForm(f),
                }
            }
            Ordering::Greater => {
                // Diverges; the sign must not depend on n.
                let ratio = Frac { num: cp.clone(), den: cq.clone() }.tidy()?;
                let mut sign = None;
                for n in n_start..n_start + horizon {
                    if let Some(v) = ratio.eval(n, 0) {
                        let s = v.is_positive();
                        if *sign.get_or_insert(s) != s {
                            return Ok(LimitValue::NoLimit);
                        }
                    }
                }
                match sign {
                    Some(true) => LimitValue::Ext(Ext::PosInf),
                    Some(false) => LimitValue::Ext(Ext::NegInf),
                    None => LimitValue::NoLimit,
                }
            }
        })
    }
}

impl<T: Scalar> fmt::Display for Frac<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `n → ∞` (the only index of an arity-1 expression).
    N,
    /// `m → ∞` with `n` free.
    M,
    /// `lim_n lim_m`.
    Double,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LimitValue<T> {
    Ext(Ext<T>),
    /// A closed form in the outer index `n`.
    ClosedForm(Frac<T>),
    NoLimit,
}

impl<T: Scalar> LimitValue<T> {
    pub fn ext(&self) -> Option<&Ext<T>> {
        match self {
            LimitValue::Ext(e) => Some(e),
            _ => None,
        }
    }

    /// Value at a given outer index.
    pub fn at(&self, n: u64) -> Option<Ext<T>> {
        match self {
            LimitValue::Ext(e) => Some(e.clone()),
            LimitValue::ClosedForm(f) => f.eval(n, 0).map(Ext::Fin),
            LimitValue::NoLimit => None,
        }
    }

    /// `lim_n` of the value.
    pub fn outer(&self) -> Result<Ext<T>, LimitError> {
        match self {
            LimitValue::Ext(e) => Ok(e.clone()),
            LimitValue::ClosedForm(f) => f.lim_n(),
            LimitValue::NoLimit => Err(LimitError::GrammarUnsupported("no limit".into())),
        }
    }

    pub fn same_as(&self, o: &Self) -> bool {
        match (self, o) {
            (LimitValue::ClosedForm(a), LimitValue::ClosedForm(b)) => a.same_function(b),
            (a, b) => a == b,
        }
    }
}

impl<T: Scalar> fmt::Display for LimitValue<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LimitValue::Ext(e) => write!(f, "{e}"),
            LimitValue::ClosedForm(c) => write!(f, "{c}"),
            LimitValue::NoLimit => write!(f, "no limit"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LimitRecord<T> {
    pub direction: Direction,
    pub value: LimitValue<T>,
}

/// Horizon used to confirm the sign of a divergent family.
pub const SIGN_HORIZON: u64 = 64;

/// Symbolic limit of `e` in the given direction.
pub fn limit_eval<T: Scalar>(e: &Expr<T>, direction: Direction) -> Result<LimitRecord<T>, LimitError> {
    let f = Frac::from_expr(e)?;
    let value = match direction {
        Direction::N => LimitValue::Ext(f.lim_n()?),
        Direction::M => f.lim_m(0, SIGN_HORIZON)?,
        Direction::Double => match f.lim_m(0, SIGN_HORIZON)? {
            LimitValue::NoLimit => LimitValue::NoLimit,
            v => LimitValue::Ext(v.outer()?),
        },
    };
    Ok(LimitRecord { direction, value })
}
