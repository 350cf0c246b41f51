//! Closed-form index expressions in the variables `n` and `m`.
//!
//! Textual form is a prefix s-expression, e.g. `(- (pow 1/2 n) (* 3 (pow 1/2 (+ n m))))`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use thiserror::Error;

use crate::scalar::Scalar;

/// Largest exponent evaluated exactly.
pub const MAX_EXPONENT: u64 = 1 << 22;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr<T> {
    Const(T),
    N,
    M,
    Add(Box<Expr<T>>, Box<Expr<T>>),
    Sub(Box<Expr<T>>, Box<Expr<T>>),
    Mul(Box<Expr<T>>, Box<Expr<T>>),
    Div(Box<Expr<T>>, Box<Expr<T>>),
    Neg(Box<Expr<T>>),
    /// `q^e` for a positive rational `q`.
    Pow(T, Box<Expr<T>>),
    /// First coordinate of the inverse Cantor pairing.
    Unpair0(Box<Expr<T>>),
    /// Second coordinate of the inverse Cantor pairing.
    Unpair1(Box<Expr<T>>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("division by zero at index {0:?}")]
    DivisionByZero((u64, u64)),
    #[error("exponent is not an integer of manageable size at index {0:?}")]
    BadExponent((u64, u64)),
    #[error("unpair argument is not a non-negative integer at index {0:?}")]
    BadUnpair((u64, u64)),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("expression parse error at byte {pos}: {msg}")]
pub struct ExprParseError {
    pub pos: usize,
    pub msg: String,
}

/// Cantor pairing `k(n,m) = (n+m)(n+m+1)/2 + m`.
pub fn pairing(n: u64, m: u64) -> u64 {
    let s = n + m;
    s * (s + 1) / 2 + m
}

/// Inverse of [`pairing`].
pub fn unpair(k: u64) -> (u64, u64) {
    let mut w = (((8.0 * k as f64 + 1.0).sqrt() - 1.0) / 2.0) as u64;
    while w * (w + 1) / 2 > k {
        w -= 1;
    }
    while (w + 1) * (w + 2) / 2 <= k {
        w += 1;
    }
    let m = k - w * (w + 1) / 2;
    (w - m, m)
}

impl<T: Scalar> Expr<T> {
    pub fn c(v: T) -> Self {
        Expr::Const(v)
    }
    pub fn int(v: i64) -> Self {
        Expr::Const(T::from_int(v))
    }
    pub fn frac(n: i64, d: i64) -> Self {
        Expr::Const(T::from_frac(n, d))
    }
    pub fn n() -> Self {
        Expr::N
    }
    pub fn m() -> Self {
        Expr::M
    }
    pub fn pow(q: T, e: Expr<T>) -> Self {
        Expr::Pow(q, Box::new(e))
    }
    pub fn unpair0(e: Expr<T>) -> Self {
        Expr::Unpair0(Box::new(e))
    }
    pub fn unpair1(e: Expr<T>) -> Self {
        Expr::Unpair1(Box::new(e))
    }
    /// `(a+b)(a+b+1)/2 + b` as an expression.
    pub fn pairing(a: Expr<T>, b: Expr<T>) -> Self {
        let s = a + b.clone();
        s.clone() * (s + Expr::int(1)) / Expr::int(2) + b
    }

    pub fn uses_m(&self) -> bool {
        match self {
            Expr::M => true,
            Expr::Const(_) | Expr::N => false,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.uses_m() || b.uses_m()
            }
            Expr::Neg(a) | Expr::Pow(_, a) | Expr::Unpair0(a) | Expr::Unpair1(a) => a.uses_m(),
        }
    }

    pub fn eval(&self, n: u64, m: u64) -> Result<T, EvalError> {
        Ok(match self {
            Expr::Const(v) => v.clone(),
            Expr::N => T::from_int(n as i64),
            Expr::M => T::from_int(m as i64),
            Expr::Add(a, b) => a.eval(n, m)? + b.eval(n, m)?,
            Expr::Sub(a, b) => a.eval(n, m)? - b.eval(n, m)?,
            Expr::Mul(a, b) => a.eval(n, m)? * b.eval(n, m)?,
            Expr::Div(a, b) => {
                let d = b.eval(n, m)?;
                if d.is_zero() {
                    return Err(EvalError::DivisionByZero((n, m)));
                }
                a.eval(n, m)? / d
            }
            Expr::Neg(a) => -a.eval(n, m)?,
            Expr::Pow(q, e) => {
                let ev = e.eval(n, m)?;
                if !ev.is_integral() {
                    return Err(EvalError::BadExponent((n, m)));
                }
                let k = ev.abs().to_index().filter(|k| *k <= MAX_EXPONENT);
                let k = k.ok_or(EvalError::BadExponent((n, m)))?;
                if ev.is_negative() {
                    (T::one() / q.clone()).ipow(k)
                } else {
                    q.ipow(k)
                }
            }
            Expr::Unpair0(a) | Expr::Unpair1(a) => {
                let k = a.eval(n, m)?.to_index().ok_or(EvalError::BadUnpair((n, m)))?;
                let (u0, u1) = unpair(k);
                let v = if matches!(self, Expr::Unpair0(_)) { u0 } else { u1 };
                T::from_int(v as i64)
            }
        })
    }

    /// Double-precision evaluation; large exponents underflow gracefully.
    pub fn eval_f64(&self, n: f64, m: f64) -> f64 {
        match self {
            Expr::Const(v) => v.to_f64(),
            Expr::N => n,
            Expr::M => m,
            Expr::Add(a, b) => a.eval_f64(n, m) + b.eval_f64(n, m),
            Expr::Sub(a, b) => a.eval_f64(n, m) - b.eval_f64(n, m),
            Expr::Mul(a, b) => a.eval_f64(n, m) * b.eval_f64(n, m),
            Expr::Div(a, b) => a.eval_f64(n, m) / b.eval_f64(n, m),
            Expr::Neg(a) => -a.eval_f64(n, m),
            Expr::Pow(q, e) => q.to_f64().powf(e.eval_f64(n, m)),
            Expr::Unpair0(a) | Expr::Unpair1(a) => {
                let k = a.eval_f64(n, m).max(0.0) as u64;
                let (u0, u1) = unpair(k);
                if matches!(self, Expr::Unpair0(_)) { u0 as f64 } else { u1 as f64 }
            }
        }
    }

    /// Replaces `m` by a constant.
    pub fn subst_m(&self, m: u64) -> Self {
        self.map_vars(&|v| match v {
            Expr::M => Expr::int(m as i64),
            other => other.clone(),
        })
    }

    /// Renames `n` to `m` (turning an arity-1 expression into the inner index).
    pub fn n_as_m(&self) -> Self {
        self.map_vars(&|v| match v {
            Expr::N => Expr::M,
            other => other.clone(),
        })
    }

    fn map_vars(&self, f: &dyn Fn(&Expr<T>) -> Expr<T>) -> Self {
        let b = |e: &Expr<T>| Box::new(e.map_vars(f));
        match self {
            Expr::N | Expr::M => f(self),
            Expr::Const(_) => self.clone(),
            Expr::Add(a, c) => Expr::Add(b(a), b(c)),
            Expr::Sub(a, c) => Expr::Sub(b(a), b(c)),
            Expr::Mul(a, c) => Expr::Mul(b(a), b(c)),
            Expr::Div(a, c) => Expr::Div(b(a), b(c)),
            Expr::Neg(a) => Expr::Neg(b(a)),
            Expr::Pow(q, a) => Expr::Pow(q.clone(), b(a)),
            Expr::Unpair0(a) => Expr::Unpair0(b(a)),
            Expr::Unpair1(a) => Expr::Unpair1(b(a)),
        }
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident, $v:ident) => {
        impl<T: Scalar> $tr for Expr<T> {
            type Output = Expr<T>;
            fn $f(self, o: Expr<T>) -> Expr<T> {
                Expr::$v(Box::new(self), Box::new(o))
            }
        }
    };
}
binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl<T: Scalar> Neg for Expr<T> {
    type Output = Expr<T>;
    fn neg(self) -> Expr<T> {
        Expr::Neg(Box::new(self))
    }
}

impl<T: Scalar> fmt::Display for Expr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => write!(f, "{v}"),
            Expr::N => write!(f, "n"),
            Expr::M => write!(f, "m"),
            Expr::Add(a, b) => write!(f, "(+ {a} {b})"),
            Expr::Sub(a, b) => write!(f, "(- {a} {b})"),
            Expr::Mul(a, b) => write!(f, "(* {a} {b})"),
            Expr::Div(a, b) => write!(f, "(/ {a} {b})"),
            Expr::Neg(a) => write!(f, "(- {a})"),
            Expr::Pow(q, e) => write!(f, "(pow {q} {e})"),
            Expr::Unpair0(a) => write!(f, "(unpair0 {a})"),
            Expr::Unpair1(a) => write!(f, "(unpair1 {a})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open(usize),
    Close(usize),
    Atom(usize, String),
}

fn tokenize(s: &str) -> Vec<Tok> {
    let mut out = Vec::new();
    let mut cur: Option<(usize, String)> = None;
    for (i, ch) in s.char_indices() {
        let delim = ch == '(' || ch == ')' || ch.is_whitespace();
        if delim {
            if let Some((p, a)) = cur.take() {
                out.push(Tok::Atom(p, a));
            }
            match ch {
                '(' => out.push(Tok::Open(i)),
                ')' => out.push(Tok::Close(i)),
                _ => {}
            }
        } else {
            cur.get_or_insert_with(|| (i, String::new())).1.push(ch);
        }
    }
    if let Some((p, a)) = cur {
        out.push(Tok::Atom(p, a));
    }
    out
}

struct Parser<'a> {
    toks: &'a [Tok],
    at: usize,
    len: usize,
}

impl<'a> Parser<'a> {
    fn err<X>(&self, pos: usize, msg: impl Into<String>) -> Result<X, ExprParseError> {
        Err(ExprParseError { pos, msg: msg.into() })
    }

    fn pos(&self) -> usize {
        match self.toks.get(self.at) {
            Some(Tok::Open(p)) | Some(Tok::Close(p)) | Some(Tok::Atom(p, _)) => *p,
            None => self.len,
        }
    }

    fn expr<T: Scalar>(&mut self) -> Result<Expr<T>, ExprParseError> {
        let pos = self.pos();
        match self.toks.get(self.at).cloned() {
            None => self.err(pos, "unexpected end of input"),
            Some(Tok::Close(_)) => self.err(pos, "unexpected ')'"),
            Some(Tok::Atom(_, a)) => {
                self.at += 1;
                match a.as_str() {
                    "n" => Ok(Expr::N),
                    "m" => Ok(Expr::M),
                    _ => match T::parse_exact(&a) {
                        Some(v) => Ok(Expr::Const(v)),
                        None => self.err(pos, format!("bad atom '{a}'")),
                    },
                }
            }
            Some(Tok::Open(_)) => {
                self.at += 1;
                let op_pos = self.pos();
                let op = match self.toks.get(self.at) {
                    Some(Tok::Atom(_, a)) => a.clone(),
                    _ => return self.err(op_pos, "expected operator"),
                };
                self.at += 1;
                let mut args = Vec::new();
                while !matches!(self.toks.get(self.at), Some(Tok::Close(_)) | None) {
                    if op == "pow" && args.is_empty() {
                        // the base is a literal, kept apart from the argument list
                        let p = self.pos();
                        let base: Expr<T> = self.expr()?;
                        match base {
                            Expr::Const(_) => args.push(base),
                            _ => return self.err(p, "pow base must be a rational literal"),
                        }
                        continue;
                    }
                    args.push(self.expr()?);
                }
                if self.toks.get(self.at).is_none() {
                    return self.err(self.len, "missing ')'");
                }
                self.at += 1;
                self.build(op_pos, &op, args)
            }
        }
    }

    fn build<T: Scalar>(
        &self,
        pos: usize,
        op: &str,
        mut args: Vec<Expr<T>>,
    ) -> Result<Expr<T>, ExprParseError> {
        let fold = |args: Vec<Expr<T>>, f: fn(Expr<T>, Expr<T>) -> Expr<T>| {
            let mut it = args.into_iter();
            let first = it.next().unwrap();
            it.fold(first, f)
        };
        match (op, args.len()) {
            ("+", k) if k >= 2 => Ok(fold(args, |a, b| a + b)),
            ("*", k) if k >= 2 => Ok(fold(args, |a, b| a * b)),
            ("-", 1) => Ok(-args.pop().unwrap()),
            ("-", k) if k >= 2 => Ok(fold(args, |a, b| a - b)),
            ("/", 2) => Ok(fold(args, |a, b| a / b)),
            ("pow", 2) => {
                let e = args.pop().unwrap();
                let q = match args.pop().unwrap() {
                    Expr::Const(q) => q,
                    _ => unreachable!(),
                };
                if !q.is_positive() {
                    return self.err(pos, "pow base must be positive");
                }
                Ok(Expr::pow(q, e))
            }
            ("unpair0", 1) => Ok(Expr::unpair0(args.pop().unwrap())),
            ("unpair1", 1) => Ok(Expr::unpair1(args.pop().unwrap())),
            _ => self.err(pos, format!("operator '{op}' with {} arguments", args.len())),
        }
    }
}

impl<T: Scalar> FromStr for Expr<T> {
    type Err = ExprParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let toks = tokenize(s);
        let mut p = Parser { toks: &toks, at: 0, len: s.len() };
        let e = p.expr()?;
        if p.at != toks.len() {
            return p.err(p.pos(), "trailing input");
        }
        Ok(e)
    }
}
