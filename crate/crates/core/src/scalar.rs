//! The exact ordered field every exact module is generic over.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_bigint::ToBigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// An exact, totally ordered field of rationals.
///
/// Implemented for every `Ratio<I>`; `Ratio<BigInt>` is the only choice that
/// never overflows and is what the crate-root aliases use.
pub trait Scalar:
    Clone + Ord + Hash + Debug + Display + Num + Signed + Send + Sync + 'static
{
    fn from_int(v: i64) -> Self;
    fn from_frac(n: i64, d: i64) -> Self;
    fn to_f64(&self) -> f64;
    /// `Some(k)` when the value is a non-negative integer that fits in u64.
    fn to_index(&self) -> Option<u64>;
    fn is_integral(&self) -> bool;
    /// Parses `"p/q"` or `"p"`; the denominator must be nonzero.
    fn parse_exact(s: &str) -> Option<Self>;
    /// Always prints `"p/q"`, even for integers.
    fn fmt_exact(&self) -> String;

    fn half(&self) -> Self {
        self.clone() / Self::from_int(2)
    }
    fn ipow(&self, e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

impl<I> Scalar for Ratio<I>
where
    I: Integer
        + Signed
        + Clone
        + Hash
        + Debug
        + Display
        + FromPrimitive
        + ToPrimitive
        + ToBigInt
        + FromStr
        + Send
        + Sync
        + 'static,
{
    fn from_int(v: i64) -> Self {
        Ratio::from_integer(I::from_i64(v).expect("integer out of range"))
    }

    /// Powers of coprime integers stay coprime, so nothing needs reducing.
    fn ipow(&self, e: u64) -> Self {
        let pow = |x: &I| {
            let (mut base, mut acc, mut e) = (x.clone(), I::one(), e);
            while e > 0 {
                if e & 1 == 1 {
                    acc = acc * base.clone();
                }
                e >>= 1;
                if e > 0 {
                    base = base.clone() * base;
                }
            }
            acc
        };
        Ratio::new_raw(pow(self.numer()), pow(self.denom()))
    }

    fn from_frac(n: i64, d: i64) -> Self {
        Ratio::new(
            I::from_i64(n).expect("integer out of range"),
            I::from_i64(d).expect("integer out of range"),
        )
    }

    fn to_f64(&self) -> f64 {
        if let Some(v) = ToPrimitive::to_f64(self) {
            if v.is_finite() {
                return v;
            }
        }
        // Huge numerators or denominators: keep the top 62 bits of each.
        let n = self.numer().to_bigint().expect("bigint");
        let d = self.denom().to_bigint().expect("bigint");
        let a = n.bits().saturating_sub(62);
        let b = d.bits().saturating_sub(62);
        let nf = ToPrimitive::to_f64(&(n >> a as usize)).unwrap_or(0.0);
        let df = ToPrimitive::to_f64(&(d >> b as usize)).unwrap_or(1.0);
        let scale = (a as i64 - b as i64).clamp(-4000, 4000) as i32;
        (nf / df) * 2f64.powi(scale)
    }

    fn to_index(&self) -> Option<u64> {
        if self.is_integer() && !self.is_negative() {
            self.numer().to_u64()
        } else {
            None
        }
    }

    fn is_integral(&self) -> bool {
        self.is_integer()
    }

    fn parse_exact(s: &str) -> Option<Self> {
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n: I = n.parse().ok()?;
        let d: I = d.parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(Ratio::new(n, d))
    }

    fn fmt_exact(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
}
