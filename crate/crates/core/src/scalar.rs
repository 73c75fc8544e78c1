//! Exact rational scalars.
//!
//! Every coordinate, radius and shift in the crate is a [`Scalar`]. The
//! canonical text form is `num/den` in lowest terms; parsing additionally
//! accepts plain integers and finite decimals.

use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Scalar(BigRational);

impl Scalar {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self> {
        let (n, d) = (numer.into(), denom.into());
        if d.is_zero() {
            return Err(Error::Parse {
                text: format!("{n}/{d}"),
                reason: "zero denominator".into(),
            });
        }
        Ok(Scalar(BigRational::new(n, d)))
    }

    /// `numer / denom` for small literals. Panics on a zero denominator.
    pub fn ratio(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Scalar(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Scalar(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Scalar(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar(BigRational::one())
    }

    /// Exact conversion of a finite binary float (always a dyadic rational).
    pub fn from_f64_exact(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Scalar)
    }

    pub fn from_rational(r: BigRational) -> Self {
        Scalar(r)
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn into_rational(self) -> BigRational {
        self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn abs(&self) -> Self {
        Scalar(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::InvalidArgument("reciprocal of zero".into()));
        }
        Ok(Scalar(self.0.recip()))
    }

    pub fn checked_div(&self, rhs: &Scalar) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::InvalidArgument("division by zero".into()));
        }
        Ok(Scalar(&self.0 / &rhs.0))
    }

    pub fn powi(&self, exp: u32) -> Self {
        Scalar(Pow::pow(&self.0, exp))
    }

    pub fn min<'a>(&'a self, other: &'a Scalar) -> &'a Scalar {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max<'a>(&'a self, other: &'a Scalar) -> &'a Scalar {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or_else(|| {
            if self.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        })
    }

    /// Exact `d`-th root when the value is the `d`-th power of a rational.
    pub fn exact_root(&self, d: u32) -> Option<Scalar> {
        if d == 0 {
            return None;
        }
        if self.is_negative() && d.is_multiple_of(2) {
            return None;
        }
        let root_of = |n: &BigInt| -> Option<BigInt> {
            let mag = n.magnitude();
            let r: BigUint = mag.nth_root(d);
            (Pow::pow(&r, d) == *mag).then(|| BigInt::from(r))
        };
        let n = root_of(self.numer())?;
        let n = if self.is_negative() { -n } else { n };
        let den = root_of(self.denom())?;
        Some(Scalar(BigRational::new(n, den)))
    }

    /// Parse the strict exact forms, falling back to an exact dyadic
    /// conversion for float literals such as `1e-3`.
    pub fn parse_allow_inexact(text: &str) -> Result<Self> {
        match text.parse::<Scalar>() {
            Err(Error::Inexact(_)) => {
                let x: f64 = text.trim().parse().map_err(|_| Error::Parse {
                    text: text.into(),
                    reason: "not a number".into(),
                })?;
                Scalar::from_f64_exact(x).ok_or_else(|| Error::Parse {
                    text: text.into(),
                    reason: "not finite".into(),
                })
            }
            other => other,
        }
    }

    /// Decimal rendering with `digits` digits after the point, rounded half
    /// away from zero. Display helper only.
    pub fn to_decimal(&self, digits: u32) -> String {
        let scale = BigInt::from(10u32).pow(digits);
        let scaled = &self.0 * BigRational::from_integer(scale.clone());
        let rounded = scaled.round().to_integer();
        let neg = rounded.is_negative();
        let (int, frac) = rounded.abs().div_rem(&scale);
        let sign = if neg { "-" } else { "" };
        if digits == 0 {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{:0>width$}", frac.to_string(), width = digits as usize)
        }
    }
}

fn parse_err(text: &str, reason: &str) -> Error {
    Error::Parse {
        text: text.to_string(),
        reason: reason.to_string(),
    }
}

fn looks_like_float(s: &str) -> bool {
    let lower = s.to_ascii_lowercase();
    let body = lower.trim_start_matches(['+', '-']);
    if matches!(body, "inf" | "infinity" | "nan") {
        return true;
    }
    body.contains('e') && body.parse::<f64>().is_ok()
}

fn all_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

impl FromStr for Scalar {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let s = text.trim();
        if s.is_empty() {
            return Err(parse_err(text, "empty"));
        }
        if looks_like_float(s) {
            return Err(Error::Inexact(text.to_string()));
        }
        let (negative, body) = match s.as_bytes()[0] {
            b'-' => (true, &s[1..]),
            b'+' => (false, &s[1..]),
            _ => (false, s),
        };
        let value = if let Some((num, den)) = body.split_once('/') {
            if !all_digits(num) || !all_digits(den) {
                return Err(parse_err(text, "expected p/q with decimal digits"));
            }
            let num: BigInt = num.parse().map_err(|_| parse_err(text, "bad numerator"))?;
            let den: BigInt = den.parse().map_err(|_| parse_err(text, "bad denominator"))?;
            if den.is_zero() {
                return Err(parse_err(text, "zero denominator"));
            }
            BigRational::new(num, den)
        } else {
            let (int, frac) = body.split_once('.').unwrap_or((body, ""));
            if int.is_empty() && frac.is_empty() {
                return Err(parse_err(text, "no digits"));
            }
            if !(int.is_empty() || all_digits(int)) || !(frac.is_empty() || all_digits(frac)) {
                return Err(parse_err(text, "expected a finite decimal"));
            }
            let digits = format!("{int}{frac}");
            let num: BigInt = digits.parse().map_err(|_| parse_err(text, "bad digits"))?;
            let den = BigInt::from(10u32).pow(frac.len() as u32);
            BigRational::new(num, den)
        };
        Ok(Scalar(if negative { -value } else { value }))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_integer(n)
    }
}

impl From<BigInt> for Scalar {
    fn from(n: BigInt) -> Self {
        Scalar::from_integer(n)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                Scalar($trait::$method(&self.0, &rhs.0))
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                Scalar($trait::$method(self.0, rhs.0))
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                Scalar($trait::$method(self.0, &rhs.0))
            }
        }
        impl $trait<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                Scalar($trait::$method(&self.0, rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
// Panics on a zero divisor, like the underlying rational type.
binop!(Div, div);

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Scalar> for Scalar {
    fn mul_assign(&mut self, rhs: &Scalar) {
        self.0 *= &rhs.0;
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-&self.0)
    }
}

impl Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Self {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Scalar> for Scalar {
    fn sum<I: Iterator<Item = &'a Scalar>>(iter: I) -> Self {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

impl Product for Scalar {
    fn product<I: Iterator<Item = Scalar>>(iter: I) -> Self {
        iter.fold(Scalar::one(), |acc, x| acc * x)
    }
}

impl<'a> Product<&'a Scalar> for Scalar {
    fn product<I: Iterator<Item = &'a Scalar>>(iter: I) -> Self {
        iter.fold(Scalar::one(), |acc, x| acc * x)
    }
}
