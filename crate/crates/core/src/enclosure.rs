//! Rational interval enclosures of real numbers.
//!
//! Each operation rounds its endpoints outward to a dyadic grid of `bits`
//! fractional bits, so the true value always lies inside `[lo, hi]` and the
//! numbers stay a bounded size.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};

use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enclosure {
    lo: BigRational,
    hi: BigRational,
    bits: u32,
}

fn two_pow(bits: u32) -> BigInt {
    BigInt::one() << bits as usize
}

fn floor_to(x: &BigRational, bits: u32) -> BigRational {
    if x.denom().is_one() {
        return x.clone();
    }
    let scale = two_pow(bits);
    let n = (x * BigRational::from_integer(scale.clone())).floor().to_integer();
    BigRational::new(n, scale)
}

fn ceil_to(x: &BigRational, bits: u32) -> BigRational {
    if x.denom().is_one() {
        return x.clone();
    }
    let scale = two_pow(bits);
    let n = (x * BigRational::from_integer(scale.clone())).ceil().to_integer();
    BigRational::new(n, scale)
}

impl Enclosure {
    pub fn exact(x: &Scalar, bits: u32) -> Self {
        Enclosure {
            lo: x.as_rational().clone(),
            hi: x.as_rational().clone(),
            bits,
        }
    }

    pub fn from_bounds(lo: BigRational, hi: BigRational, bits: u32) -> Self {
        assert!(lo <= hi, "empty enclosure");
        Enclosure { lo, hi, bits }.rounded()
    }

    fn rounded(self) -> Self {
        Enclosure {
            lo: floor_to(&self.lo, self.bits),
            hi: ceil_to(&self.hi, self.bits),
            bits: self.bits,
        }
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn add(&self, other: &Enclosure) -> Enclosure {
        Enclosure {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
            bits: self.bits.max(other.bits),
        }
        .rounded()
    }

    pub fn add_scalar(&self, x: &Scalar) -> Enclosure {
        self.add(&Enclosure::exact(x, self.bits))
    }

    pub fn mul(&self, other: &Enclosure) -> Enclosure {
        let products = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = products.iter().min().expect("four products").clone();
        let hi = products.iter().max().expect("four products").clone();
        Enclosure {
            lo,
            hi,
            bits: self.bits.max(other.bits),
        }
        .rounded()
    }

    pub fn mul_scalar(&self, x: &Scalar) -> Enclosure {
        self.mul(&Enclosure::exact(x, self.bits))
    }

    /// Division by an enclosure that does not contain zero.
    pub fn div(&self, other: &Enclosure) -> Option<Enclosure> {
        if other.lo.signum() != other.hi.signum() || other.lo.is_zero() {
            return None;
        }
        let recip = Enclosure {
            lo: other.hi.recip(),
            hi: other.lo.recip(),
            bits: other.bits,
        }
        .rounded();
        Some(self.mul(&recip))
    }

    pub fn powi(&self, n: u32) -> Enclosure {
        let mut acc = Enclosure {
            lo: BigRational::one(),
            hi: BigRational::one(),
            bits: self.bits,
        };
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Principal `n`-th root of a nonnegative enclosure.
    pub fn nth_root(&self, n: u32) -> Option<Enclosure> {
        if n == 0 || self.lo.is_negative() {
            return None;
        }
        let b = self.bits;
        let scale = BigRational::from_integer(two_pow(n * b));
        let lo_int = (&self.lo * &scale).floor().to_integer();
        let hi_int = (&self.hi * &scale).ceil().to_integer();
        let lo_root: BigUint = lo_int.magnitude().nth_root(n);
        let hi_mag = hi_int.magnitude();
        let mut hi_root: BigUint = hi_mag.nth_root(n);
        if Pow::pow(&hi_root, n) < *hi_mag {
            hi_root += 1u32;
        }
        let den = two_pow(b);
        Some(Enclosure {
            lo: BigRational::new(BigInt::from_biguint(Sign::Plus, lo_root), den.clone()),
            hi: BigRational::new(BigInt::from_biguint(Sign::Plus, hi_root), den),
            bits: b,
        })
    }

    /// `⌈x⌉` when the enclosure pins it down.
    pub fn ceil(&self) -> Option<BigInt> {
        let a = self.lo.ceil().to_integer();
        let b = self.hi.ceil().to_integer();
        (a == b).then_some(a)
    }

    pub fn floor(&self) -> Option<BigInt> {
        let a = self.lo.floor().to_integer();
        let b = self.hi.floor().to_integer();
        (a == b).then_some(a)
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2))
    }

    /// Midpoint rendered with `digits` significant decimal digits.
    pub fn to_significant(&self, digits: u32) -> String {
        format_significant(&self.midpoint(), digits)
    }

    /// Whether every point of the enclosure rounds to the same
    /// `digits`-significant-digit decimal.
    pub fn determines_digits(&self, digits: u32) -> bool {
        format_significant(&self.lo, digits) == format_significant(&self.hi, digits)
    }

    /// π from Machin's formula `π = 16·atan(1/5) − 4·atan(1/239)`.
    pub fn pi(bits: u32) -> Enclosure {
        let guard = 16;
        let work = bits + guard;
        let a5 = atan_inv_fixed(5, work);
        let a239 = atan_inv_fixed(239, work);
        // each fixed-point atan is within `err` units of the true value
        let mid = BigInt::from(16) * &a5.0 - BigInt::from(4) * &a239.0;
        let err = BigInt::from(16) * a5.1 + BigInt::from(4) * a239.1;
        let den = two_pow(work);
        Enclosure {
            lo: BigRational::new(&mid - &err, den.clone()),
            hi: BigRational::new(&mid + &err, den),
            bits,
        }
        .rounded()
    }

    pub fn to_f64(&self) -> f64 {
        Scalar::from_rational(self.midpoint()).to_f64()
    }
}

/// `atan(1/k)·2^bits` as a fixed-point integer plus an error bound in units.
fn atan_inv_fixed(k: u32, bits: u32) -> (BigInt, u64) {
    let one = two_pow(bits);
    let k = BigInt::from(k);
    let k2 = &k * &k;
    let mut power = one.div_floor(&k); // 2^bits / k^(2j+1)
    let mut sum = BigInt::zero();
    let mut j: u64 = 0;
    while !power.is_zero() {
        let term = power.div_floor(&BigInt::from(2 * j + 1));
        if j.is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
        power = power.div_floor(&k2);
        j += 1;
    }
    // each truncation contributes less than one unit; the discarded tail is
    // below one unit as well
    (sum, 2 * j + 2)
}

/// Decimal rendering of a positive or negative rational with `digits`
/// significant digits, rounded half up on the magnitude.
pub fn format_significant(x: &BigRational, digits: u32) -> String {
    assert!(digits >= 1);
    if x.is_zero() {
        return "0".to_string();
    }
    let neg = x.is_negative();
    let mag = x.abs();
    let ten = BigRational::from_integer(BigInt::from(10));
    // exponent e with 10^e <= mag < 10^(e+1)
    let mut e: i64 = (mag.numer().to_string().len() as i64) - (mag.denom().to_string().len() as i64);
    let pow10 = |e: i64| -> BigRational {
        if e >= 0 {
            Pow::pow(&ten, e as u32)
        } else {
            Pow::pow(&ten, (-e) as u32).recip()
        }
    };
    while pow10(e) > mag {
        e -= 1;
    }
    while pow10(e + 1) <= mag {
        e += 1;
    }
    let shift = digits as i64 - 1 - e;
    let scaled = &mag * pow10(shift);
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut m = (scaled + half).floor().to_integer();
    if m.to_string().len() as u32 > digits {
        // rounding carried into a new digit
        m = m.div_floor(&BigInt::from(10));
        e += 1;
    }
    let body = m.to_string();
    let sign = if neg { "-" } else { "" };
    let digits = digits as i64;
    if (0..digits).contains(&e) {
        let (int, frac) = body.split_at((e + 1) as usize);
        if frac.is_empty() {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac}")
        }
    } else if (-6..0).contains(&e) {
        format!("{sign}0.{}{}", "0".repeat((-e - 1) as usize), body)
    } else {
        let (lead, rest) = body.split_at(1);
        if rest.is_empty() {
            format!("{sign}{lead}e{e}")
        } else {
            format!("{sign}{lead}.{rest}e{e}")
        }
    }
}

impl PartialOrd for Enclosure {
    /// Ordered only when the enclosures are disjoint or both are equal points.
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.hi < other.lo {
            Some(Ordering::Less)
        } else if self.lo > other.hi {
            Some(Ordering::Greater)
        } else if self.is_point() && other.is_point() && self.lo == other.lo {
            Some(Ordering::Equal)
        } else {
            None
        }
    }
}
