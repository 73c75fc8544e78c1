//! Closed-form degree and tolerance bounds.
//!
//! The degree lower bound for a norm with unit-ball volume `v_d` and member
//! measure at most `M` is `⌈(1 + ε·(v_d/M)^{1/d})^d⌉`. For ℓ∞ and rational
//! inputs it is evaluated exactly; otherwise it is bracketed by
//! [`Enclosure`]s that are refined until the ceiling is pinned down, and if
//! refinement gives up the upper end is used, so the ceiling is never
//! under-reported.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Pow, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::partition::{glued_claim, SecludedClaim};
use crate::scalar::Scalar;

const START_BITS: u32 = 128;
const MAX_BITS: u32 = 1 << 15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    L1,
    L2,
    #[serde(rename = "linf")]
    LInf,
}

impl NormKind {
    pub const ALL: [NormKind; 3] = [NormKind::LInf, NormKind::L1, NormKind::L2];

    pub fn name(self) -> &'static str {
        match self {
            NormKind::L1 => "l1",
            NormKind::L2 => "l2",
            NormKind::LInf => "linf",
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NormKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "l1" => Ok(NormKind::L1),
            "l2" => Ok(NormKind::L2),
            "linf" | "inf" => Ok(NormKind::LInf),
            other => Err(Error::InvalidArgument(format!(
                "unknown norm `{other}` (expected l1, l2 or linf)"
            ))),
        }
    }
}

/// A unit-ball volume of the form `rational · π^pi_power`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallVolume {
    pub rational: Scalar,
    pub pi_power: u32,
}

impl BallVolume {
    /// The value when it is rational.
    pub fn exact(&self) -> Option<&Scalar> {
        (self.pi_power == 0).then_some(&self.rational)
    }

    pub fn enclose(&self, bits: u32) -> Enclosure {
        let r = Enclosure::exact(&self.rational, bits);
        if self.pi_power == 0 {
            r
        } else {
            r.mul(&Enclosure::pi(bits).powi(self.pi_power))
        }
    }

    pub fn to_significant(&self, digits: u32) -> String {
        let mut bits = START_BITS;
        loop {
            let e = self.enclose(bits);
            if e.determines_digits(digits) || bits >= MAX_BITS {
                return e.to_significant(digits);
            }
            bits *= 2;
        }
    }
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * i)
}

/// Volume of the unit ball of `norm` in ℝ^d.
///
/// ℓ1: `2^d/d!`; ℓ∞: `2^d`; ℓ2: `π^m/m!` for `d = 2m`, and
/// `π^(m−1)·4^m·m!/(2m)!` for `d = 2m − 1` (half-integer Γ closed form).
pub fn unit_ball_volume(norm: NormKind, d: usize) -> Result<BallVolume> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let two_d = Scalar::from(2).powi(d as u32);
    Ok(match norm {
        NormKind::LInf => BallVolume {
            rational: two_d,
            pi_power: 0,
        },
        NormKind::L1 => BallVolume {
            rational: two_d / Scalar::from_integer(factorial(d as u64)),
            pi_power: 0,
        },
        NormKind::L2 if d.is_multiple_of(2) => {
            let m = (d / 2) as u64;
            BallVolume {
                rational: Scalar::one() / Scalar::from_integer(factorial(m)),
                pi_power: m as u32,
            }
        }
        NormKind::L2 => {
            let m = d.div_ceil(2) as u64;
            let num = Pow::pow(BigInt::from(4), m) * factorial(m);
            BallVolume {
                rational: Scalar::from_integer(num) / Scalar::from_integer(factorial(2 * m)),
                pi_power: (m - 1) as u32,
            }
        }
    })
}

/// `(1 + ε·(v/M)^{1/d})^d`, exactly when possible.
#[derive(Clone, Debug)]
pub struct BoundValue {
    pub exact: Option<Scalar>,
    pub enclosure: Enclosure,
}

fn check_bound_args(d: usize, eps: &Scalar, m: &Scalar) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    if eps.is_negative() {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be nonnegative, got {eps}"
        )));
    }
    if !m.is_positive() {
        return Err(Error::InvalidArgument(format!(
            "measure bound must be positive, got {m}"
        )));
    }
    Ok(())
}

fn measure_bound_at(d: usize, eps: &Scalar, m: &Scalar, vol: &BallVolume, bits: u32) -> Enclosure {
    let dd = d as u32;
    let y = vol.enclose(bits).mul_scalar(&(eps.powi(dd) / m));
    let t = y.nth_root(dd).expect("nonnegative radicand");
    t.add_scalar(&Scalar::one()).powi(dd)
}

fn exact_measure_bound(d: usize, eps: &Scalar, m: &Scalar, vol: &BallVolume) -> Option<Scalar> {
    let v = vol.exact()?;
    let dd = d as u32;
    let t = (eps.powi(dd) * v / m).exact_root(dd)?;
    Some((Scalar::one() + t).powi(dd))
}

pub fn measure_bound_value(d: usize, eps: &Scalar, m: &Scalar, norm: NormKind, bits: u32) -> Result<BoundValue> {
    check_bound_args(d, eps, m)?;
    let vol = unit_ball_volume(norm, d)?;
    if let Some(x) = exact_measure_bound(d, eps, m, &vol) {
        return Ok(BoundValue {
            enclosure: Enclosure::exact(&x, bits),
            exact: Some(x),
        });
    }
    Ok(BoundValue {
        exact: None,
        enclosure: measure_bound_at(d, eps, m, &vol, bits),
    })
}

fn to_biguint(n: BigInt) -> BigUint {
    n.to_biguint().expect("bound values are at least 1")
}

/// `⌈(1 + ε·(v_d/M)^{1/d})^d⌉`.
pub fn lower_bound_k_measure(d: usize, eps: &Scalar, m: &Scalar, norm: NormKind) -> Result<BigUint> {
    check_bound_args(d, eps, m)?;
    let vol = unit_ball_volume(norm, d)?;
    if let Some(x) = exact_measure_bound(d, eps, m, &vol) {
        return Ok(to_biguint(x.ceil()));
    }
    let mut bits = START_BITS;
    loop {
        let e = measure_bound_at(d, eps, m, &vol, bits);
        if let Some(k) = e.ceil() {
            return Ok(to_biguint(k));
        }
        if bits >= MAX_BITS {
            return Ok(to_biguint(e.hi().ceil().to_integer()));
        }
        bits *= 2;
    }
}

/// `⌈(1 + 2ε/D)^d⌉`.
pub fn lower_bound_k_diameter(d: usize, eps: &Scalar, diameter: &Scalar) -> Result<BigUint> {
    check_bound_args(d, eps, diameter)?;
    let base = Scalar::one() + Scalar::from(2) * eps / diameter;
    Ok(to_biguint(base.powi(d as u32).ceil()))
}

fn ln_biguint(k: &BigUint) -> f64 {
    let bits = k.bits();
    if bits <= 1000 {
        return k.to_f64().expect("finite below 2^1000").ln();
    }
    let shift = bits - 64;
    let top = (k >> shift as usize).to_f64().expect("64-bit value");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `ln(k)/d`, rounded up so it is a safe upper bound on the tolerance.
/// Only meaningful for `1 ≤ k ≤ 2^d`.
pub fn tolerance_upper(d: usize, k: &BigUint) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    if k.bits() == 0 {
        return Err(Error::InvalidArgument("degree k must be at least 1".into()));
    }
    if k.bits() > d as u64 + 1 || (k.bits() == d as u64 + 1 && k.count_ones() > 1) {
        return Err(Error::OutOfRegime(format!("k = {k} exceeds 2^{d}")));
    }
    if k.is_one() {
        return Ok(0.0);
    }
    let x = ln_biguint(k) / d as f64;
    // two ulps cover the logarithm's and the division's rounding
    Ok(x.next_up().next_up())
}

/// Degree and tolerance of the glued construction with block dimension `f(d)`.
pub fn construction_params(f: impl Fn(usize) -> usize, d: usize) -> Result<SecludedClaim> {
    glued_claim(f(d), d)
}

/// Smallest tolerance a `k`-pseudodeterministic rounding scheme built on a
/// `ε₀`-accurate oracle can have: `max(ε₀, ε₀·d/(4·ln(2k)))`.
pub fn nfl_lower(eps0: &Scalar, d: usize, k: &BigUint) -> Result<f64> {
    if !eps0.is_positive() {
        return Err(Error::InvalidArgument(format!(
            "base accuracy must be positive, got {eps0}"
        )));
    }
    if d == 0 || k.bits() == 0 {
        return Err(Error::InvalidArgument("d and k must be at least 1".into()));
    }
    let e0 = eps0.to_f64();
    let formula = e0 * d as f64 / (4.0 * ln_biguint(&(k * 2u32)));
    Ok(e0.max(formula))
}

/// `⌊(2 + 2ε)^d⌋`, the degree every unit-cube partition trivially achieves.
pub fn trivial_k(d: usize, eps: &Scalar) -> Result<BigUint> {
    if eps.is_negative() {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be nonnegative, got {eps}"
        )));
    }
    let base = Scalar::from(2) + Scalar::from(2) * eps;
    Ok(to_biguint(base.powi(d as u32).floor()))
}

/// One line of the per-norm lower-bound table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub d: usize,
    pub norm: NormKind,
    pub epsilon: Scalar,
    pub measure: Scalar,
    /// `(1 + ε(v/M)^{1/d})^d` to the requested number of significant digits.
    pub value: String,
    /// The exact value when it is rational.
    pub exact_value: Option<Scalar>,
    #[serde(with = "crate::partition::biguint_text")]
    pub k: BigUint,
    /// Stirling-style closed-form approximation; display only.
    pub approx: Option<f64>,
}

/// Stirling approximations: ℓ1 uses `(d!)^{1/d} ≈ d/e`, ℓ2 uses
/// `Γ(d/2+1)^{1/d} ≈ √(d/(2e))`. ℓ∞ has no approximation.
pub fn stirling_approx(d: usize, eps: &Scalar, m: &Scalar, norm: NormKind) -> Option<f64> {
    let e = std::f64::consts::E;
    let df = d as f64;
    let scale = m.to_f64().powf(1.0 / df);
    let factor = match norm {
        NormKind::LInf => return None,
        NormKind::L1 => 2.0 * e / (scale * df),
        NormKind::L2 => (2.0 * std::f64::consts::PI * e).sqrt() / (scale * df.sqrt()),
    };
    Some((1.0 + eps.to_f64() * factor).powf(df))
}

pub fn table_row(d: usize, eps: &Scalar, m: &Scalar, norm: NormKind, digits: u32) -> Result<TableRow> {
    let k = lower_bound_k_measure(d, eps, m, norm)?;
    let mut bits = START_BITS;
    let value = loop {
        let v = measure_bound_value(d, eps, m, norm, bits)?;
        if v.exact.is_some() || v.enclosure.determines_digits(digits) || bits >= MAX_BITS {
            break v;
        }
        bits *= 2;
    };
    Ok(TableRow {
        d,
        norm,
        epsilon: eps.clone(),
        measure: m.clone(),
        value: value.enclosure.to_significant(digits),
        exact_value: value.exact,
        k,
        approx: stirling_approx(d, eps, m, norm),
    })
}

/// Rows for every `d` in `dims` and every norm, dimension-major.
pub fn table(
    dims: impl IntoIterator<Item = usize>,
    eps: &Scalar,
    m: &Scalar,
    norms: &[NormKind],
    digits: u32,
) -> Result<Vec<TableRow>> {
    let mut rows = Vec::new();
    for d in dims {
        for &norm in norms {
            rows.push(table_row(d, eps, m, norm, digits)?);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    #[test]
    fn volumes() {
        assert_eq!(unit_ball_volume(NormKind::LInf, 3).unwrap().exact(), Some(&q(8, 1)));
        assert_eq!(unit_ball_volume(NormKind::L1, 3).unwrap().exact(), Some(&q(4, 3)));
        let l2 = unit_ball_volume(NormKind::L2, 2).unwrap();
        assert_eq!((l2.rational.clone(), l2.pi_power), (q(1, 1), 1));
        let l2 = unit_ball_volume(NormKind::L2, 3).unwrap();
        assert_eq!((l2.rational.clone(), l2.pi_power), (q(4, 3), 1));
        assert_eq!(unit_ball_volume(NormKind::L2, 1).unwrap().exact(), Some(&q(2, 1)));
    }

    #[test]
    fn measure_bounds() {
        let one = Scalar::one();
        assert_eq!(
            lower_bound_k_measure(2, &q(1, 2), &one, NormKind::LInf).unwrap(),
            4u32.into()
        );
        assert_eq!(
            lower_bound_k_measure(4, &q(1, 4), &one, NormKind::LInf).unwrap(),
            6u32.into()
        );
        assert_eq!(
            lower_bound_k_measure(5, &Scalar::zero(), &one, NormKind::L2).unwrap(),
            1u32.into()
        );
        assert_eq!(
            lower_bound_k_measure(7, &q(1, 1_000_000), &one, NormKind::L2).unwrap(),
            2u32.into()
        );
        // d = 2, ℓ2, ε = 1: (1 + √π)² ≈ 7.69
        assert_eq!(lower_bound_k_measure(2, &one, &one, NormKind::L2).unwrap(), 8u32.into());
    }

    #[test]
    fn diameter_bounds() {
        let one = Scalar::one();
        assert_eq!(lower_bound_k_diameter(2, &q(1, 2), &one).unwrap(), 4u32.into());
        assert_eq!(lower_bound_k_diameter(3, &q(1, 2), &q(2, 1)).unwrap(), 4u32.into());
        assert_eq!(
            lower_bound_k_diameter(3, &q(1, 2), &q(1_000_000_000, 1)).unwrap(),
            2u32.into()
        );
    }

    #[test]
    fn tolerance_upper_values() {
        let t = tolerance_upper(10, &1024u32.into()).unwrap();
        assert!(t >= std::f64::consts::LN_2 && t - std::f64::consts::LN_2 < 1e-12);
        assert_eq!(tolerance_upper(3, &1u32.into()).unwrap(), 0.0);
        let t = tolerance_upper(100, &101u32.into()).unwrap();
        assert!((t - 0.04615).abs() < 1e-5);
        assert!(matches!(tolerance_upper(3, &9u32.into()), Err(Error::OutOfRegime(_))));
        assert!(tolerance_upper(3, &8u32.into()).is_ok());
    }

    #[test]
    fn nfl_and_trivial() {
        let v = nfl_lower(&q(1, 100), 100, &101u32.into()).unwrap();
        assert!((v - 0.0471).abs() < 1e-4, "{v}");
        assert_eq!(nfl_lower(&q(1, 2), 1, &1u32.into()).unwrap(), 0.5);
        assert_eq!(trivial_k(5, &Scalar::zero()).unwrap(), 32u32.into());
        assert_eq!(trivial_k(2, &q(1, 2)).unwrap(), 9u32.into());
    }

    #[test]
    fn construction_examples() {
        let c = construction_params(|_| 1, 3).unwrap();
        assert_eq!((c.k, c.epsilon), (8u32.into(), q(1, 2)));
        let c = construction_params(|d| d, 4).unwrap();
        assert_eq!((c.k, c.epsilon), (5u32.into(), q(1, 8)));
        let c = construction_params(|_| 2, 6).unwrap();
        assert_eq!((c.k, c.epsilon), (27u32.into(), q(1, 4)));
    }

    #[test]
    fn table_rows() {
        let row = table_row(2, &q(1, 4), &Scalar::one(), NormKind::LInf, 30).unwrap();
        assert_eq!(row.exact_value, Some(q(9, 4)));
        assert_eq!(row.value, "2.25000000000000000000000000000");
        assert_eq!(row.k, 3u32.into());
        let row = table_row(2, &Scalar::one(), &Scalar::one(), NormKind::L2, 20).unwrap();
        // (1 + √π)²
        assert_eq!(row.value, "7.6865003554008252931");
        assert!(row.approx.is_some());
    }
}
