//! Points, axis-aligned boxes with per-end closure, and ℓ∞ balls.
//!
//! Partition members are half-open boxes `[a, a+s)` per coordinate while
//! balls are open or closed, so every interval carries its own closure
//! flags and every membership decision is made on exact rationals.

use std::fmt;
use std::ops::Index;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<Scalar>);

impl Point {
    pub fn new(coords: Vec<Scalar>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidArgument("a point needs at least one coordinate".into()));
        }
        Ok(Point(coords))
    }

    pub fn origin(d: usize) -> Self {
        Point(vec![Scalar::zero(); d])
    }

    /// Build from small integer fractions `(num, den)`. Test and example helper.
    pub fn from_ratios(coords: &[(i64, i64)]) -> Self {
        Point(coords.iter().map(|&(n, d)| Scalar::ratio(n, d)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Scalar] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<Scalar> {
        self.0
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: self.dim(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Point) -> Result<Point> {
        other.check_dim(self.dim())?;
        Ok(Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &Point) -> Result<Point> {
        other.check_dim(self.dim())?;
        Ok(Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn scale(&self, s: &Scalar) -> Point {
        Point(self.0.iter().map(|a| a * s).collect())
    }

    /// `self + t·𝟙`.
    pub fn offset_all(&self, t: &Scalar) -> Point {
        Point(self.0.iter().map(|a| a + t).collect())
    }

    pub fn dist_inf(&self, other: &Point) -> Result<Scalar> {
        other.check_dim(self.dim())?;
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .max()
            .unwrap_or_default())
    }

    pub fn concat(parts: &[Point]) -> Point {
        Point(parts.iter().flat_map(|p| p.0.iter().cloned()).collect())
    }

    pub fn slice(&self, start: usize, len: usize) -> Point {
        Point(self.0[start..start + len].to_vec())
    }
}

impl Index<usize> for Point {
    type Output = Scalar;
    fn index(&self, i: usize) -> &Scalar {
        &self.0[i]
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Comma-separated coordinates, e.g. `1/2,0.25,-3`, optionally wrapped in
/// parentheses as printed by `Display`.
impl FromStr for Point {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let body = t.strip_prefix('(').and_then(|r| r.strip_suffix(')')).unwrap_or(t);
        let coords = body.split(',').map(str::parse).collect::<Result<Vec<Scalar>>>()?;
        Point::new(coords)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BallKind {
    Open,
    Closed,
}

impl FromStr for BallKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "open" => Ok(BallKind::Open),
            "closed" => Ok(BallKind::Closed),
            other => Err(Error::InvalidArgument(format!(
                "ball kind must be open or closed, got `{other}`"
            ))),
        }
    }
}

/// One coordinate interval with explicit closure at each end.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Scalar,
    pub hi: Scalar,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: Scalar, hi: Scalar, lo_closed: bool, hi_closed: bool) -> Self {
        Interval {
            lo,
            hi,
            lo_closed,
            hi_closed,
        }
    }

    pub fn half_open(lo: Scalar, hi: Scalar) -> Self {
        Interval::new(lo, hi, true, false)
    }

    pub fn closed(lo: Scalar, hi: Scalar) -> Self {
        Interval::new(lo, hi, true, true)
    }

    pub fn open(lo: Scalar, hi: Scalar) -> Self {
        Interval::new(lo, hi, false, false)
    }

    pub fn is_empty(&self) -> bool {
        match self.lo.cmp(&self.hi) {
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => !(self.lo_closed && self.hi_closed),
            std::cmp::Ordering::Greater => true,
        }
    }

    pub fn length(&self) -> Scalar {
        if self.lo < self.hi {
            &self.hi - &self.lo
        } else {
            Scalar::zero()
        }
    }

    pub fn contains(&self, x: &Scalar) -> bool {
        let above = if self.lo_closed { *x >= self.lo } else { *x > self.lo };
        let below = if self.hi_closed { *x <= self.hi } else { *x < self.hi };
        above && below
    }

    pub fn intersection(&self, other: &Interval) -> Interval {
        let (lo, lo_closed) = match self.lo.cmp(&other.lo) {
            std::cmp::Ordering::Greater => (self.lo.clone(), self.lo_closed),
            std::cmp::Ordering::Less => (other.lo.clone(), other.lo_closed),
            std::cmp::Ordering::Equal => (self.lo.clone(), self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.cmp(&other.hi) {
            std::cmp::Ordering::Less => (self.hi.clone(), self.hi_closed),
            std::cmp::Ordering::Greater => (other.hi.clone(), other.hi_closed),
            std::cmp::Ordering::Equal => (self.hi.clone(), self.hi_closed && other.hi_closed),
        };
        Interval::new(lo, hi, lo_closed, hi_closed)
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        !self.intersection(other).is_empty()
    }

    /// Minkowski sum: an end is attained iff it is attained in both summands.
    pub fn minkowski_sum(&self, other: &Interval) -> Interval {
        Interval::new(
            &self.lo + &other.lo,
            &self.hi + &other.hi,
            self.lo_closed && other.lo_closed,
            self.hi_closed && other.hi_closed,
        )
    }

    pub fn translate(&self, t: &Scalar) -> Interval {
        Interval::new(&self.lo + t, &self.hi + t, self.lo_closed, self.hi_closed)
    }

    /// Image under `x ↦ s·x` for `s > 0`.
    pub fn scale(&self, s: &Scalar) -> Interval {
        debug_assert!(s.is_positive());
        Interval::new(&self.lo * s, &self.hi * s, self.lo_closed, self.hi_closed)
    }

    fn closure_tag(&self) -> &'static str {
        match (self.lo_closed, self.hi_closed) {
            (true, true) => "[]",
            (true, false) => "[)",
            (false, true) => "(]",
            (false, false) => "()",
        }
    }

    fn from_tag(tag: &str) -> Result<(bool, bool)> {
        match tag {
            "[]" => Ok((true, true)),
            "[)" => Ok((true, false)),
            "(]" => Ok((false, true)),
            "()" => Ok((false, false)),
            other => Err(Error::InvalidBox(format!("unknown closure tag `{other}`"))),
        }
    }
}

/// Axis-aligned box: a product of intervals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "BoxRepr", into = "BoxRepr")]
pub struct AxisBox {
    sides: Vec<Interval>,
}

#[derive(Serialize, Deserialize)]
struct BoxRepr {
    low: Vec<Scalar>,
    high: Vec<Scalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    closure: Option<Vec<String>>,
}

impl TryFrom<BoxRepr> for AxisBox {
    type Error = Error;
    fn try_from(r: BoxRepr) -> Result<Self> {
        let d = r.low.len();
        let flags = match r.closure {
            None => vec![(true, false); d],
            Some(tags) => tags.iter().map(|t| Interval::from_tag(t)).collect::<Result<_>>()?,
        };
        if flags.len() != d {
            return Err(Error::InvalidBox("closure list length differs from dimension".into()));
        }
        AxisBox::new(Point::new(r.low)?, Point::new(r.high)?, flags)
    }
}

impl From<AxisBox> for BoxRepr {
    fn from(b: AxisBox) -> Self {
        let closure = b.sides.iter().map(|s| s.closure_tag().to_string()).collect();
        let (low, high) = b.sides.into_iter().map(|s| (s.lo, s.hi)).unzip();
        BoxRepr {
            low,
            high,
            closure: Some(closure),
        }
    }
}

impl AxisBox {
    /// Requires `low ≤ high` coordinatewise; a degenerate coordinate makes
    /// the box empty unless both of its ends are closed.
    pub fn new(low: Point, high: Point, closure: Vec<(bool, bool)>) -> Result<Self> {
        high.check_dim(low.dim())?;
        if closure.len() != low.dim() {
            return Err(Error::DimensionMismatch {
                expected: low.dim(),
                found: closure.len(),
            });
        }
        let mut sides = Vec::with_capacity(low.dim());
        for ((lo, hi), (lc, hc)) in low.into_coords().into_iter().zip(high.into_coords()).zip(closure) {
            if lo > hi {
                return Err(Error::InvalidBox(format!("low {lo} exceeds high {hi}")));
            }
            sides.push(Interval::new(lo, hi, lc, hc));
        }
        Ok(AxisBox { sides })
    }

    pub fn from_intervals(sides: Vec<Interval>) -> Result<Self> {
        if sides.is_empty() {
            return Err(Error::InvalidBox("zero-dimensional box".into()));
        }
        Ok(AxisBox { sides })
    }

    /// `[low, low + side)` in every coordinate.
    pub fn half_open(low: &Point, sides: &[Scalar]) -> Self {
        AxisBox {
            sides: low
                .coords()
                .iter()
                .zip(sides)
                .map(|(a, s)| Interval::half_open(a.clone(), a + s))
                .collect(),
        }
    }

    pub fn closed(low: Point, high: Point) -> Result<Self> {
        let d = low.dim();
        AxisBox::new(low, high, vec![(true, true); d])
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[Interval] {
        &self.sides
    }

    pub fn side(&self, i: usize) -> &Interval {
        &self.sides[i]
    }

    pub fn low(&self) -> Point {
        Point(self.sides.iter().map(|s| s.lo.clone()).collect())
    }

    pub fn high(&self) -> Point {
        Point(self.sides.iter().map(|s| s.hi.clone()).collect())
    }

    pub fn is_empty(&self) -> bool {
        self.sides.iter().any(Interval::is_empty)
    }

    /// Lebesgue measure. Closure flags do not matter.
    pub fn volume(&self) -> Scalar {
        if self.is_empty() {
            return Scalar::zero();
        }
        self.sides.iter().map(Interval::length).product()
    }

    pub fn contains(&self, p: &Point) -> Result<bool> {
        p.check_dim(self.dim())?;
        Ok(self.sides.iter().zip(p.coords()).all(|(s, x)| s.contains(x)))
    }

    pub fn contains_box(&self, other: &AxisBox) -> Result<bool> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        if other.is_empty() {
            return Ok(true);
        }
        Ok(self.sides.iter().zip(&other.sides).all(|(s, o)| {
            let lo_ok = s.lo < o.lo || (s.lo == o.lo && (s.lo_closed || !o.lo_closed));
            let hi_ok = o.hi < s.hi || (s.hi == o.hi && (s.hi_closed || !o.hi_closed));
            lo_ok && hi_ok
        }))
    }

    pub fn intersects(&self, other: &AxisBox) -> Result<bool> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self.sides.iter().zip(&other.sides).all(|(a, b)| a.intersects(b)))
    }

    pub fn minkowski_sum(&self, other: &AxisBox) -> Result<AxisBox> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(AxisBox {
            sides: self
                .sides
                .iter()
                .zip(&other.sides)
                .map(|(a, b)| a.minkowski_sum(b))
                .collect(),
        })
    }

    pub fn translate(&self, t: &Point) -> Result<AxisBox> {
        t.check_dim(self.dim())?;
        Ok(AxisBox {
            sides: self.sides.iter().zip(t.coords()).map(|(s, x)| s.translate(x)).collect(),
        })
    }

    pub fn scale(&self, s: &Scalar) -> AxisBox {
        AxisBox {
            sides: self.sides.iter().map(|i| i.scale(s)).collect(),
        }
    }

    /// Sub-box on coordinates `start..start+len`.
    pub fn project(&self, start: usize, len: usize) -> AxisBox {
        AxisBox {
            sides: self.sides[start..start + len].to_vec(),
        }
    }
}

/// ℓ∞ ball; as a set it is the box `center + [−r, r]^d` (open or closed).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfBall {
    pub center: Point,
    pub radius: Scalar,
    pub kind: BallKind,
}

impl InfBall {
    pub fn new(center: Point, radius: Scalar, kind: BallKind) -> Result<Self> {
        if radius.is_negative() {
            return Err(Error::InvalidArgument(format!("negative radius {radius}")));
        }
        Ok(InfBall { center, radius, kind })
    }

    pub fn closed(center: Point, radius: Scalar) -> Result<Self> {
        InfBall::new(center, radius, BallKind::Closed)
    }

    pub fn open(center: Point, radius: Scalar) -> Result<Self> {
        InfBall::new(center, radius, BallKind::Open)
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    /// The ball centred at the origin, as a box.
    pub fn origin_box(d: usize, radius: &Scalar, kind: BallKind) -> AxisBox {
        let closed = kind == BallKind::Closed;
        AxisBox {
            sides: (0..d)
                .map(|_| Interval::new(-radius, radius.clone(), closed, closed))
                .collect(),
        }
    }

    pub fn as_box(&self) -> AxisBox {
        let closed = self.kind == BallKind::Closed;
        AxisBox {
            sides: self
                .center
                .coords()
                .iter()
                .map(|c| Interval::new(c - &self.radius, c + &self.radius, closed, closed))
                .collect(),
        }
    }
}

/// Whether a half-open box `Π[a_i, a_i + s_i)` meets an ℓ∞ ball.
///
/// Closed ball: `a_i ≤ p_i + r` and `a_i + s_i > p_i − r` for every `i`;
/// an open ball makes the first comparison strict.
pub fn box_intersects_ball(cube: &AxisBox, ball: &InfBall) -> Result<bool> {
    ball.center.check_dim(cube.dim())?;
    for side in cube.sides() {
        if !(side.lo_closed && !side.hi_closed) {
            return Err(Error::InvalidBox("expected a half-open [a, a+s) box".into()));
        }
    }
    let r = &ball.radius;
    if ball.kind == BallKind::Open && r.is_zero() {
        return Ok(false);
    }
    Ok(cube.sides().iter().zip(ball.center.coords()).all(|(side, p)| {
        let reach_up = p + r;
        let reach_down = p - r;
        let low_ok = match ball.kind {
            BallKind::Closed => side.lo <= reach_up,
            BallKind::Open => side.lo < reach_up,
        };
        low_ok && side.hi > reach_down
    }))
}
