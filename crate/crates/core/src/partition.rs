//! Unit-cube partitions of ℝ^d.
//!
//! Every [`PartitionSpec`] describes a tiling of ℝ^d by translates of one
//! half-open box `Π[0, s_i)`; the translates form a lattice containing the
//! origin. Members are addressed by [`MemberId`]s, integer index vectors
//! whose meaning depends on the variant:
//!
//! * `Grid`: the floor of each coordinate.
//! * `Layered`: layer indices, outermost (top coordinate) first. Layer `n`
//!   of a `d`-dimensional layered partition is the `(d−1)`-dimensional one
//!   translated by `n·σ·𝟙` in the lower coordinates and by `n` in the top one.
//! * `Product`: concatenation of the factor ids.
//! * `Scaled`: the id of the unscaled member.

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{AxisBox, Interval, Point};
use crate::scalar::Scalar;

/// Guard against queries that would enumerate absurd numbers of members.
pub const MAX_ENUMERATED_MEMBERS: u64 = 20_000_000;

/// Largest dimension accepted by the constructors.
pub const MAX_DIMENSION: usize = 4096;

fn check_dimension(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidSpec("dimension must be at least 1".into()));
    }
    if d > MAX_DIMENSION {
        return Err(Error::InvalidSpec(format!(
            "dimension {d} exceeds the limit {MAX_DIMENSION}"
        )));
    }
    Ok(())
}

/// Integer indices of a member, serialized as a JSON array of integers
/// (indices outside the `i64` range as decimal strings).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MemberId(Vec<BigInt>);

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum IndexRepr {
    Small(i64),
    Big(String),
}

impl Serialize for MemberId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|n| match n.to_i64() {
            Some(v) => IndexRepr::Small(v),
            None => IndexRepr::Big(n.to_string()),
        }))
    }
}

impl<'de> Deserialize<'de> for MemberId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<IndexRepr>::deserialize(d)?;
        raw.into_iter()
            .map(|r| match r {
                IndexRepr::Small(v) => Ok(BigInt::from(v)),
                IndexRepr::Big(t) => t.parse().map_err(serde::de::Error::custom),
            })
            .collect::<std::result::Result<_, _>>()
            .map(MemberId)
    }
}

impl MemberId {
    pub fn new(indices: Vec<BigInt>) -> Self {
        MemberId(indices)
    }

    pub fn from_i64(indices: &[i64]) -> Self {
        MemberId(indices.iter().map(|&i| BigInt::from(i)).collect())
    }

    pub fn indices(&self) -> &[BigInt] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(parts: &[MemberId]) -> MemberId {
        MemberId(parts.iter().flat_map(|m| m.0.iter().cloned()).collect())
    }
}

/// Degree and tolerance claimed for a construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecludedClaim {
    #[serde(with = "biguint_text")]
    pub k: BigUint,
    pub epsilon: Scalar,
}

impl SecludedClaim {
    pub fn new(k: BigUint, epsilon: Scalar) -> Result<Self> {
        if k.is_zero() {
            return Err(Error::InvalidArgument("degree k must be at least 1".into()));
        }
        if epsilon.is_negative() {
            return Err(Error::InvalidArgument("tolerance must be nonnegative".into()));
        }
        Ok(SecludedClaim { k, epsilon })
    }

    /// The claim transported through `x ↦ s·x`.
    pub fn scaled(&self, s: &Scalar) -> SecludedClaim {
        SecludedClaim {
            k: self.k.clone(),
            epsilon: &self.epsilon * s,
        }
    }
}

pub(crate) mod biguint_text {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(k: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(k)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr", into = "SpecRepr")]
pub enum PartitionSpec {
    Grid {
        d: usize,
    },
    /// `shifts[j]` is applied to the lower coordinates when peeling
    /// coordinate `j + 2` (1-based); length `d − 1`.
    Layered {
        d: usize,
        shifts: Vec<Scalar>,
    },
    Product {
        factors: Vec<PartitionSpec>,
    },
    Scaled {
        inner: Box<PartitionSpec>,
        factor: Scalar,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum SpecRepr {
    Grid {
        d: usize,
    },
    Layered {
        d: usize,
        #[serde(default)]
        shifts: Option<Vec<Scalar>>,
    },
    Product {
        factors: Vec<SpecRepr>,
    },
    Scaled {
        inner: Box<SpecRepr>,
        factor: Scalar,
    },
}

impl TryFrom<SpecRepr> for PartitionSpec {
    type Error = Error;
    fn try_from(r: SpecRepr) -> Result<Self> {
        match r {
            SpecRepr::Grid { d } => PartitionSpec::grid(d),
            SpecRepr::Layered { d, shifts: None } => PartitionSpec::layered_default(d),
            SpecRepr::Layered { d, shifts: Some(s) } => PartitionSpec::layered(d, s),
            SpecRepr::Product { factors } => PartitionSpec::product(
                factors
                    .into_iter()
                    .map(PartitionSpec::try_from)
                    .collect::<Result<_>>()?,
            ),
            SpecRepr::Scaled { inner, factor } => PartitionSpec::try_from(*inner)?.scale(factor),
        }
    }
}

impl From<PartitionSpec> for SpecRepr {
    fn from(s: PartitionSpec) -> Self {
        match s {
            PartitionSpec::Grid { d } => SpecRepr::Grid { d },
            PartitionSpec::Layered { d, shifts } => SpecRepr::Layered {
                d,
                shifts: Some(shifts),
            },
            PartitionSpec::Product { factors } => SpecRepr::Product {
                factors: factors.into_iter().map(SpecRepr::from).collect(),
            },
            PartitionSpec::Scaled { inner, factor } => SpecRepr::Scaled {
                inner: Box::new(SpecRepr::from(*inner)),
                factor,
            },
        }
    }
}

impl PartitionSpec {
    pub fn grid(d: usize) -> Result<Self> {
        check_dimension(d)?;
        Ok(PartitionSpec::Grid { d })
    }

    pub fn layered(d: usize, shifts: Vec<Scalar>) -> Result<Self> {
        check_dimension(d)?;
        if shifts.len() != d - 1 {
            return Err(Error::InvalidSpec(format!(
                "layered partition of dimension {d} needs {} shifts, got {}",
                d - 1,
                shifts.len()
            )));
        }
        Ok(PartitionSpec::Layered { d, shifts })
    }

    /// Layered partition with shift `1/d` at every level.
    pub fn layered_default(d: usize) -> Result<Self> {
        check_dimension(d)?;
        let sigma = Scalar::ratio(1, d as i64);
        PartitionSpec::layered(d, vec![sigma; d - 1])
    }

    /// Layered partition whose shift decreases with the level:
    /// `(d−1)/d, (d−2)/d, …, 1/d`, the first applied when peeling coordinate 2.
    ///
    /// Unlike the uniform schedule of [`PartitionSpec::layered_default`],
    /// this one audits as `(d+1, 1/(2d))`-secluded.
    pub fn layered_staggered(d: usize) -> Result<Self> {
        check_dimension(d)?;
        let shifts = (1..d).rev().map(|k| Scalar::ratio(k as i64, d as i64)).collect();
        PartitionSpec::layered(d, shifts)
    }

    pub fn product(factors: Vec<PartitionSpec>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidSpec("product of zero partitions".into()));
        }
        check_dimension(factors.iter().map(PartitionSpec::dim).sum())?;
        Ok(PartitionSpec::Product { factors })
    }

    /// Members become `s·X` for each member `X`.
    pub fn scale(self, factor: Scalar) -> Result<Self> {
        if !factor.is_positive() {
            return Err(Error::InvalidSpec(format!(
                "scale factor must be positive, got {factor}"
            )));
        }
        Ok(PartitionSpec::Scaled {
            inner: Box::new(self),
            factor,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("partition specs always serialize")
    }

    pub fn dim(&self) -> usize {
        match self {
            PartitionSpec::Grid { d } | PartitionSpec::Layered { d, .. } => *d,
            PartitionSpec::Product { factors } => factors.iter().map(PartitionSpec::dim).sum(),
            PartitionSpec::Scaled { inner, .. } => inner.dim(),
        }
    }

    /// Side lengths of the common member box.
    pub fn side_lengths(&self) -> Vec<Scalar> {
        match self {
            PartitionSpec::Grid { d } | PartitionSpec::Layered { d, .. } => vec![Scalar::one(); *d],
            PartitionSpec::Product { factors } => factors.iter().flat_map(|f| f.side_lengths()).collect(),
            PartitionSpec::Scaled { inner, factor } => inner.side_lengths().iter().map(|s| s * factor).collect(),
        }
    }

    pub fn is_unit_cube(&self) -> bool {
        self.side_lengths().iter().all(|s| *s == Scalar::one())
    }

    /// Measure of every member.
    pub fn member_volume(&self) -> Scalar {
        self.side_lengths().iter().product()
    }

    /// The member containing `x` (half-open convention, total on ℝ^d).
    pub fn member_of(&self, x: &Point) -> Result<MemberId> {
        x.check_dim(self.dim())?;
        let mut out = Vec::with_capacity(self.dim());
        self.member_into(x.coords(), &mut out);
        Ok(MemberId(out))
    }

    fn member_into(&self, x: &[Scalar], out: &mut Vec<BigInt>) {
        match self {
            PartitionSpec::Grid { .. } => out.extend(x.iter().map(Scalar::floor)),
            PartitionSpec::Layered { d, shifts } => {
                let mut y = x.to_vec();
                for j in (1..=*d).rev() {
                    let n = y[j - 1].floor();
                    if j >= 2 {
                        let t = Scalar::from_integer(n.clone()) * &shifts[j - 2];
                        for yi in &mut y[..j - 1] {
                            *yi -= &t;
                        }
                    }
                    out.push(n);
                }
            }
            PartitionSpec::Product { factors } => {
                let mut start = 0;
                for f in factors {
                    let k = f.dim();
                    f.member_into(&x[start..start + k], out);
                    start += k;
                }
            }
            PartitionSpec::Scaled { inner, factor } => {
                let y: Vec<Scalar> = x.iter().map(|v| v / factor).collect();
                inner.member_into(&y, out);
            }
        }
    }

    /// Low corner `a` of the member `a + Π[0, s_i)`.
    pub fn corner_of(&self, id: &MemberId) -> Result<Point> {
        if id.len() != self.dim() {
            return Err(Error::InvalidMember(format!(
                "id has {} indices, partition has dimension {}",
                id.len(),
                self.dim()
            )));
        }
        Point::new(self.corner_coords(id.indices()))
    }

    fn corner_coords(&self, idx: &[BigInt]) -> Vec<Scalar> {
        match self {
            PartitionSpec::Grid { .. } => idx.iter().map(|n| Scalar::from_integer(n.clone())).collect(),
            PartitionSpec::Layered { d, shifts } => {
                let mut corner = vec![Scalar::zero(); *d];
                let mut offset = vec![Scalar::zero(); *d];
                for (level, n) in idx.iter().enumerate() {
                    let j = d - level;
                    let n = Scalar::from_integer(n.clone());
                    corner[j - 1] = &n + &offset[j - 1];
                    if j >= 2 {
                        let t = &n * &shifts[j - 2];
                        for o in &mut offset[..j - 1] {
                            *o += &t;
                        }
                    }
                }
                corner
            }
            PartitionSpec::Product { factors } => {
                let mut out = Vec::with_capacity(idx.len());
                let mut start = 0;
                for f in factors {
                    let k = f.dim();
                    out.extend(f.corner_coords(&idx[start..start + k]));
                    start += k;
                }
                out
            }
            PartitionSpec::Scaled { inner, factor } => inner.corner_coords(idx).iter().map(|c| c * factor).collect(),
        }
    }

    /// Center `a + s/2` of the member.
    pub fn center_of(&self, id: &MemberId) -> Result<Point> {
        let corner = self.corner_of(id)?;
        let half = Scalar::ratio(1, 2);
        Point::new(
            corner
                .coords()
                .iter()
                .zip(self.side_lengths())
                .map(|(a, s)| a + &(s * &half))
                .collect(),
        )
    }

    pub fn member_box(&self, id: &MemberId) -> Result<AxisBox> {
        let corner = self.corner_of(id)?;
        Ok(AxisBox::half_open(&corner, &self.side_lengths()))
    }

    pub fn contains(&self, id: &MemberId, y: &Point) -> Result<bool> {
        self.member_box(id)?.contains(y)
    }

    /// Every member meeting `query`, sorted by id.
    ///
    /// Works layer by layer: only the integer layers whose slab meets the
    /// query interval in the top coordinate are visited.
    pub fn members_meeting(&self, query: &AxisBox) -> Result<Vec<MemberId>> {
        if query.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: query.dim(),
            });
        }
        if query.is_empty() {
            return Ok(Vec::new());
        }
        self.check_enumeration_size(query)?;
        let mut out = Vec::new();
        self.meeting_into(query.sides(), &mut out);
        let mut ids: Vec<MemberId> = out.into_iter().map(MemberId).collect();
        ids.sort();
        Ok(ids)
    }

    fn check_enumeration_size(&self, query: &AxisBox) -> Result<()> {
        let mut estimate: f64 = 1.0;
        for (side, s) in query.sides().iter().zip(self.side_lengths()) {
            estimate *= (side.length() / s).to_f64() + 2.0;
        }
        if estimate > MAX_ENUMERATED_MEMBERS as f64 {
            return Err(Error::InvalidArgument(format!(
                "query would enumerate about {estimate:.0} members (limit {MAX_ENUMERATED_MEMBERS})"
            )));
        }
        Ok(())
    }

    fn meeting_into(&self, query: &[Interval], out: &mut Vec<Vec<BigInt>>) {
        match self {
            PartitionSpec::Grid { .. } => {
                let per_axis: Vec<Vec<BigInt>> = query.iter().map(unit_layers_meeting).collect();
                cartesian(&per_axis, out);
            }
            PartitionSpec::Layered { shifts, .. } => {
                let mut prefix = Vec::with_capacity(query.len());
                layered_meeting(shifts, query.to_vec(), &mut prefix, out);
            }
            PartitionSpec::Product { factors } => {
                let mut blocks: Vec<Vec<Vec<BigInt>>> = Vec::with_capacity(factors.len());
                let mut start = 0;
                for f in factors {
                    let k = f.dim();
                    let mut part = Vec::new();
                    f.meeting_into(&query[start..start + k], &mut part);
                    if part.is_empty() {
                        return;
                    }
                    blocks.push(part);
                    start += k;
                }
                let mut acc: Vec<Vec<BigInt>> = vec![Vec::new()];
                for block in blocks {
                    let mut next = Vec::with_capacity(acc.len() * block.len());
                    for a in &acc {
                        for b in &block {
                            let mut v = a.clone();
                            v.extend(b.iter().cloned());
                            next.push(v);
                        }
                    }
                    acc = next;
                }
                out.extend(acc);
            }
            PartitionSpec::Scaled { inner, factor } => {
                let inv = Scalar::one() / factor;
                let q: Vec<Interval> = query.iter().map(|i| i.scale(&inv)).collect();
                inner.meeting_into(&q, out);
            }
        }
    }

    /// A basis of the translation lattice carrying members to members.
    pub fn lattice_basis(&self) -> Vec<Point> {
        let d = self.dim();
        let rows: Vec<Vec<Scalar>> = match self {
            PartitionSpec::Grid { d } => (0..*d).map(|j| unit_vector(*d, j)).collect(),
            PartitionSpec::Layered { d, shifts } => (0..*d)
                .map(|j| {
                    let mut v = unit_vector(*d, j);
                    if j >= 1 {
                        for vi in &mut v[..j] {
                            *vi = shifts[j - 1].clone();
                        }
                    }
                    v
                })
                .collect(),
            PartitionSpec::Product { factors } => {
                let mut rows = Vec::with_capacity(d);
                let mut start = 0;
                for f in factors {
                    let k = f.dim();
                    for b in f.lattice_basis() {
                        let mut v = vec![Scalar::zero(); d];
                        v[start..start + k].clone_from_slice(b.coords());
                        rows.push(v);
                    }
                    start += k;
                }
                rows
            }
            PartitionSpec::Scaled { inner, factor } => {
                return inner.lattice_basis().iter().map(|b| b.scale(factor)).collect()
            }
        };
        rows.into_iter()
            .map(|r| Point::new(r).expect("dimension is positive"))
            .collect()
    }

    /// The box `Π[0, s_i)`; every point has exactly one lattice translate in it.
    pub fn fundamental_cell(&self) -> AxisBox {
        AxisBox::half_open(&Point::origin(self.dim()), &self.side_lengths())
    }
}

fn unit_vector(d: usize, j: usize) -> Vec<Scalar> {
    let mut v = vec![Scalar::zero(); d];
    v[j] = Scalar::one();
    v
}

/// Integers `n` with `[n, n+1)` meeting the interval.
fn unit_layers_meeting(q: &Interval) -> Vec<BigInt> {
    let mut out = Vec::new();
    if q.is_empty() {
        return out;
    }
    let mut n = q.lo.floor();
    let last = q.hi.floor();
    while n <= last {
        let slab = Interval::half_open(Scalar::from_integer(n.clone()), Scalar::from_integer(&n + 1));
        if slab.intersects(q) {
            out.push(n.clone());
        }
        n += 1;
    }
    out
}

fn layered_meeting(shifts: &[Scalar], query: Vec<Interval>, prefix: &mut Vec<BigInt>, out: &mut Vec<Vec<BigInt>>) {
    let j = query.len();
    if j == 0 {
        out.push(prefix.clone());
        return;
    }
    for n in unit_layers_meeting(&query[j - 1]) {
        let lower: Vec<Interval> = if j >= 2 {
            let t = -(Scalar::from_integer(n.clone()) * &shifts[j - 2]);
            query[..j - 1].iter().map(|i| i.translate(&t)).collect()
        } else {
            Vec::new()
        };
        prefix.push(n);
        layered_meeting(shifts, lower, prefix, out);
        prefix.pop();
    }
}

fn cartesian(per_axis: &[Vec<BigInt>], out: &mut Vec<Vec<BigInt>>) {
    let mut acc: Vec<Vec<BigInt>> = vec![Vec::new()];
    for axis in per_axis {
        let mut next = Vec::with_capacity(acc.len() * axis.len());
        for a in &acc {
            for n in axis {
                let mut v = a.clone();
                v.push(n.clone());
                next.push(v);
            }
        }
        acc = next;
    }
    out.extend(acc);
}

/// The degree/tolerance pair promised by gluing `⌈d/b⌉` blocks of the
/// `(b+1, 1/(2b))` layered partition, with `b = block_dim`.
pub fn glued_claim(block_dim: usize, d: usize) -> Result<SecludedClaim> {
    if block_dim == 0 {
        return Err(Error::InvalidArgument("block dimension must be at least 1".into()));
    }
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let blocks = d.div_ceil(block_dim) as u32;
    let k = num_traits::pow(BigUint::from(block_dim + 1), blocks as usize);
    SecludedClaim::new(k, Scalar::ratio(1, 2 * block_dim as i64))
}

/// Glued construction for dimension `d` with block dimension `f(d)`.
///
/// Uses `⌈d/b⌉` staggered layered blocks: full blocks of dimension `b`
/// followed by blocks of dimension `b − 1` so the dimensions sum to `d`.
/// When no such split exists (e.g. `d = 5`, `b = 4`) the last block is the
/// slice of the `b`-dimensional block through its first coordinates, which
/// keeps that block's shifts.
pub fn build_profile(f: impl Fn(usize) -> usize, d: usize) -> Result<(PartitionSpec, SecludedClaim)> {
    let b = f(d);
    let claim = glued_claim(b, d)?;
    let blocks = d.div_ceil(b);
    let short = blocks * b - d;
    let mut factors = Vec::with_capacity(blocks);
    if short == 0 {
        for _ in 0..blocks {
            factors.push(PartitionSpec::layered_staggered(b)?);
        }
    } else if short <= blocks && b >= 2 {
        for _ in 0..blocks - short {
            factors.push(PartitionSpec::layered_staggered(b)?);
        }
        for _ in 0..short {
            factors.push(PartitionSpec::layered_staggered(b - 1)?);
        }
    } else {
        for _ in 0..blocks - 1 {
            factors.push(PartitionSpec::layered_staggered(b)?);
        }
        let rest = d - (blocks - 1) * b;
        let full: Vec<Scalar> = (1..b).rev().map(|k| Scalar::ratio(k as i64, b as i64)).collect();
        factors.push(PartitionSpec::layered(rest, full[..rest - 1].to_vec())?);
    }
    let spec = if factors.len() == 1 {
        factors.pop().expect("one factor")
    } else {
        PartitionSpec::product(factors)?
    };
    debug_assert_eq!(spec.dim(), d);
    Ok((spec, claim))
}
