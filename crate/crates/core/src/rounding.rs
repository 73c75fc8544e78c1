//! Deterministic rounding schemes induced by partitions.
//!
//! A scheme maps `x` to the representative of the member of the scaled
//! partition containing `x`. The universal scheme uses the staggered
//! layered partition scaled by `2dε₀` with centre representatives: every
//! `x̂` within `ε₀` of `x` rounds to within `2dε₀` of `x`, and the rounded
//! values of all such `x̂` take at most `d + 1` distinct values.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::lower_bound_k_diameter;
use crate::error::{Error, Result};
use crate::geometry::{BallKind, InfBall, Point};
use crate::neighborhood::{audit_seclusion, AuditOptions};
use crate::partition::{MemberId, PartitionSpec};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representative {
    Corner,
    Center,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundingScheme {
    pub spec: PartitionSpec,
    pub scale: Scalar,
    pub representative: Representative,
}

impl RoundingScheme {
    pub fn new(spec: PartitionSpec, scale: Scalar, representative: Representative) -> Result<Self> {
        if !scale.is_positive() {
            return Err(Error::InvalidArgument(format!("scale must be positive, got {scale}")));
        }
        Ok(RoundingScheme {
            spec,
            scale,
            representative,
        })
    }

    /// Staggered layered partition of dimension `d` scaled by `2dε₀`,
    /// centre representatives.
    pub fn universal(d: usize, eps0: &Scalar) -> Result<Self> {
        if !eps0.is_positive() {
            return Err(Error::InvalidArgument(format!("ε₀ must be positive, got {eps0}")));
        }
        let scale = Scalar::from(2 * d as i64) * eps0;
        RoundingScheme::new(PartitionSpec::layered_staggered(d)?, scale, Representative::Center)
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn member_of(&self, x: &Point) -> Result<MemberId> {
        self.spec.member_of(&x.scale(&self.scale.recip()?))
    }

    pub fn representative_of(&self, id: &MemberId) -> Result<Point> {
        let p = match self.representative {
            Representative::Corner => self.spec.corner_of(id)?,
            Representative::Center => self.spec.center_of(id)?,
        };
        Ok(p.scale(&self.scale))
    }

    pub fn round(&self, x: &Point) -> Result<Point> {
        self.representative_of(&self.member_of(x)?)
    }

    /// ℓ∞ diameter of the scaled members.
    pub fn member_diameter(&self) -> Scalar {
        let side = self
            .spec
            .side_lengths()
            .into_iter()
            .max()
            .expect("dimension is positive");
        side * &self.scale
    }

    /// Largest possible distance from the rounded value of an
    /// `ε₀`-approximation of `x` to `x` itself.
    pub fn accuracy(&self, eps0: &Scalar) -> Scalar {
        let reach = match self.representative {
            Representative::Center => self.member_diameter() * Scalar::ratio(1, 2),
            Representative::Corner => self.member_diameter(),
        };
        reach + eps0
    }

    /// Distinct rounded values over the closed ball of radius `ε₀` at `x`.
    pub fn output_set(&self, x: &Point, eps0: &Scalar) -> Result<OutputSetReport> {
        x.check_dim(self.dim())?;
        let inv = self.scale.recip()?;
        let ball = InfBall::closed(x.scale(&inv), eps0 * &inv)?;
        let members = self.spec.members_meeting(&ball.as_box())?;
        let mut outputs = members
            .iter()
            .map(|m| self.representative_of(m))
            .collect::<Result<Vec<_>>>()?;
        outputs.sort();
        outputs.dedup();
        Ok(OutputSetReport {
            anchor: x.clone(),
            epsilon0: eps0.clone(),
            k_observed: outputs.len(),
            outputs,
            members,
        })
    }

    /// Largest output set over all `ε₀`-balls, by exact audit.
    pub fn degree(&self, eps0: &Scalar) -> Result<usize> {
        let r = eps0 / &self.scale;
        Ok(audit_seclusion(&self.spec, &r, &AuditOptions::exact(BallKind::Closed))?.max_count)
    }
}

/// The universal rounding of `x̂` for accuracy `ε₀`.
pub fn universal_round(d: usize, eps0: &Scalar, xhat: &Point) -> Result<Point> {
    xhat.check_dim(d)?;
    RoundingScheme::universal(d, eps0)?.round(xhat)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputSetReport {
    pub anchor: Point,
    pub epsilon0: Scalar,
    pub outputs: Vec<Point>,
    pub k_observed: usize,
    pub members: Vec<MemberId>,
}

/// Output set of the universal scheme at `x`.
pub fn output_set(d: usize, eps0: &Scalar, x: &Point) -> Result<OutputSetReport> {
    RoundingScheme::universal(d, eps0)?.output_set(x, eps0)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollapseStats {
    pub trials: u64,
    pub seed: u64,
    pub distinct: usize,
    /// Rounded outputs with their frequencies, most frequent first, ties
    /// broken by the output point.
    pub histogram: Vec<(Point, u64)>,
    /// Largest ℓ∞ distance from the target among the oracle's answers.
    pub max_oracle_error: Scalar,
}

impl CollapseStats {
    /// Fewest outputs whose combined frequency is at least `(1 − δ)·trials`.
    pub fn k_for_mass(&self, delta: &Scalar) -> usize {
        let need = (Scalar::one() - delta) * Scalar::from(self.trials as i64);
        let mut acc = Scalar::zero();
        for (i, (_, n)) in self.histogram.iter().enumerate() {
            if acc >= need {
                return i;
            }
            acc += &Scalar::from(*n as i64);
        }
        self.histogram.len()
    }
}

/// Round `trials` answers of a randomized oracle and tabulate the outputs.
///
/// Trial `i` draws from a ChaCha8 generator seeded with `seed` on stream
/// `i`, so the statistics do not depend on the thread count.
pub fn replicate_collapse<F>(
    scheme: &RoundingScheme,
    oracle: F,
    target: &Point,
    trials: u64,
    seed: u64,
) -> Result<CollapseStats>
where
    F: Fn(&mut ChaCha8Rng) -> Point + Sync,
{
    target.check_dim(scheme.dim())?;
    let rounded: Vec<(Point, Scalar)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let answer = oracle(&mut rng);
            let err = answer.dist_inf(target)?;
            Ok((scheme.round(&answer)?, err))
        })
        .collect::<Result<_>>()?;
    let mut counts: BTreeMap<Point, u64> = BTreeMap::new();
    let mut max_err = Scalar::zero();
    for (p, e) in rounded {
        *counts.entry(p).or_default() += 1;
        if e > max_err {
            max_err = e;
        }
    }
    let mut histogram: Vec<(Point, u64)> = counts.into_iter().collect();
    histogram.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(CollapseStats {
        trials,
        seed,
        distinct: histogram.len(),
        histogram,
        max_oracle_error: max_err,
    })
}

/// Oracle answering `x` plus independent uniform noise in `[−ε₀, ε₀]` per
/// coordinate, on a grid of `2^32 + 1` values.
pub fn uniform_noise_oracle(x: Point, eps0: Scalar) -> impl Fn(&mut ChaCha8Rng) -> Point + Sync {
    use rand::Rng;
    const STEPS: i64 = 1 << 32;
    move |rng: &mut ChaCha8Rng| {
        let coords = x
            .coords()
            .iter()
            .map(|c| {
                let u = rng.random_range(0..=STEPS);
                c + &(&eps0 * Scalar::ratio(2 * u - STEPS, STEPS))
            })
            .collect();
        Point::new(coords).expect("dimension is positive")
    }
}

/// Oracle answering a uniformly random element of `points`.
pub fn uniform_choice_oracle(points: Vec<Point>) -> impl Fn(&mut ChaCha8Rng) -> Point + Sync {
    use rand::Rng;
    assert!(!points.is_empty(), "no points to choose from");
    move |rng: &mut ChaCha8Rng| points[rng.random_range(0..points.len())].clone()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransversalReport {
    pub center: Point,
    /// `ε₀/2`.
    pub radius: Scalar,
    pub points: Vec<Point>,
    pub members: Vec<MemberId>,
    /// `⌈(1 + ε₀/(2ε))^d⌉` where `2ε` is the member diameter.
    #[serde(with = "crate::partition::biguint_text")]
    pub bound: BigUint,
}

/// A closed `ε₀/2`-ball meeting as many scaled members as possible, with
/// one point of the ball inside each of them.
///
/// A ball meeting fewer than `⌈(1 + ε₀/(2ε))^d⌉` members is reported as
/// [`Error::TheoremViolation`].
pub fn adversarial_transversal(scheme: &RoundingScheme, eps0: &Scalar) -> Result<TransversalReport> {
    if !eps0.is_positive() {
        return Err(Error::InvalidArgument(format!("ε₀ must be positive, got {eps0}")));
    }
    let inv = scheme.scale.recip()?;
    let radius = eps0 * Scalar::ratio(1, 2);
    let r = &radius * &inv;
    let audit = audit_seclusion(&scheme.spec, &r, &AuditOptions::exact(BallKind::Closed))?;
    let p = &audit.witness;
    let mut points = Vec::with_capacity(audit.witness_members.len());
    for id in &audit.witness_members {
        let corner = scheme.spec.corner_of(id)?;
        let inside: Vec<Scalar> = corner
            .coords()
            .iter()
            .zip(p.coords())
            .map(|(a, c)| a.max(&(c - &r)).clone())
            .collect();
        let q = Point::new(inside)?;
        debug_assert!(scheme.spec.contains(id, &q)?);
        points.push(q.scale(&scheme.scale));
    }
    let bound = lower_bound_k_diameter(scheme.dim(), &radius, &scheme.member_diameter())?;
    if BigUint::from(points.len()) < bound {
        return Err(Error::TheoremViolation(format!(
            "transversal has {} points, fewer than the guaranteed {bound}",
            points.len()
        )));
    }
    Ok(TransversalReport {
        center: p.scale(&scheme.scale),
        radius,
        points,
        members: audit.witness_members,
        bound,
    })
}
