//! Members meeting an ℓ∞ ball, seclusion audits, and lower-bound witnesses.
//!
//! For a member `Π[a_i, a_i + s_i)` and a closed ball of radius `ε` around
//! `p`, the two meet iff `p_i ∈ [a_i − ε, a_i + s_i + ε)` for every `i`, so
//! the number of members met is a sum of box indicators in `p`. Such a sum
//! attains its maximum at a point whose coordinates are left endpoints
//! `a_i − ε` (or the left end of the search region). For open balls the
//! boxes are open and the maximum is attained in the interior of an
//! arrangement cell, so midpoints between consecutive endpoints suffice.
//!
//! Every spec here is invariant under a lattice of translations with
//! fundamental cell `Π[0, s_i)`, so searching that cell covers ℝ^d.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{lower_bound_k_measure, NormKind};
use crate::error::{Error, Result};
use crate::geometry::{AxisBox, BallKind, InfBall, Interval, Point};
use crate::partition::{MemberId, PartitionSpec};
use crate::scalar::Scalar;

/// Default cap on the number of candidate points the exact audit may span.
pub const DEFAULT_EXACT_LIMIT: u64 = 1 << 34;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeighborhoodReport {
    pub point: Point,
    pub radius: Scalar,
    pub ball_kind: BallKind,
    pub members: Vec<MemberId>,
    pub count: usize,
}

/// Members of `spec` meeting the ball of radius `eps` around `p`, sorted.
pub fn enumerate_neighborhood(
    spec: &PartitionSpec,
    p: &Point,
    eps: &Scalar,
    kind: BallKind,
) -> Result<NeighborhoodReport> {
    p.check_dim(spec.dim())?;
    let ball = InfBall::new(p.clone(), eps.clone(), kind)?;
    let members = spec.members_meeting(&ball.as_box())?;
    Ok(NeighborhoodReport {
        point: p.clone(),
        radius: eps.clone(),
        ball_kind: kind,
        count: members.len(),
        members,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Exact,
    Randomized,
}

impl std::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Strategy::Exact),
            "randomized" => Ok(Strategy::Randomized),
            other => Err(Error::InvalidArgument(format!(
                "strategy must be exact or randomized, got `{other}`"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditOptions {
    pub strategy: Strategy,
    pub ball: BallKind,
    /// Exact: the most candidate points the search may span.
    /// Randomized: the number of random starts.
    pub budget: u64,
    pub seed: u64,
}

impl AuditOptions {
    pub fn exact(ball: BallKind) -> Self {
        AuditOptions {
            strategy: Strategy::Exact,
            ball,
            budget: DEFAULT_EXACT_LIMIT,
            seed: 0,
        }
    }

    pub fn randomized(ball: BallKind, starts: u64, seed: u64) -> Self {
        AuditOptions {
            strategy: Strategy::Randomized,
            ball,
            budget: starts,
            seed,
        }
    }
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions::exact(BallKind::Closed)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditResult {
    pub epsilon: Scalar,
    pub ball: BallKind,
    pub max_count: usize,
    /// Lexicographically least maximizer among the candidates examined.
    pub witness: Point,
    pub witness_members: Vec<MemberId>,
    pub strategy: Strategy,
    pub candidates_examined: u64,
    /// False for randomized runs: `max_count` is then only a lower bound.
    pub exhaustive: bool,
    pub search_region: AxisBox,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Members and per-coordinate candidate values, rank-compressed so the
/// search runs on integers.
struct SearchSpace {
    /// `candidates[i]` sorted ascending.
    candidates: Vec<Vec<Scalar>>,
    /// `ranges[m][i]` = half-open range of candidate indices on axis `i`
    /// where member `m` is met.
    ranges: Vec<Vec<(usize, usize)>>,
}

impl SearchSpace {
    fn build(spec: &PartitionSpec, eps: &Scalar, ball: BallKind) -> Result<Self> {
        let d = spec.dim();
        let sides = spec.side_lengths();
        let region = AxisBox::from_intervals(sides.iter().map(|s| Interval::closed(-eps, s + eps)).collect())?;
        let ids = spec.members_meeting(&region)?;
        let corners = ids
            .iter()
            .map(|id| spec.corner_of(id))
            .collect::<Result<Vec<Point>>>()?;

        let mut candidates = Vec::with_capacity(d);
        for i in 0..d {
            let s = &sides[i];
            let axis = match ball {
                BallKind::Closed => {
                    let mut v: Vec<Scalar> = corners
                        .iter()
                        .map(|a| &a[i] - eps)
                        .filter(|x| x.is_positive() && x < s)
                        .collect();
                    v.push(Scalar::zero());
                    v.sort();
                    v.dedup();
                    v
                }
                BallKind::Open => {
                    let mut ends: Vec<Scalar> = corners
                        .iter()
                        .flat_map(|a| [&a[i] - eps, &a[i] + s + eps])
                        .filter(|x| x.is_positive() && x < s)
                        .collect();
                    ends.push(Scalar::zero());
                    ends.push(s.clone());
                    ends.sort();
                    ends.dedup();
                    let half = Scalar::ratio(1, 2);
                    ends.windows(2).map(|w| (&w[0] + &w[1]) * &half).collect()
                }
            };
            candidates.push(axis);
        }

        let mut ranges = Vec::with_capacity(corners.len());
        for a in &corners {
            let mut r = Vec::with_capacity(d);
            for i in 0..d {
                let lo = &a[i] - eps;
                let hi = &a[i] + &sides[i] + eps;
                let axis = &candidates[i];
                let (start, end) = match ball {
                    // [lo, hi)
                    BallKind::Closed => (axis.partition_point(|x| *x < lo), axis.partition_point(|x| *x < hi)),
                    // (lo, hi)
                    BallKind::Open => (axis.partition_point(|x| *x <= lo), axis.partition_point(|x| *x < hi)),
                };
                r.push((start, end.max(start)));
            }
            if r.iter().all(|(s, e)| s < e) {
                ranges.push(r);
            }
        }
        Ok(SearchSpace { candidates, ranges })
    }

    fn dim(&self) -> usize {
        self.candidates.len()
    }

    fn span(&self) -> f64 {
        self.candidates.iter().map(|c| c.len() as f64).product()
    }

    fn point(&self, idx: &[usize]) -> Point {
        Point::new(
            idx.iter()
                .enumerate()
                .map(|(i, &j)| self.candidates[i][j].clone())
                .collect(),
        )
        .expect("dimension is positive")
    }

    fn count(&self, idx: &[usize]) -> usize {
        self.ranges
            .iter()
            .filter(|r| r.iter().zip(idx).all(|(&(s, e), &j)| s <= j && j < e))
            .count()
    }
}

struct Best {
    count: usize,
    idx: Vec<usize>,
    leaves: u64,
}

/// Depth-first branch and bound. Candidates are visited in lexicographic
/// order and only strict improvements are kept, so the result is the
/// lexicographically least maximizer.
fn branch(space: &SearchSpace, axis: usize, active: &[usize], prefix: &mut Vec<usize>, best: &mut Best) {
    if !best.idx.is_empty() && active.len() <= best.count {
        return;
    }
    if axis == space.dim() {
        best.leaves += 1;
        best.count = active.len();
        best.idx = prefix.clone();
        return;
    }
    for j in 0..space.candidates[axis].len() {
        if !best.idx.is_empty() && active.len() <= best.count {
            return;
        }
        let next: Vec<usize> = active
            .iter()
            .copied()
            .filter(|&m| {
                let (s, e) = space.ranges[m][axis];
                s <= j && j < e
            })
            .collect();
        prefix.push(j);
        branch(space, axis + 1, &next, prefix, best);
        prefix.pop();
    }
}

fn exact_search(space: &SearchSpace) -> (usize, Vec<usize>, u64) {
    let all: Vec<usize> = (0..space.ranges.len()).collect();
    let first = space.candidates[0].len();
    let partials: Vec<Best> = (0..first)
        .into_par_iter()
        .map(|j| {
            let active: Vec<usize> = all
                .iter()
                .copied()
                .filter(|&m| {
                    let (s, e) = space.ranges[m][0];
                    s <= j && j < e
                })
                .collect();
            let mut best = Best {
                count: 0,
                idx: Vec::new(),
                leaves: 0,
            };
            let mut prefix = vec![j];
            branch(space, 1, &active, &mut prefix, &mut best);
            best
        })
        .collect();
    let leaves = partials.iter().map(|b| b.leaves).sum();
    let mut winner: Option<&Best> = None;
    for b in &partials {
        if b.idx.is_empty() {
            continue;
        }
        if winner.is_none_or(|w| b.count > w.count) {
            winner = Some(b);
        }
    }
    let w = winner.expect("at least one candidate per axis");
    (w.count, w.idx.clone(), leaves)
}

/// Coordinate-wise hill climb from a random start; returns the local
/// maximum and the number of points evaluated.
fn climb(space: &SearchSpace, rng: &mut ChaCha8Rng) -> (usize, Vec<usize>, u64) {
    let d = space.dim();
    let mut idx: Vec<usize> = space.candidates.iter().map(|c| rng.random_range(0..c.len())).collect();
    let mut count = space.count(&idx);
    let mut evals = 1u64;
    loop {
        let mut improved = false;
        for axis in 0..d {
            // members met on every other axis, bucketed by their range here
            let n = space.candidates[axis].len();
            let mut diff = vec![0i64; n + 1];
            for r in &space.ranges {
                let others = r
                    .iter()
                    .zip(&idx)
                    .enumerate()
                    .all(|(i, (&(s, e), &j))| i == axis || (s <= j && j < e));
                if others {
                    let (s, e) = r[axis];
                    diff[s] += 1;
                    diff[e] -= 1;
                }
            }
            let mut run = 0i64;
            let mut best = (count, idx[axis]);
            for (j, delta) in diff.iter().take(n).enumerate() {
                run += delta;
                let c = run as usize;
                if c > best.0 || (c == best.0 && j < best.1) {
                    best = (c, j);
                }
            }
            evals += n as u64;
            if best.0 > count {
                improved = true;
            }
            count = best.0;
            idx[axis] = best.1;
        }
        if !improved {
            return (count, idx, evals);
        }
    }
}

fn randomized_search(space: &SearchSpace, starts: u64, seed: u64) -> (usize, Vec<usize>, u64) {
    let results: Vec<(usize, Vec<usize>, u64)> = (0..starts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            climb(space, &mut rng)
        })
        .collect();
    let evals = results.iter().map(|r| r.2).sum();
    let (count, idx, _) = results
        .into_iter()
        .reduce(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
        .expect("at least one start");
    (count, idx, evals)
}

/// The largest number of members any ε-ball meets, with a witness centre.
///
/// The exact strategy is exhaustive over one fundamental cell and hence
/// over ℝ^d. It refuses (with [`Error::BudgetExhausted`]) when the candidate
/// grid spans more than `options.budget` points.
pub fn audit_seclusion(spec: &PartitionSpec, eps: &Scalar, options: &AuditOptions) -> Result<AuditResult> {
    if !eps.is_positive() {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {eps}")));
    }
    let space = SearchSpace::build(spec, eps, options.ball)?;
    let (count, idx, examined, exhaustive, seed) = match options.strategy {
        Strategy::Exact => {
            if space.span() > options.budget as f64 {
                return Err(Error::BudgetExhausted(format!(
                    "exact audit spans {:.3e} candidate points, limit {}",
                    space.span(),
                    options.budget
                )));
            }
            let (c, i, n) = exact_search(&space);
            (c, i, n, true, None)
        }
        Strategy::Randomized => {
            if options.budget == 0 {
                return Err(Error::InvalidArgument(
                    "randomized audit needs at least one start".into(),
                ));
            }
            let (c, i, n) = randomized_search(&space, options.budget, options.seed);
            (c, i, n, false, Some(options.seed))
        }
    };
    let witness = space.point(&idx);
    let report = enumerate_neighborhood(spec, &witness, eps, options.ball)?;
    if report.count != count {
        return Err(Error::TheoremViolation(format!(
            "audit counted {count} members at {witness} but enumeration finds {}",
            report.count
        )));
    }
    Ok(AuditResult {
        epsilon: eps.clone(),
        ball: options.ball,
        max_count: count,
        witness,
        witness_members: report.members,
        strategy: options.strategy,
        candidates_examined: examined,
        exhaustive,
        search_region: spec.fundamental_cell(),
        seed,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub point: Point,
    pub epsilon: Scalar,
    pub count: usize,
    /// `⌈(1 + ε·(2^d/M)^{1/d})^d⌉` for member measure `M`.
    pub bound: u64,
    pub members: Vec<MemberId>,
}

/// A point whose open ε-ball meets at least the guaranteed number of members.
///
/// Failing to find one is reported as [`Error::TheoremViolation`].
pub fn lower_bound_witness(spec: &PartitionSpec, eps: &Scalar) -> Result<WitnessReport> {
    let audit = audit_seclusion(spec, eps, &AuditOptions::exact(BallKind::Open))?;
    let bound = lower_bound_k_measure(spec.dim(), eps, &spec.member_volume(), NormKind::LInf)?;
    let bound: u64 = u64::try_from(&bound)
        .map_err(|_| Error::OutOfRegime(format!("guaranteed count {bound} does not fit in 64 bits")))?;
    if (audit.max_count as u64) < bound {
        return Err(Error::TheoremViolation(format!(
            "best open ball meets {} members, fewer than the guaranteed {bound}",
            audit.max_count
        )));
    }
    Ok(WitnessReport {
        point: audit.witness,
        epsilon: eps.clone(),
        count: audit.max_count,
        bound,
        members: audit.witness_members,
    })
}
