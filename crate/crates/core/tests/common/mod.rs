//! Independent oracles and proptest strategies shared by the integration
//! tests. Nothing here calls into the partition algorithms being checked.

#![allow(dead_code)]

use num_bigint::BigInt;
use proptest::prelude::*;
use secluded::{BallKind, MemberId, PartitionSpec, Point, Scalar};

pub fn q(n: i64, d: i64) -> Scalar {
    Scalar::ratio(n, d)
}

pub fn scalar_in(lo: i64, hi: i64, den: i64) -> impl Strategy<Value = Scalar> {
    (1..=den).prop_flat_map(move |d| (lo * d..=hi * d).prop_map(move |n| Scalar::ratio(n, d)))
}

pub fn positive_scalar(max_num: i64, max_den: i64) -> impl Strategy<Value = Scalar> {
    (1..=max_num, 1..=max_den).prop_map(|(n, d)| Scalar::ratio(n, d))
}

pub fn point_in(d: usize, lo: i64, hi: i64, den: i64) -> impl Strategy<Value = Point> {
    proptest::collection::vec(scalar_in(lo, hi, den), d).prop_map(|c| Point::new(c).unwrap())
}

/// Layered spec with shifts drawn from `{0, 1/den, …, (den−1)/den}`.
pub fn layered_spec(d: usize, den: i64) -> impl Strategy<Value = PartitionSpec> {
    proptest::collection::vec(0..den, d - 1)
        .prop_map(move |s| PartitionSpec::layered(d, s.into_iter().map(|k| q(k, den)).collect()).unwrap())
}

/// Grid, layered or a product of both, of dimension 1..=3.
pub fn small_spec() -> impl Strategy<Value = PartitionSpec> {
    prop_oneof![
        (1usize..=3).prop_map(|d| PartitionSpec::grid(d).unwrap()),
        (2usize..=3).prop_flat_map(|d| layered_spec(d, 6)),
        layered_spec(2, 4).prop_map(|l| PartitionSpec::product(vec![l, PartitionSpec::grid(1).unwrap()]).unwrap()),
    ]
}

fn floor(x: &Scalar) -> i64 {
    i64::try_from(x.floor()).unwrap()
}

/// Member id and corner of the member containing `x`, straight from the
/// recursive definition: peel the top coordinate, shift the rest back.
pub fn oracle_member(spec: &PartitionSpec, x: &[Scalar]) -> (Vec<i64>, Vec<Scalar>) {
    match spec {
        PartitionSpec::Grid { .. } => {
            let id: Vec<i64> = x.iter().map(floor).collect();
            let corner = id.iter().map(|&n| Scalar::from(n)).collect();
            (id, corner)
        }
        PartitionSpec::Layered { d, shifts } => layered_member(&shifts[..d - 1], x),
        PartitionSpec::Product { factors } => {
            let mut id = Vec::new();
            let mut corner = Vec::new();
            let mut start = 0;
            for f in factors {
                let k = f.dim();
                let (i, c) = oracle_member(f, &x[start..start + k]);
                id.extend(i);
                corner.extend(c);
                start += k;
            }
            (id, corner)
        }
        PartitionSpec::Scaled { inner, factor } => {
            let y: Vec<Scalar> = x.iter().map(|v| v / factor).collect();
            let (id, c) = oracle_member(inner, &y);
            (id, c.iter().map(|v| v * factor).collect())
        }
    }
}

fn layered_member(shifts: &[Scalar], x: &[Scalar]) -> (Vec<i64>, Vec<Scalar>) {
    let d = x.len();
    if d == 1 {
        let n = floor(&x[0]);
        return (vec![n], vec![Scalar::from(n)]);
    }
    let n = floor(&x[d - 1]);
    let offset = Scalar::from(n) * &shifts[d - 2];
    let base: Vec<Scalar> = x[..d - 1].iter().map(|v| v - &offset).collect();
    let (bid, bcorner) = layered_member(&shifts[..d - 2], &base);
    let mut id = vec![n];
    id.extend(bid);
    let mut corner: Vec<Scalar> = bcorner.iter().map(|c| c + &offset).collect();
    corner.push(Scalar::from(n));
    (id, corner)
}

/// Corner of the member with the given id, by the same recursion.
pub fn oracle_corner(spec: &PartitionSpec, id: &[i64]) -> Vec<Scalar> {
    match spec {
        PartitionSpec::Grid { .. } => id.iter().map(|&n| Scalar::from(n)).collect(),
        PartitionSpec::Layered { shifts, .. } => layered_corner(shifts, id),
        PartitionSpec::Product { factors } => {
            let mut out = Vec::new();
            let mut start = 0;
            for f in factors {
                let k = f.dim();
                out.extend(oracle_corner(f, &id[start..start + k]));
                start += k;
            }
            out
        }
        PartitionSpec::Scaled { inner, factor } => oracle_corner(inner, id).iter().map(|v| v * factor).collect(),
    }
}

fn layered_corner(shifts: &[Scalar], id: &[i64]) -> Vec<Scalar> {
    let d = id.len();
    if d == 1 {
        return vec![Scalar::from(id[0])];
    }
    let n = id[0];
    let offset = Scalar::from(n) * &shifts[d - 2];
    let mut corner: Vec<Scalar> = layered_corner(&shifts[..d - 2], &id[1..])
        .iter()
        .map(|c| c + &offset)
        .collect();
    corner.push(Scalar::from(n));
    corner
}

/// Whether the unit-side box at `corner` meets the ball, coordinate by
/// coordinate on the open/closed interval endpoints.
pub fn oracle_meets(corner: &[Scalar], side: &Scalar, p: &[Scalar], eps: &Scalar, kind: BallKind) -> bool {
    if kind == BallKind::Open && eps.is_zero() {
        return false;
    }
    corner.iter().zip(p).all(|(a, x)| {
        let hi = a + side;
        let lo_ok = match kind {
            BallKind::Closed => a <= &(x + eps),
            BallKind::Open => a < &(x + eps),
        };
        lo_ok && hi > x - eps
    })
}

/// Members meeting the ball, found by scanning every id in `[-r, r]^d`.
pub fn brute_neighborhood(spec: &PartitionSpec, p: &Point, eps: &Scalar, kind: BallKind, r: i64) -> Vec<MemberId> {
    let d = spec.dim();
    let side = spec.side_lengths()[0].clone();
    let mut out = Vec::new();
    let mut id = vec![-r; d];
    loop {
        let corner = oracle_corner(spec, &id);
        if oracle_meets(&corner, &side, p.coords(), eps, kind) {
            out.push(MemberId::new(id.iter().map(|&n| BigInt::from(n)).collect()));
        }
        let mut j = 0;
        loop {
            if j == d {
                out.sort();
                return out;
            }
            id[j] += 1;
            if id[j] <= r {
                break;
            }
            id[j] = -r;
            j += 1;
        }
    }
}

/// `⌈(1 + 2ε)^d⌉` for a rational `ε`, via integer arithmetic.
pub fn ceil_power(base: &Scalar, d: u32) -> BigInt {
    base.powi(d).ceil()
}
