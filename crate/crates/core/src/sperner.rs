//! Neighborhood Sperner checks on piecewise-constant grid colorings of
//! the unit cube.
//!
//! Axis `i` is cut into `r_i` cells `[j/r_i, (j+1)/r_i)`, the last one
//! closed at 1. A color touches the face `x_i = 0` iff it colors a cell
//! with index 0 on axis `i`, and the face `x_i = 1` iff it colors a cell
//! with the top index.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scalar::Scalar;

/// Guard on the number of cells in one coloring.
pub const MAX_CELLS: usize = 1 << 26;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawColoring", into = "RawColoring")]
pub struct GridColoring {
    d: usize,
    resolution: Vec<usize>,
    cells: Vec<u32>,
    palette: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawColoring {
    d: usize,
    resolution: Vec<usize>,
    cells: Vec<u32>,
    #[serde(default)]
    palette: Option<Vec<u32>>,
}

impl TryFrom<RawColoring> for GridColoring {
    type Error = Error;
    fn try_from(r: RawColoring) -> Result<Self> {
        GridColoring::new(r.d, r.resolution, r.cells, r.palette)
    }
}

impl From<GridColoring> for RawColoring {
    fn from(c: GridColoring) -> Self {
        RawColoring {
            d: c.d,
            resolution: c.resolution,
            cells: c.cells,
            palette: Some(c.palette),
        }
    }
}

impl GridColoring {
    /// `cells` is row-major with the last axis fastest. Without a palette
    /// the set of colors used is taken; with one, it must equal that set.
    pub fn new(d: usize, resolution: Vec<usize>, cells: Vec<u32>, palette: Option<Vec<u32>>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidColoring("dimension must be at least 1".into()));
        }
        if resolution.len() != d {
            return Err(Error::InvalidColoring(format!(
                "resolution has {} entries for dimension {d}",
                resolution.len()
            )));
        }
        if resolution.contains(&0) {
            return Err(Error::InvalidColoring("resolution entries must be positive".into()));
        }
        let total = resolution
            .iter()
            .try_fold(1usize, |acc, &r| acc.checked_mul(r))
            .filter(|&n| n <= MAX_CELLS)
            .ok_or_else(|| Error::InvalidColoring(format!("more than {MAX_CELLS} cells")))?;
        if cells.len() != total {
            return Err(Error::InvalidColoring(format!(
                "expected {total} cells, got {}",
                cells.len()
            )));
        }
        let used: Vec<u32> = cells.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        if let Some(p) = palette {
            let given: Vec<u32> = p.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
            if given.len() != p.len() {
                return Err(Error::InvalidColoring("palette lists a color twice".into()));
            }
            if given != used {
                return Err(Error::InvalidColoring(
                    "palette differs from the set of colors used".into(),
                ));
            }
        }
        Ok(GridColoring {
            d,
            resolution,
            cells,
            palette: used,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidColoring(e.to_string()))
    }

    /// The `2^d` orthant coloring at resolution 2: cell `(j_1..j_d)` gets
    /// color `Σ j_i·2^(d−i)`.
    pub fn orthants(d: usize) -> Result<Self> {
        if d == 0 || d > 20 {
            return Err(Error::InvalidColoring(format!(
                "orthant coloring needs 1 ≤ d ≤ 20, got {d}"
            )));
        }
        let cells = (0..1u32 << d).collect();
        GridColoring::new(d, vec![2; d], cells, None)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn cells(&self) -> &[u32] {
        &self.cells
    }

    pub fn palette(&self) -> &[u32] {
        &self.palette
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.d];
        for i in (0..self.d.saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.resolution[i + 1];
        }
        s
    }

    /// Color of the cell containing `p ∈ [0,1]^d`.
    pub fn color_at(&self, p: &Point) -> Result<u32> {
        p.check_dim(self.d)?;
        let strides = self.strides();
        let mut flat = 0;
        for i in 0..self.d {
            let x = &p[i];
            if x.is_negative() || *x > Scalar::one() {
                return Err(Error::InvalidArgument(format!("point {p} is outside the unit cube")));
            }
            let r = self.resolution[i];
            let j = (x * Scalar::from(r as i64)).floor();
            let j = usize::try_from(j).unwrap_or(r).min(r - 1);
            flat += j * strides[i];
        }
        Ok(self.cells[flat])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceViolation {
    pub color: u32,
    pub axis: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceReport {
    pub valid: bool,
    /// Every (color, axis) pair whose color touches both faces of the axis,
    /// ordered by color then axis.
    pub violations: Vec<FaceViolation>,
}

pub fn validate_no_opposite_faces(c: &GridColoring) -> FaceReport {
    let strides = c.strides();
    let mut low: BTreeSet<(u32, usize)> = BTreeSet::new();
    let mut high: BTreeSet<(u32, usize)> = BTreeSet::new();
    for (flat, &color) in c.cells.iter().enumerate() {
        for (i, (&stride, &res)) in strides.iter().zip(&c.resolution).enumerate() {
            let j = (flat / stride) % res;
            if j == 0 {
                low.insert((color, i));
            }
            if j + 1 == res {
                high.insert((color, i));
            }
        }
    }
    let violations: Vec<FaceViolation> = low
        .intersection(&high)
        .map(|&(color, axis)| FaceViolation { color, axis })
        .collect();
    FaceReport {
        valid: violations.is_empty(),
        violations,
    }
}

/// Index range of cells on one axis meeting the open interval `(p−ε, p+ε)`.
fn axis_range(r: usize, p: &Scalar, eps: &Scalar) -> (usize, usize) {
    let rs = Scalar::from(r as i64);
    // cell j meets (a, b) iff j/r < b and (j+1)/r > a
    let lo = ((p - eps) * &rs).floor();
    let hi = ((p + eps) * &rs).ceil();
    let lo = usize::try_from(lo.max(0.into())).unwrap_or(r);
    let hi = usize::try_from(hi.max(0.into())).unwrap_or(usize::MAX).min(r);
    (lo.min(r), hi)
}

fn check_radius(eps: &Scalar) -> Result<()> {
    if !eps.is_positive() || *eps > Scalar::ratio(1, 2) {
        return Err(Error::InvalidArgument(format!("ε must lie in (0, 1/2], got {eps}")));
    }
    Ok(())
}

fn colors_in_block(c: &GridColoring, strides: &[usize], ranges: &[(usize, usize)]) -> BTreeSet<u32> {
    let mut seen = BTreeSet::new();
    if ranges.iter().any(|(a, b)| a >= b) {
        return seen;
    }
    let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
    loop {
        let flat: usize = idx.iter().zip(strides).map(|(j, s)| j * s).sum();
        seen.insert(c.cells[flat]);
        if seen.len() == c.palette.len() {
            return seen;
        }
        let mut axis = idx.len();
        loop {
            if axis == 0 {
                return seen;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < ranges[axis].1 {
                break;
            }
            idx[axis] = ranges[axis].0;
        }
    }
}

fn colors_near(c: &GridColoring, p: &Point, eps: &Scalar) -> Result<BTreeSet<u32>> {
    p.check_dim(c.d)?;
    if p.coords().iter().any(|x| x.is_negative() || *x > Scalar::one()) {
        return Err(Error::InvalidArgument(format!("point {p} is outside the unit cube")));
    }
    let ranges: Vec<(usize, usize)> = (0..c.d).map(|i| axis_range(c.resolution[i], &p[i], eps)).collect();
    Ok(colors_in_block(c, &c.strides(), &ranges))
}

/// Number of colors present in the open ℓ∞ ε-ball around `p ∈ [0,1]^d`.
pub fn color_count(c: &GridColoring, p: &Point, eps: &Scalar) -> Result<usize> {
    if eps.is_negative() {
        return Err(Error::InvalidArgument(format!("negative radius {eps}")));
    }
    Ok(colors_near(c, p, eps)?.len())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RichPointReport {
    pub point: Point,
    pub epsilon: Scalar,
    pub colors_found: Vec<u32>,
    pub count: usize,
    /// `⌈(1 + 2ε/3)^d⌉`.
    #[serde(with = "crate::partition::biguint_text")]
    pub bound: BigUint,
    pub candidates_examined: u64,
}

pub fn sperner_bound(d: usize, eps: &Scalar) -> BigUint {
    let base = Scalar::one() + Scalar::ratio(2, 3) * eps;
    base.powi(d as u32).ceil().to_biguint().expect("positive")
}

/// Per-axis candidate centres: midpoints between consecutive values of
/// `{j/r ± ε} ∪ {0, 1}` inside `[0, 1]`. The set of cells seen by an open
/// ball only grows when its centre moves off a breakpoint into an adjacent
/// open interval, so these candidates reach the maximum.
fn axis_candidates(r: usize, eps: &Scalar) -> Vec<Scalar> {
    let one = Scalar::one();
    let mut ends = vec![Scalar::zero(), one.clone()];
    for j in 0..=r {
        let x = Scalar::ratio(j as i64, r as i64);
        for y in [&x - eps, &x + eps] {
            if !y.is_negative() && y <= one {
                ends.push(y);
            }
        }
    }
    ends.sort();
    ends.dedup();
    let half = Scalar::ratio(1, 2);
    ends.windows(2).map(|w| (&w[0] + &w[1]) * &half).collect()
}

/// A centre whose open ε-ball sees the most colors, lexicographically least
/// among the candidates.
///
/// Requires a valid coloring; reports [`Error::OppositeFaces`] for the
/// first violation otherwise. A valid coloring whose best count is below
/// the bound is reported as [`Error::TheoremViolation`].
pub fn find_rich_point(c: &GridColoring, eps: &Scalar) -> Result<RichPointReport> {
    check_radius(eps)?;
    let faces = validate_no_opposite_faces(c);
    if let Some(v) = faces.violations.first() {
        return Err(Error::OppositeFaces {
            color: v.color,
            axis: v.axis,
        });
    }
    let candidates: Vec<Vec<Scalar>> = c.resolution.iter().map(|&r| axis_candidates(r, eps)).collect();
    let ranges: Vec<Vec<(usize, usize)>> = candidates
        .iter()
        .zip(&c.resolution)
        .map(|(axis, &r)| axis.iter().map(|x| axis_range(r, x, eps)).collect())
        .collect();
    let strides = c.strides();
    let total: usize = candidates.iter().map(Vec::len).product();
    let shape: Vec<usize> = candidates.iter().map(Vec::len).collect();
    let unflatten = |mut flat: usize| -> Vec<usize> {
        let mut idx = vec![0; shape.len()];
        for i in (0..shape.len()).rev() {
            idx[i] = flat % shape[i];
            flat /= shape[i];
        }
        idx
    };
    let (best_count, best_flat) = (0..total)
        .into_par_iter()
        .map(|flat| {
            let idx = unflatten(flat);
            let r: Vec<(usize, usize)> = idx.iter().enumerate().map(|(i, &j)| ranges[i][j]).collect();
            (colors_in_block(c, &strides, &r).len(), flat)
        })
        .reduce(
            || (0, usize::MAX),
            |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        );
    let idx = unflatten(best_flat);
    let point = Point::new(idx.iter().enumerate().map(|(i, &j)| candidates[i][j].clone()).collect())?;
    let colors: Vec<u32> = colors_near(c, &point, eps)?.into_iter().collect();
    debug_assert_eq!(colors.len(), best_count);
    let bound = sperner_bound(c.d, eps);
    if BigUint::from(colors.len()) < bound {
        return Err(Error::TheoremViolation(format!(
            "best ball sees {} colors, fewer than the guaranteed {bound}",
            colors.len()
        )));
    }
    Ok(RichPointReport {
        point,
        epsilon: eps.clone(),
        count: colors.len(),
        colors_found: colors,
        bound,
        candidates_examined: total as u64,
    })
}

/// A random coloring with no color on opposite faces.
///
/// Each of the `2^d` orthant colors is assigned one face per axis (low or
/// high) and may only appear on that face; `extra` further colors get random
/// face assignments. Every cell draws uniformly among the colors allowed
/// there. Needs every resolution at least 2.
pub fn random_valid_coloring(d: usize, resolution: &[usize], extra: usize, rng: &mut impl Rng) -> Result<GridColoring> {
    if d == 0 || d > 16 || resolution.len() != d || resolution.iter().any(|&r| r < 2) {
        return Err(Error::InvalidArgument(
            "random colorings need 1 ≤ d ≤ 16 and every resolution at least 2".into(),
        ));
    }
    // bit i set = the color lives on the high face of axis i
    let mut faces: Vec<u32> = (0..1u32 << d).collect();
    for _ in 0..extra {
        faces.push(rng.random_range(0..1u32 << d));
    }
    let total: usize = resolution.iter().product();
    if total > MAX_CELLS {
        return Err(Error::InvalidArgument(format!("more than {MAX_CELLS} cells")));
    }
    let mut strides = vec![1; d];
    for i in (0..d - 1).rev() {
        strides[i] = strides[i + 1] * resolution[i + 1];
    }
    let mut cells = Vec::with_capacity(total);
    let mut allowed = Vec::with_capacity(faces.len());
    for flat in 0..total {
        allowed.clear();
        for (color, &f) in faces.iter().enumerate() {
            let ok = (0..d).all(|i| {
                let j = (flat / strides[i]) % resolution[i];
                let high = f & (1 << i) != 0;
                !(j == 0 && high) && !(j + 1 == resolution[i] && !high)
            });
            if ok {
                allowed.push(color as u32);
            }
        }
        cells.push(allowed[rng.random_range(0..allowed.len())]);
    }
    GridColoring::new(d, resolution.to_vec(), cells, None)
}
