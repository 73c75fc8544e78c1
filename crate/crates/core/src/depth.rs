//! Depth of a finite family of axis-aligned boxes.
//!
//! The distinct endpoints of the container and the members cut every axis
//! into intervals; their products are the cells. Depth (the number of
//! members containing a point) is constant on the interior of each cell, so
//! the depth function, its integral and its maximum are all computed
//! exactly on the cell grid.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{AxisBox, Interval, Point};
use crate::scalar::Scalar;

/// Guard on the number of cells a decomposition may create.
pub const MAX_CELLS: u64 = 50_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxFamily {
    pub container: AxisBox,
    pub members: Vec<AxisBox>,
}

impl BoxFamily {
    pub fn new(container: AxisBox, members: Vec<AxisBox>) -> Result<Self> {
        if !container.volume().is_positive() {
            return Err(Error::InvalidBox("container must have positive volume".into()));
        }
        for (i, m) in members.iter().enumerate() {
            if !container.contains_box(m)? {
                return Err(Error::InvalidBox(format!("member {i} is not inside the container")));
            }
        }
        Ok(BoxFamily { container, members })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            container: AxisBox,
            #[serde(default)]
            members: Vec<AxisBox>,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| Error::InvalidBox(e.to_string()))?;
        BoxFamily::new(raw.container, raw.members)
    }

    pub fn dim(&self) -> usize {
        self.container.dim()
    }

    pub fn sum_of_volumes(&self) -> Scalar {
        self.members.iter().map(AxisBox::volume).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthCell {
    pub cell: AxisBox,
    pub depth: usize,
}

/// Depths on the refined grid. Axis `i` with breakpoints `b_0 < … < b_n` is
/// refined into `2n + 1` pieces: even index `2j` is the point `b_j`, odd
/// index `2j + 1` the open gap `(b_j, b_{j+1})`. Depth is constant on every
/// product of pieces. Stored row-major, last axis fastest.
struct Grid {
    breaks: Vec<Vec<Scalar>>,
    depth: Vec<usize>,
}

impl Grid {
    fn build(fam: &BoxFamily) -> Result<Grid> {
        let d = fam.dim();
        let mut breaks = Vec::with_capacity(d);
        for i in 0..d {
            let side = fam.container.side(i);
            let mut b = vec![side.lo.clone(), side.hi.clone()];
            for m in &fam.members {
                b.push(m.side(i).lo.clone());
                b.push(m.side(i).hi.clone());
            }
            b.sort();
            b.dedup();
            breaks.push(b);
        }
        let shape: Vec<usize> = breaks.iter().map(|b| 2 * b.len() - 1).collect();
        let total: f64 = shape.iter().map(|&n| n as f64).product();
        if total > MAX_CELLS as f64 {
            return Err(Error::InvalidArgument(format!(
                "decomposition would create {total:.0} cells (limit {MAX_CELLS})"
            )));
        }

        // difference array over one extra slot per axis
        let ext: Vec<usize> = shape.iter().map(|n| n + 1).collect();
        let mut diff = vec![0i64; ext.iter().product()];
        for m in &fam.members {
            let mut lo = Vec::with_capacity(d);
            let mut hi = Vec::with_capacity(d);
            for (i, br) in breaks.iter().enumerate() {
                let s = m.side(i);
                let a = br.binary_search(&s.lo).expect("member ends are breakpoints");
                let b = br.binary_search(&s.hi).expect("member ends are breakpoints");
                // pieces covered by the side, as a half-open refined range
                lo.push(if s.lo_closed { 2 * a } else { 2 * a + 1 });
                hi.push(if s.hi_closed { 2 * b + 1 } else { 2 * b });
            }
            if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
                continue;
            }
            for mask in 0u32..(1 << d) {
                let mut flat = 0;
                let mut sign = 1i64;
                for i in 0..d {
                    let coord = if mask & (1 << i) != 0 {
                        sign = -sign;
                        hi[i]
                    } else {
                        lo[i]
                    };
                    flat = flat * ext[i] + coord;
                }
                diff[flat] += sign;
            }
        }
        // prefix sums along each axis
        let mut stride = 1;
        for i in (0..d).rev() {
            let n = ext[i];
            for flat in 0..diff.len() {
                if (flat / stride) % n != 0 {
                    diff[flat] += diff[flat - stride];
                }
            }
            stride *= n;
        }
        let mut depth = Vec::with_capacity(shape.iter().product());
        let mut idx = vec![0usize; d];
        loop {
            let mut flat = 0;
            for i in 0..d {
                flat = flat * ext[i] + idx[i];
            }
            depth.push(usize::try_from(diff[flat]).expect("depth is nonnegative"));
            if !advance(&mut idx, &shape) {
                break;
            }
        }
        Ok(Grid { breaks, depth })
    }

    fn shape(&self) -> Vec<usize> {
        self.breaks.iter().map(|b| 2 * b.len() - 1).collect()
    }

    /// Visit every refined piece product with its depth, in row-major order.
    fn for_each(&self, mut f: impl FnMut(&[usize], usize)) {
        let shape = self.shape();
        let mut idx = vec![0usize; shape.len()];
        for &depth in &self.depth {
            f(&idx, depth);
            advance(&mut idx, &shape);
        }
    }

    /// The full-dimensional cell whose interior is the product of the gaps
    /// `idx` (all odd), closed at its low ends so the cells tile the container.
    fn cell(&self, container: &AxisBox, idx: &[usize]) -> AxisBox {
        let sides = idx
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let j = r / 2;
                let b = &self.breaks[i];
                let c = container.side(i);
                let lo_closed = if j == 0 { c.lo_closed } else { true };
                let hi_closed = if j + 2 == b.len() { c.hi_closed } else { false };
                Interval::new(b[j].clone(), b[j + 1].clone(), lo_closed, hi_closed)
            })
            .collect();
        AxisBox::from_intervals(sides).expect("dimension is positive")
    }

    /// A point of the piece: the breakpoint itself or the gap's midpoint.
    fn point(&self, idx: &[usize]) -> Result<Point> {
        let half = Scalar::ratio(1, 2);
        Point::new(
            idx.iter()
                .enumerate()
                .map(|(i, &r)| {
                    let b = &self.breaks[i];
                    if r % 2 == 0 {
                        b[r / 2].clone()
                    } else {
                        (&b[r / 2] + &b[r / 2 + 1]) * &half
                    }
                })
                .collect(),
        )
    }
}

/// Advance a row-major multi-index; false after the last one.
fn advance(idx: &mut [usize], shape: &[usize]) -> bool {
    for i in (0..idx.len()).rev() {
        idx[i] += 1;
        if idx[i] < shape[i] {
            return true;
        }
        idx[i] = 0;
    }
    false
}

/// Cells tiling the container, in lexicographic order of their low corners,
/// each with the depth on its interior. Points on cell boundaries may have
/// larger depth; they carry no volume.
pub fn depth_decomposition(fam: &BoxFamily) -> Result<Vec<DepthCell>> {
    let grid = Grid::build(fam)?;
    let mut out = Vec::new();
    grid.for_each(|idx, depth| {
        if idx.iter().all(|r| r % 2 == 1) {
            out.push(DepthCell {
                cell: grid.cell(&fam.container, idx),
                depth,
            });
        }
    });
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiplicityCheck {
    pub sum_of_volumes: Scalar,
    pub depth_integral: Scalar,
    pub equal: bool,
}

/// `Σ vol(A)` against `∫ depth`, both exact.
pub fn multiplicity_identity_check(fam: &BoxFamily) -> Result<MultiplicityCheck> {
    let grid = Grid::build(fam)?;
    let mut integral = Scalar::zero();
    grid.for_each(|idx, depth| {
        if depth > 0 && idx.iter().all(|r| r % 2 == 1) {
            let vol: Scalar = idx
                .iter()
                .enumerate()
                .map(|(i, &r)| &grid.breaks[i][r / 2 + 1] - &grid.breaks[i][r / 2])
                .product();
            integral += &(vol * Scalar::from(depth as i64));
        }
    });
    let sum = fam.sum_of_volumes();
    Ok(MultiplicityCheck {
        equal: sum == integral,
        sum_of_volumes: sum,
        depth_integral: integral,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PigeonholeWitness {
    pub point: Point,
    pub depth: usize,
    /// `⌈Σ vol(A) / vol(S)⌉`.
    #[serde(with = "crate::partition::biguint_text")]
    pub guarantee: BigUint,
}

/// A point of the container of maximum depth. Ties go to pieces of
/// higher dimension (so interior points win over boundary points), then to
/// the lexicographically first.
///
/// A depth below `⌈Σ vol / vol(S)⌉` is reported as [`Error::TheoremViolation`].
pub fn pigeonhole_witness(fam: &BoxFamily) -> Result<PigeonholeWitness> {
    let grid = Grid::build(fam)?;
    let shape = grid.shape();
    let mut best: Option<(usize, usize, Vec<usize>)> = None;
    grid.for_each(|idx, depth| {
        let inside = idx.iter().enumerate().all(|(i, &r)| {
            let side = fam.container.side(i);
            (r != 0 || side.lo_closed) && (r + 1 != shape[i] || side.hi_closed)
        });
        if !inside {
            return;
        }
        let dim = idx.iter().filter(|r| *r % 2 == 1).count();
        if best.as_ref().is_none_or(|(bd, bdim, _)| (depth, dim) > (*bd, *bdim)) {
            best = Some((depth, dim, idx.to_vec()));
        }
    });
    let (depth, _, idx) = best.expect("a container of positive volume has interior pieces");
    let point = grid.point(&idx)?;
    let ratio = fam.sum_of_volumes() / fam.container.volume();
    let guarantee = ratio.ceil().to_biguint().expect("volumes are nonnegative");
    if BigUint::from(depth) < guarantee {
        return Err(Error::TheoremViolation(format!(
            "maximum depth {depth} is below the pigeonhole guarantee {guarantee}"
        )));
    }
    Ok(PigeonholeWitness {
        point,
        depth,
        guarantee,
    })
}

/// The family `(0, 1/i)` for `i = 1..=n` inside `(0, 1)`.
pub fn harmonic_family(n: usize) -> BoxFamily {
    let open = |hi: Scalar| AxisBox::from_intervals(vec![Interval::open(Scalar::zero(), hi)]).expect("one side");
    BoxFamily::new(
        open(Scalar::one()),
        (1..=n).map(|i| open(Scalar::ratio(1, i as i64))).collect(),
    )
    .expect("members lie in the container")
}
