//! Block-matching motion estimation and compensation on level-1 subbands.
//!
//! Candidates are scored by the squared error summed over all four subbands
//! of a block, with the reference translated in-band by the candidate
//! displacement. The search shifts the whole reference once per candidate
//! and scores every block against that shifted copy.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::inband_shift::{apply_inband_shift, decompose_axis, DyadicShift, ShiftSpec};
use crate::wavelet::SubbandSet;
use crate::{Error, Result};

pub const DEFAULT_SEARCH_RANGE: u32 = 15;
pub const MAX_PRECISION: u32 = 3;

/// Displacement in `1 / 2^h` pixel units; `h` lives on the owning [`MotionField`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MotionVector {
    pub dx: i32,
    pub dy: i32,
}

impl MotionVector {
    pub const ZERO: MotionVector = MotionVector { dx: 0, dy: 0 };

    pub fn new(dx: i32, dy: i32) -> Self {
        Self { dx, dy }
    }

    /// Pixel displacement at precision `h`.
    pub fn to_pixels(self, h: u32) -> (f64, f64) {
        let unit = (1u32 << h) as f64;
        (self.dx as f64 / unit, self.dy as f64 / unit)
    }

    /// Whole subband samples, if the vector is a multiple of two pixels.
    pub fn subband_samples(self, h: u32) -> Option<(i32, i32)> {
        let step = 2i32 << h;
        (self.dx % step == 0 && self.dy % step == 0).then(|| (self.dx / step, self.dy / step))
    }

    pub fn to_spec(self, h: u32) -> ShiftSpec {
        let axis = |v: i32| {
            decompose_axis(DyadicShift::new(v as i64, h).canonical()).expect("canonical input")
        };
        ShiftSpec {
            x: axis(self.dx),
            y: axis(self.dy),
        }
    }

    fn l1(self) -> u32 {
        self.dx.unsigned_abs() + self.dy.unsigned_abs()
    }
}

/// Rectangle in subband-sample coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchParams {
    /// Half-width of the search window in pixels.
    pub search_range: u32,
    /// Subpixel precision `h`: 0 full-pel, 1 half-pel, 2 quarter-pel, 3 eighth-pel.
    pub precision: u32,
    /// Block edge in subband samples.
    pub block_size: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            search_range: DEFAULT_SEARCH_RANGE,
            precision: 2,
            block_size: 8,
        }
    }
}

impl SearchParams {
    pub fn validate(&self) -> Result<()> {
        if self.search_range < 1 {
            return Err(Error::InvalidParameter(
                "search range must be at least 1".into(),
            ));
        }
        if self.precision > MAX_PRECISION {
            return Err(Error::InvalidParameter(format!(
                "precision {} exceeds {MAX_PRECISION}",
                self.precision
            )));
        }
        if self.block_size == 0 {
            return Err(Error::InvalidParameter(
                "block size must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Candidate grid in raster order (dy outer, dx inner, both ascending).
    pub fn candidates(&self) -> Vec<MotionVector> {
        let r = (self.search_range << self.precision) as i32;
        (-r..=r)
            .flat_map(|dy| (-r..=r).map(move |dx| MotionVector::new(dx, dy)))
            .collect()
    }
}

/// One vector per block over a subband plane.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MotionField {
    pub block_size: usize,
    pub precision: u32,
    /// Subband plane dimensions the grid covers.
    pub band_dims: (usize, usize),
    pub vectors: Vec<MotionVector>,
}

impl MotionField {
    pub fn zeros(band_dims: (usize, usize), block_size: usize, precision: u32) -> Self {
        let (cols, rows) = grid_dims(band_dims, block_size);
        Self {
            block_size,
            precision,
            band_dims,
            vectors: vec![MotionVector::ZERO; cols * rows],
        }
    }

    pub fn grid_dims(&self) -> (usize, usize) {
        grid_dims(self.band_dims, self.block_size)
    }

    pub fn blocks(&self) -> Vec<Block> {
        blocks(self.band_dims, self.block_size)
    }

    pub fn get(&self, col: usize, row: usize) -> MotionVector {
        self.vectors[row * self.grid_dims().0 + col]
    }

    pub fn validate(&self) -> Result<()> {
        let (c, r) = self.grid_dims();
        if self.block_size == 0 || self.vectors.len() != c * r {
            return Err(Error::Dimension(format!(
                "{} vectors for a {c}x{r} block grid",
                self.vectors.len()
            )));
        }
        Ok(())
    }
}

/// Block grid size; edge blocks shrink to fit.
pub fn grid_dims(band_dims: (usize, usize), block_size: usize) -> (usize, usize) {
    (
        band_dims.0.div_ceil(block_size),
        band_dims.1.div_ceil(block_size),
    )
}

pub fn blocks(band_dims: (usize, usize), block_size: usize) -> Vec<Block> {
    let (cols, rows) = grid_dims(band_dims, block_size);
    let mut out = Vec::with_capacity(cols * rows);
    for r in 0..rows {
        for c in 0..cols {
            let (x, y) = (c * block_size, r * block_size);
            out.push(Block {
                x,
                y,
                width: block_size.min(band_dims.0 - x),
                height: block_size.min(band_dims.1 - y),
            });
        }
    }
    out
}

fn block_sse(a: &SubbandSet, b: &SubbandSet, blk: &Block) -> f64 {
    a.planes()
        .iter()
        .zip(b.planes())
        .map(|(p, q)| p.region_sse(q, blk.x, blk.y, blk.width, blk.height))
        .sum()
}

fn check_block(bands: &SubbandSet, blk: &Block) -> Result<()> {
    let (w, h) = bands.dims();
    if blk.width == 0 || blk.height == 0 || blk.x + blk.width > w || blk.y + blk.height > h {
        return Err(Error::Dimension(format!(
            "block {}x{} at ({}, {}) outside {w}x{h} subbands",
            blk.width, blk.height, blk.x, blk.y
        )));
    }
    Ok(())
}

/// Squared error over all four subbands of `block` between the target and
/// the reference shifted in-band by `candidate` (precision `h`).
pub fn block_cost(
    reference: &SubbandSet,
    target: &SubbandSet,
    block: &Block,
    candidate: MotionVector,
    h: u32,
) -> Result<f64> {
    reference.validate()?;
    target.validate()?;
    reference.approx.check_same_dims(&target.approx)?;
    check_block(target, block)?;
    let shifted = apply_inband_shift(reference, &candidate.to_spec(h))?;
    Ok(block_sse(&shifted, target, block))
}

/// Detailed result of a block-matching search.
#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub field: MotionField,
    /// Winning cost per block, raster order.
    pub costs: Vec<f64>,
    /// Candidates scored for every block.
    pub candidates_per_block: usize,
}

#[derive(Clone, Copy)]
struct Best {
    cost: f64,
    l1: u32,
    index: usize,
}

impl Best {
    const NONE: Best = Best {
        cost: f64::INFINITY,
        l1: u32::MAX,
        index: usize::MAX,
    };

    /// Lower cost, then smaller |dx|+|dy|, then earlier raster position.
    fn better_than(&self, other: &Best) -> bool {
        self.cost
            .total_cmp(&other.cost)
            .then(self.l1.cmp(&other.l1))
            .then(self.index.cmp(&other.index))
            .is_lt()
    }
}

/// Exhaustive search over `candidates`; `shift` produces the translated
/// reference for a candidate.
pub(crate) fn search_candidates<S>(
    reference: &SubbandSet,
    target: &SubbandSet,
    block_size: usize,
    precision: u32,
    candidates: &[MotionVector],
    shift: S,
) -> Result<SearchOutcome>
where
    S: Fn(&SubbandSet, MotionVector) -> Result<SubbandSet> + Sync,
{
    reference.validate()?;
    target.validate()?;
    reference.approx.check_same_dims(&target.approx)?;
    if block_size == 0 {
        return Err(Error::InvalidParameter(
            "block size must be positive".into(),
        ));
    }
    let dims = target.dims();
    if dims.0 == 0 || dims.1 == 0 {
        return Err(Error::Dimension("empty subband planes".into()));
    }
    let blks = blocks(dims, block_size);
    let nblocks = blks.len();

    let best = candidates
        .par_iter()
        .enumerate()
        .map(|(index, &mv)| -> Result<Vec<Best>> {
            let shifted = shift(reference, mv)?;
            Ok(blks
                .iter()
                .map(|b| Best {
                    cost: block_sse(&shifted, target, b),
                    l1: mv.l1(),
                    index,
                })
                .collect())
        })
        .try_fold(
            || vec![Best::NONE; nblocks],
            |mut acc, scored| {
                for (a, s) in acc.iter_mut().zip(scored?) {
                    if s.better_than(a) {
                        *a = s;
                    }
                }
                Ok::<_, Error>(acc)
            },
        )
        .try_reduce(
            || vec![Best::NONE; nblocks],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    if y.better_than(x) {
                        *x = y;
                    }
                }
                Ok(a)
            },
        )?;

    let vectors = best
        .iter()
        .map(|b| {
            candidates
                .get(b.index)
                .copied()
                .unwrap_or(MotionVector::ZERO)
        })
        .collect();
    Ok(SearchOutcome {
        field: MotionField {
            block_size,
            precision,
            band_dims: dims,
            vectors,
        },
        costs: best.iter().map(|b| b.cost).collect(),
        candidates_per_block: candidates.len(),
    })
}

/// Full search with scores and candidate counts.
pub fn full_search_detailed(
    reference: &SubbandSet,
    target: &SubbandSet,
    params: &SearchParams,
) -> Result<SearchOutcome> {
    params.validate()?;
    let h = params.precision;
    search_candidates(
        reference,
        target,
        params.block_size,
        h,
        &params.candidates(),
        |r, mv| apply_inband_shift(r, &mv.to_spec(h)),
    )
}

/// Unidirectional full search on the `1 / 2^h` grid within `±search_range` pixels.
pub fn full_search(
    reference: &SubbandSet,
    target: &SubbandSet,
    params: &SearchParams,
) -> Result<MotionField> {
    Ok(full_search_detailed(reference, target, params)?.field)
}

/// Assembles a prediction by copying each block from the reference shifted
/// by that block's vector.
pub fn compensate(reference: &SubbandSet, field: &MotionField) -> Result<SubbandSet> {
    reference.validate()?;
    field.validate()?;
    if reference.dims() != field.band_dims {
        return Err(Error::Dimension(format!(
            "motion field covers {:?}, subbands are {:?}",
            field.band_dims,
            reference.dims()
        )));
    }
    let blks = field.blocks();
    let mut by_vector: BTreeMap<MotionVector, Vec<usize>> = BTreeMap::new();
    for (i, v) in field.vectors.iter().enumerate() {
        by_vector.entry(*v).or_default().push(i);
    }
    let groups: Vec<(MotionVector, Vec<usize>)> = by_vector.into_iter().collect();
    let shifted: Vec<SubbandSet> = groups
        .par_iter()
        .map(|(v, _)| apply_inband_shift(reference, &v.to_spec(field.precision)))
        .collect::<Result<_>>()?;

    let (w, h) = reference.dims();
    let mut out = SubbandSet::zeros(w, h);
    for ((_, members), src) in groups.iter().zip(&shifted) {
        for &i in members {
            let b = blks[i];
            for (dst, s) in out.planes_mut().into_iter().zip(src.planes()) {
                dst.copy_region(s, b.x, b.y, b.width, b.height);
            }
        }
    }
    Ok(out)
}

/// Error frame: `target - predicted`.
pub fn residual(target: &SubbandSet, predicted: &SubbandSet) -> Result<SubbandSet> {
    target.linear_combination(1.0, predicted, -1.0)
}

/// Reconstruction: `predicted + residual`.
pub fn add_back(predicted: &SubbandSet, residual: &SubbandSet) -> Result<SubbandSet> {
    predicted.linear_combination(1.0, residual, 1.0)
}
