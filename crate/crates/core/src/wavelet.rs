//! Orthonormal 2-D Haar analysis and synthesis.
//!
//! One analysis level maps each 2×2 block `p00 p01 / p10 p11` to
//!
//! ```text
//! A = (p00 + p01 + p10 + p11) / 2
//! a = (p00 - p01 + p10 - p11) / 2   horizontal detail (column difference)
//! b = (p00 + p01 - p10 - p11) / 2   vertical detail (row difference)
//! c = (p00 - p01 - p10 + p11) / 2   diagonal detail
//! ```
//!
//! The transform is orthonormal, so coefficient energy equals pixel energy.

use crate::{Error, Frame, Plane, Result};

/// The four level-1 (or level-k) coefficient planes of one decomposition level.
#[derive(Clone, Debug, PartialEq)]
pub struct SubbandSet {
    /// Approximation `A`.
    pub approx: Plane,
    /// Horizontal detail `a`.
    pub horizontal: Plane,
    /// Vertical detail `b`.
    pub vertical: Plane,
    /// Diagonal detail `c`.
    pub diagonal: Plane,
}

impl SubbandSet {
    pub fn new(approx: Plane, horizontal: Plane, vertical: Plane, diagonal: Plane) -> Result<Self> {
        let set = Self {
            approx,
            horizontal,
            vertical,
            diagonal,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            approx: Plane::zeros(width, height),
            horizontal: Plane::zeros(width, height),
            vertical: Plane::zeros(width, height),
            diagonal: Plane::zeros(width, height),
        }
    }

    /// Checks that all four planes share the approximation's dimensions.
    pub fn validate(&self) -> Result<()> {
        for p in [&self.horizontal, &self.vertical, &self.diagonal] {
            self.approx.check_same_dims(p)?;
        }
        Ok(())
    }

    /// Dimensions of each plane, `(width, height)`.
    pub fn dims(&self) -> (usize, usize) {
        self.approx.dims()
    }

    pub fn planes(&self) -> [&Plane; 4] {
        [
            &self.approx,
            &self.horizontal,
            &self.vertical,
            &self.diagonal,
        ]
    }

    pub fn planes_mut(&mut self) -> [&mut Plane; 4] {
        [
            &mut self.approx,
            &mut self.horizontal,
            &mut self.vertical,
            &mut self.diagonal,
        ]
    }

    pub fn energy(&self) -> f64 {
        self.planes().iter().map(|p| p.energy()).sum()
    }

    pub fn max_abs_diff(&self, other: &SubbandSet) -> f64 {
        self.planes()
            .iter()
            .zip(other.planes())
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    pub fn sse(&self, other: &SubbandSet) -> f64 {
        self.planes()
            .iter()
            .zip(other.planes())
            .map(|(a, b)| a.sse(b))
            .sum()
    }

    /// Rotates all four planes by `(dx, dy)` samples.
    pub fn roll(&self, dx: isize, dy: isize) -> SubbandSet {
        SubbandSet {
            approx: self.approx.roll(dx, dy),
            horizontal: self.horizontal.roll(dx, dy),
            vertical: self.vertical.roll(dx, dy),
            diagonal: self.diagonal.roll(dx, dy),
        }
    }

    /// `alpha * self + beta * other`, planewise.
    pub fn linear_combination(
        &self,
        alpha: f64,
        other: &SubbandSet,
        beta: f64,
    ) -> Result<SubbandSet> {
        let f = |p: &Plane, q: &Plane| p.zip_with(q, |x, y| alpha * x + beta * y);
        Ok(SubbandSet {
            approx: f(&self.approx, &other.approx)?,
            horizontal: f(&self.horizontal, &other.horizontal)?,
            vertical: f(&self.vertical, &other.vertical)?,
            diagonal: f(&self.diagonal, &other.diagonal)?,
        })
    }
}

/// Detail planes of one pyramid level.
#[derive(Clone, Debug, PartialEq)]
pub struct DetailLevel {
    pub horizontal: Plane,
    pub vertical: Plane,
    pub diagonal: Plane,
}

/// Multi-level Haar decomposition.
///
/// `details[0]` holds the level-1 details of the (padded) frame. Each
/// following entry has half the dimensions of the previous one. `approx` is
/// the coarsest approximation.
#[derive(Clone, Debug, PartialEq)]
pub struct Pyramid {
    pub details: Vec<DetailLevel>,
    pub approx: Plane,
    /// Frame size before padding; synthesis crops back to it.
    pub original_dims: (usize, usize),
}

impl Pyramid {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    /// Dimensions of the transformed (padded) frame.
    pub fn padded_dims(&self) -> (usize, usize) {
        let (w, h) = self.approx.dims();
        (w << self.levels(), h << self.levels())
    }

    /// Every coefficient plane, finest details first and the approximation last.
    pub fn planes(&self) -> Vec<&Plane> {
        let mut out: Vec<&Plane> = Vec::with_capacity(3 * self.levels() + 1);
        for d in &self.details {
            out.extend([&d.horizontal, &d.vertical, &d.diagonal]);
        }
        out.push(&self.approx);
        out
    }

    pub fn energy(&self) -> f64 {
        self.planes().iter().map(|p| p.energy()).sum()
    }

    /// Subbands of `level` (1-based), synthesising the approximation from
    /// the coarser levels when needed.
    pub fn subbands(&self, level: usize) -> Result<SubbandSet> {
        if level == 0 || level > self.levels() {
            return Err(Error::InvalidParameter(format!(
                "level {level} outside 1..={}",
                self.levels()
            )));
        }
        let mut approx = self.approx.clone();
        for d in self.details[level..].iter().rev() {
            approx = synthesize_level(&SubbandSet::new(
                approx,
                d.horizontal.clone(),
                d.vertical.clone(),
                d.diagonal.clone(),
            )?)?;
        }
        let d = &self.details[level - 1];
        SubbandSet::new(
            approx,
            d.horizontal.clone(),
            d.vertical.clone(),
            d.diagonal.clone(),
        )
    }
}

/// One analysis level. Dimensions must be even.
pub fn analyze_level(plane: &Plane) -> Result<SubbandSet> {
    let (w, h) = plane.dims();
    if w % 2 != 0 || h % 2 != 0 || w == 0 || h == 0 {
        return Err(Error::NotDivisible {
            width: w,
            height: h,
            levels: 1,
        });
    }
    let (hw, hh) = (w / 2, h / 2);
    let mut out = SubbandSet::zeros(hw, hh);
    for y in 0..hh {
        let r0 = plane.row(2 * y);
        let r1 = plane.row(2 * y + 1);
        for x in 0..hw {
            let (p00, p01) = (r0[2 * x], r0[2 * x + 1]);
            let (p10, p11) = (r1[2 * x], r1[2 * x + 1]);
            let i = y * hw + x;
            out.approx.data_mut()[i] = (p00 + p01 + p10 + p11) * 0.5;
            out.horizontal.data_mut()[i] = (p00 - p01 + p10 - p11) * 0.5;
            out.vertical.data_mut()[i] = (p00 + p01 - p10 - p11) * 0.5;
            out.diagonal.data_mut()[i] = (p00 - p01 - p10 + p11) * 0.5;
        }
    }
    Ok(out)
}

/// Inverse of [`analyze_level`].
pub fn synthesize_level(bands: &SubbandSet) -> Result<Plane> {
    bands.validate()?;
    let (hw, hh) = bands.dims();
    let mut out = Plane::zeros(2 * hw, 2 * hh);
    let w = 2 * hw;
    for y in 0..hh {
        for x in 0..hw {
            let i = y * hw + x;
            let a = bands.approx.data()[i];
            let hz = bands.horizontal.data()[i];
            let vt = bands.vertical.data()[i];
            let dg = bands.diagonal.data()[i];
            let d = out.data_mut();
            d[2 * y * w + 2 * x] = (a + hz + vt + dg) * 0.5;
            d[2 * y * w + 2 * x + 1] = (a - hz + vt - dg) * 0.5;
            d[(2 * y + 1) * w + 2 * x] = (a + hz - vt - dg) * 0.5;
            d[(2 * y + 1) * w + 2 * x + 1] = (a - hz - vt + dg) * 0.5;
        }
    }
    Ok(out)
}

/// Multi-level analysis. Fails unless both dimensions are divisible by `2^levels`.
pub fn haar_forward(frame: &Frame, levels: u32) -> Result<Pyramid> {
    let (w, h) = frame.dims();
    let unit = 1usize << levels;
    if levels == 0 || w == 0 || h == 0 || w % unit != 0 || h % unit != 0 {
        return Err(Error::NotDivisible {
            width: w,
            height: h,
            levels,
        });
    }
    let mut details = Vec::with_capacity(levels as usize);
    let mut approx = frame.clone();
    for _ in 0..levels {
        let set = analyze_level(&approx)?;
        details.push(DetailLevel {
            horizontal: set.horizontal,
            vertical: set.vertical,
            diagonal: set.diagonal,
        });
        approx = set.approx;
    }
    Ok(Pyramid {
        details,
        approx,
        original_dims: (w, h),
    })
}

/// Multi-level analysis after replicate-padding right/bottom to a multiple
/// of `2^levels`. The original size is kept so [`haar_inverse`] crops back.
pub fn haar_forward_padded(frame: &Frame, levels: u32) -> Result<Pyramid> {
    let (w, h) = frame.dims();
    if w == 0 || h == 0 {
        return Err(Error::Dimension("empty frame".into()));
    }
    let (pw, ph) = padded_dims(w, h, levels);
    let mut p = haar_forward(&frame.pad_replicate(pw, ph), levels)?;
    p.original_dims = (w, h);
    Ok(p)
}

/// Smallest dimensions `>= (w, h)` divisible by `2^levels`.
pub fn padded_dims(w: usize, h: usize, levels: u32) -> (usize, usize) {
    let unit = 1usize << levels;
    (w.div_ceil(unit) * unit, h.div_ceil(unit) * unit)
}

/// Multi-level synthesis, cropped to the pyramid's original dimensions.
pub fn haar_inverse(pyramid: &Pyramid) -> Result<Frame> {
    let mut approx = pyramid.approx.clone();
    for d in pyramid.details.iter().rev() {
        approx = synthesize_level(&SubbandSet::new(
            approx,
            d.horizontal.clone(),
            d.vertical.clone(),
            d.diagonal.clone(),
        )?)?;
    }
    let (w, h) = pyramid.original_dims;
    if w > approx.width() || h > approx.height() {
        return Err(Error::Dimension(format!(
            "original size {w}x{h} exceeds synthesized {}x{}",
            approx.width(),
            approx.height()
        )));
    }
    Ok(approx.crop(w, h))
}

/// Synthesis with `h` extra zero-detail levels below `frame`.
///
/// Each source pixel `v` becomes a `2^h × 2^h` block of value `v / 2^h`, so
/// `h` analysis levels of the result return `frame` with all-zero details.
pub fn upsample_zero_detail(frame: &Frame, h: u32) -> Frame {
    if h == 0 {
        return frame.clone();
    }
    let factor = 1usize << h;
    let scale = 1.0 / factor as f64;
    Plane::from_fn(frame.width() * factor, frame.height() * factor, |x, y| {
        frame.get(x / factor, y / factor) * scale
    })
}
