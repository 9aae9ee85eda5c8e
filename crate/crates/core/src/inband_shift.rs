//! Exact wavelet-domain translation of level-1 Haar subbands.
//!
//! A displacement of `v` pixels along one axis is split into a circular
//! shift of the subbands by whole subband samples (two pixels each) and a
//! residual `r` in `(-1, 1]`. A dyadic residual `r = s / 2^h` is then applied
//! with three bidiagonal Toeplitz operators per axis:
//!
//! ```text
//! F  : diag (2^(h+1) - |s|) / 2^(h+1)    off-diag  |s| / 2^(h+1)
//! K1 : diag        -s       / 2^(h+1)    off-diag   s  / 2^(h+1)
//! K2 : diag (2^(h+1) - 3|s|)/ 2^(h+1)    off-diag -|s| / 2^(h+1)
//! ```
//!
//! (`L1`, `L2` are the vertical counterparts of `K1`, `K2`). The shifted
//! subbands are
//!
//! ```text
//! A' =  Fy A Fx + Fy a K1 + L1 b Fx + L1 c K1
//! a' = -Fy A K1 + Fy a K2 - L1 b K1 + L1 c K2
//! b' = -L1 A Fx - L1 a K1 + L2 b Fx + L2 c K1
//! c' =  L1 A K1 - L1 a K2 - L2 b K1 + L2 c K2
//! ```
//!
//! The operator sign `s` follows the matrix form: positive `s` gives lower
//! bidiagonal x operators (right-multiplied) and upper bidiagonal y
//! operators (left-multiplied), which moves content toward *decreasing*
//! index. Negative `s` swaps the diagonal sides. Public shifts
//! ([`ShiftSpec`], [`dyadic_approx`]) use the opposite, image convention:
//! positive values move content toward increasing column/row index.
//!
//! All operators wrap around periodically, so results agree exactly with a
//! circular spatial shift of a zero-detail upsampled frame.

use crate::wavelet::{analyze_level, haar_forward, upsample_zero_detail, SubbandSet};
use crate::{Error, Frame, Plane, Result};

/// Maximum supported number of hypothetical levels.
pub const MAX_LEVEL: u32 = 30;

/// A displacement of `s / 2^h` pixels along one axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct DyadicShift {
    pub s: i64,
    pub h: u32,
}

impl DyadicShift {
    pub const ZERO: DyadicShift = DyadicShift { s: 0, h: 0 };

    pub fn new(s: i64, h: u32) -> Self {
        Self { s, h }
    }

    /// Whole-pixel shift.
    pub fn integer(s: i64) -> Self {
        Self { s, h: 0 }
    }

    /// Value in pixels.
    pub fn value(self) -> f64 {
        self.s as f64 / (1u64 << self.h) as f64
    }

    pub fn is_zero(self) -> bool {
        self.s == 0
    }

    /// Canonical form has an odd numerator, or `s = 0` with `h = 0`.
    pub fn is_canonical(self) -> bool {
        if self.s == 0 {
            self.h == 0
        } else {
            self.h == 0 || self.s % 2 != 0
        }
    }

    /// Removes common factors of two.
    pub fn canonical(self) -> Self {
        if self.s == 0 {
            return Self::ZERO;
        }
        let tz = self.s.trailing_zeros().min(self.h);
        Self {
            s: self.s >> tz,
            h: self.h - tz,
        }
    }

    /// Numerator expressed over `2^h` for some `h >= self.h`.
    pub fn numerator_at(self, h: u32) -> i64 {
        debug_assert!(h >= self.h);
        self.s << (h - self.h)
    }
}

/// Rounds `shift` to the nearest multiple of `2^-h_max` (ties away from zero)
/// and returns it in canonical form.
pub fn dyadic_approx(shift: f64, h_max: u32) -> DyadicShift {
    debug_assert!(shift.is_finite());
    let h_max = h_max.min(MAX_LEVEL);
    let s = (shift * (1u64 << h_max) as f64).round() as i64;
    DyadicShift::new(s, h_max).canonical()
}

/// One axis of a decomposed shift: `2 * circular + residual` pixels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct AxisShift {
    /// Whole subband samples.
    pub circular: i64,
    /// Residual in `(-1, 1]` pixels.
    pub residual: DyadicShift,
}

impl AxisShift {
    pub fn value(self) -> f64 {
        2.0 * self.circular as f64 + self.residual.value()
    }
}

/// Circular part plus residual subpixel part for both axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct ShiftSpec {
    pub x: AxisShift,
    pub y: AxisShift,
}

impl ShiftSpec {
    pub const IDENTITY: ShiftSpec = ShiftSpec {
        x: AxisShift {
            circular: 0,
            residual: DyadicShift::ZERO,
        },
        y: AxisShift {
            circular: 0,
            residual: DyadicShift::ZERO,
        },
    };

    /// Decomposes a pixel displacement after rounding it to the `2^-h_max` grid.
    pub fn from_pixels(dx: f64, dy: f64, h_max: u32) -> ShiftSpec {
        let x = decompose_axis(dyadic_approx(dx, h_max)).expect("canonical by construction");
        let y = decompose_axis(dyadic_approx(dy, h_max)).expect("canonical by construction");
        ShiftSpec { x, y }
    }

    /// Displacement in pixels, `(dx, dy)`.
    pub fn value(&self) -> (f64, f64) {
        (self.x.value(), self.y.value())
    }

    pub fn circular(&self) -> (i64, i64) {
        (self.x.circular, self.y.circular)
    }

    pub fn has_subpixel(&self) -> bool {
        !self.x.residual.is_zero() || !self.y.residual.is_zero()
    }
}

/// Splits a canonical dyadic shift into circular and residual parts.
///
/// | shift                      | circular  | residual   |
/// |----------------------------|-----------|------------|
/// | even integer               | `s/2`     | 0          |
/// | odd integer                | `⌊s/2⌋`   | 1          |
/// | fractional, `⌈v⌉` even     | `⌈v⌉/2`   | `v - ⌈v⌉`  |
/// | fractional, `⌊v⌋` even     | `⌊v⌋/2`   | `v - ⌊v⌋`  |
pub fn decompose_axis(shift: DyadicShift) -> Result<AxisShift> {
    if !shift.is_canonical() {
        return Err(Error::InvalidShift(format!(
            "{}/2^{} is not in canonical form",
            shift.s, shift.h
        )));
    }
    if shift.h > MAX_LEVEL {
        return Err(Error::InvalidShift(format!("level {} too deep", shift.h)));
    }
    if shift.h == 0 {
        let s = shift.s;
        return Ok(if s % 2 == 0 {
            AxisShift {
                circular: s / 2,
                residual: DyadicShift::ZERO,
            }
        } else {
            AxisShift {
                circular: s.div_euclid(2),
                residual: DyadicShift::integer(1),
            }
        });
    }
    let unit = 1i64 << shift.h;
    let floor = shift.s.div_euclid(unit);
    let ceil = floor + 1;
    let base = if ceil % 2 == 0 { ceil } else { floor };
    Ok(AxisShift {
        circular: base / 2,
        residual: DyadicShift::new(shift.s - base * unit, shift.h),
    })
}

pub fn decompose_shift(x: DyadicShift, y: DyadicShift) -> Result<ShiftSpec> {
    Ok(ShiftSpec {
        x: decompose_axis(x)?,
        y: decompose_axis(y)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BandKind {
    F,
    K1,
    K2,
    L1,
    L2,
}

/// Which side of the main diagonal carries the off-diagonal value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// `M[i+1][i] = offdiag`
    Lower,
    /// `M[i][i+1] = offdiag`
    Upper,
}

/// Periodic bidiagonal Toeplitz matrix.
///
/// X-axis operators right-multiply a plane (act along rows), y-axis
/// operators left-multiply it (act along columns).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandOperator {
    pub kind: BandKind,
    pub diag: f64,
    pub offdiag: f64,
    pub orientation: Orientation,
    pub size: usize,
}

impl BandOperator {
    /// Offset of the off-diagonal tap relative to the output index.
    fn tap_offset(&self, axis: Axis) -> isize {
        match (axis, self.orientation) {
            // (X M)_j = d x_j + o x_{j+1} for lower M
            (Axis::X, Orientation::Lower) | (Axis::Y, Orientation::Upper) => 1,
            (Axis::X, Orientation::Upper) | (Axis::Y, Orientation::Lower) => -1,
        }
    }

    /// Dense circulant form, indexed `[row][col]`.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.size;
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] += self.diag;
            match self.orientation {
                Orientation::Lower => m[(i + 1) % n][i] += self.offdiag,
                Orientation::Upper => m[i][(i + 1) % n] += self.offdiag,
            }
        }
        m
    }

    pub fn is_identity(&self) -> bool {
        self.diag == 1.0 && self.offdiag == 0.0
    }

    pub fn is_zero(&self) -> bool {
        self.diag == 0.0 && self.offdiag == 0.0
    }
}

/// The three operators of one axis: `F`, then `K1`/`L1`, then `K2`/`L2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandOps {
    pub axis: Axis,
    pub f: BandOperator,
    pub first: BandOperator,
    pub second: BandOperator,
}

/// Builds `F`, `K1`, `K2` (x axis) or `F`, `L1`, `L2` (y axis) for operator
/// shift `s / 2^h`; requires `|s| <= 2^h`.
pub fn build_band_ops(s: i64, h: u32, axis: Axis, size: usize) -> Result<BandOps> {
    if h > MAX_LEVEL {
        return Err(Error::InvalidShift(format!("level {h} too deep")));
    }
    if s.unsigned_abs() > 1u64 << h {
        return Err(Error::InvalidShift(format!(
            "|{s}| exceeds 2^{h}; residual must be at most one pixel"
        )));
    }
    if size == 0 {
        return Err(Error::InvalidParameter(
            "operator size must be positive".into(),
        ));
    }
    let denom = (1i64 << (h + 1)) as f64;
    let full = 1i64 << (h + 1);
    let abs = s.abs();
    let orientation = match (axis, s < 0) {
        (Axis::X, false) | (Axis::Y, true) => Orientation::Lower,
        (Axis::X, true) | (Axis::Y, false) => Orientation::Upper,
    };
    let op = |kind, diag: i64, offdiag: i64| BandOperator {
        kind,
        diag: diag as f64 / denom,
        offdiag: offdiag as f64 / denom,
        orientation,
        size,
    };
    let (k1, k2) = match axis {
        Axis::X => (BandKind::K1, BandKind::K2),
        Axis::Y => (BandKind::L1, BandKind::L2),
    };
    Ok(BandOps {
        axis,
        f: op(BandKind::F, full - abs, abs),
        first: op(k1, -s, s),
        second: op(k2, full - 3 * abs, -abs),
    })
}

/// Image-convention residual to operator sign.
fn ops_for_residual(residual: DyadicShift, axis: Axis, size: usize) -> Result<BandOps> {
    build_band_ops(-residual.s, residual.h, axis, size)
}

/// Translates level-1 subbands by `spec` entirely in the wavelet domain.
pub fn apply_inband_shift(bands: &SubbandSet, spec: &ShiftSpec) -> Result<SubbandSet> {
    bands.validate()?;
    let (w, h) = bands.dims();
    if w == 0 || h == 0 {
        return Err(Error::Dimension("empty subband planes".into()));
    }
    for r in [spec.x.residual, spec.y.residual] {
        if r.s.unsigned_abs() > 1u64 << r.h.min(MAX_LEVEL) {
            return Err(Error::InvalidShift(format!(
                "residual {}/2^{} exceeds one pixel",
                r.s, r.h
            )));
        }
    }
    let mut out = bands.roll(spec.x.circular as isize, spec.y.circular as isize);
    if !spec.x.residual.is_zero() {
        let ops = ops_for_residual(spec.x.residual, Axis::X, w)?;
        let (approx, horizontal) = mix_pair(&out.approx, &out.horizontal, &ops);
        let (vertical, diagonal) = mix_pair(&out.vertical, &out.diagonal, &ops);
        out = SubbandSet {
            approx,
            horizontal,
            vertical,
            diagonal,
        };
    }
    if !spec.y.residual.is_zero() {
        let ops = ops_for_residual(spec.y.residual, Axis::Y, h)?;
        let (approx, vertical) = mix_pair(&out.approx, &out.vertical, &ops);
        let (horizontal, diagonal) = mix_pair(&out.horizontal, &out.diagonal, &ops);
        out = SubbandSet {
            approx,
            horizontal,
            vertical,
            diagonal,
        };
    }
    Ok(out)
}

/// Convenience wrapper: shift by `(dx, dy)` pixels rounded to the `2^-h_max` grid.
pub fn shift_bands(bands: &SubbandSet, dx: f64, dy: f64, h_max: u32) -> Result<SubbandSet> {
    apply_inband_shift(bands, &ShiftSpec::from_pixels(dx, dy, h_max))
}

/// One axis of the separable update on a (low, high) plane pair:
///
/// ```text
/// low'  =  low·F  + high·K1      (x axis; y axis multiplies on the left)
/// high' = -low·K1 + high·K2
/// ```
fn mix_pair(low: &Plane, high: &Plane, ops: &BandOps) -> (Plane, Plane) {
    let (w, h) = low.dims();
    let off = ops.f.tap_offset(ops.axis);
    let (fd, fo) = (ops.f.diag, ops.f.offdiag);
    let (k1d, k1o) = (ops.first.diag, ops.first.offdiag);
    let (k2d, k2o) = (ops.second.diag, ops.second.offdiag);
    let mut lo = Plane::zeros(w, h);
    let mut hi = Plane::zeros(w, h);
    match ops.axis {
        Axis::X => {
            for y in 0..h {
                let (l, g) = (low.row(y), high.row(y));
                let lo_row = &mut lo.data_mut()[y * w..(y + 1) * w];
                for x in 0..w {
                    let t = (x as isize + off).rem_euclid(w as isize) as usize;
                    lo_row[x] = fd * l[x] + fo * l[t] + k1d * g[x] + k1o * g[t];
                }
                let hi_row = &mut hi.data_mut()[y * w..(y + 1) * w];
                for x in 0..w {
                    let t = (x as isize + off).rem_euclid(w as isize) as usize;
                    hi_row[x] = -(k1d * l[x] + k1o * l[t]) + k2d * g[x] + k2o * g[t];
                }
            }
        }
        Axis::Y => {
            for y in 0..h {
                let t = (y as isize + off).rem_euclid(h as isize) as usize;
                let (l0, l1) = (low.row(y), low.row(t));
                let (g0, g1) = (high.row(y), high.row(t));
                let lo_row = &mut lo.data_mut()[y * w..(y + 1) * w];
                for x in 0..w {
                    lo_row[x] = fd * l0[x] + fo * l1[x] + k1d * g0[x] + k1o * g1[x];
                }
                let hi_row = &mut hi.data_mut()[y * w..(y + 1) * w];
                for x in 0..w {
                    hi_row[x] = -(k1d * l0[x] + k1o * l1[x]) + k2d * g0[x] + k2o * g1[x];
                }
            }
        }
    }
    (lo, hi)
}

/// Spatial-domain reference for a dyadic shift: upsample with zero details,
/// rotate by the integer number of fine samples, and analyse back down to
/// the level that corresponds to the original level-1 subbands.
pub fn spatial_reference_shift(
    frame: &Frame,
    dx: DyadicShift,
    dy: DyadicShift,
) -> Result<SubbandSet> {
    let h = dx.h.max(dy.h);
    let up = upsample_zero_detail(frame, h);
    let rolled = up.roll(dx.numerator_at(h) as isize, dy.numerator_at(h) as isize);
    if h == 0 {
        return analyze_level(&rolled);
    }
    haar_forward(&rolled, h + 1)?.subbands(h as usize + 1)
}
