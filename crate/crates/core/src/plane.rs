//! Dense row-major real matrices used for frames and subband planes.

use std::ops::{Index, IndexMut};

use crate::Error;

/// A `height × width` matrix of `f64` samples stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

/// A luminance frame. Pixel values are nominally in `[0, 255]`.
pub type Frame = Plane;

impl Plane {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self, Error> {
        if data.len() != width * height {
            return Err(Error::Dimension(format!(
                "buffer of {} samples cannot hold a {width}x{height} plane",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Builds a plane from nested rows. All rows must have the same length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, Error> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(width * height);
        for row in rows {
            let row = row.as_ref();
            if row.len() != width {
                return Err(Error::Dimension("ragged rows".into()));
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    #[inline]
    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    #[inline]
    pub fn row_mut(&mut self, y: usize) -> &mut [f64] {
        &mut self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.width.max(1)).take(self.height)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Plane {
        Plane {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Elementwise `f(self, other)`; dimensions must match.
    pub fn zip_with(&self, other: &Plane, f: impl Fn(f64, f64) -> f64) -> Result<Plane, Error> {
        self.check_same_dims(other)?;
        Ok(Plane {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn check_same_dims(&self, other: &Plane) -> Result<(), Error> {
        if self.dims() != other.dims() {
            return Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(())
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// Largest absolute elementwise difference. Panics on a dimension mismatch.
    pub fn max_abs_diff(&self, other: &Plane) -> f64 {
        assert_eq!(self.dims(), other.dims(), "plane dimensions differ");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Sum of squared differences. Panics on a dimension mismatch.
    pub fn sse(&self, other: &Plane) -> f64 {
        assert_eq!(self.dims(), other.dims(), "plane dimensions differ");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// Periodic rotation: content moves `dx` columns right and `dy` rows down.
    pub fn roll(&self, dx: isize, dy: isize) -> Plane {
        let (w, h) = (self.width as isize, self.height as isize);
        if w == 0 || h == 0 {
            return self.clone();
        }
        let mut out = Plane::zeros(self.width, self.height);
        for y in 0..h {
            let sy = (y - dy).rem_euclid(h) as usize;
            let src = self.row(sy);
            let dst = out.row_mut(y as usize);
            let sx0 = (-dx).rem_euclid(w) as usize;
            // dst[x] = src[(x - dx) mod w]
            let (head, tail) = src.split_at(sx0);
            dst[..tail.len()].copy_from_slice(tail);
            dst[tail.len()..].copy_from_slice(head);
        }
        out
    }

    /// Replicates the last column/row until the plane is `width × height`.
    pub fn pad_replicate(&self, width: usize, height: usize) -> Plane {
        debug_assert!(width >= self.width && height >= self.height);
        if self.dims() == (width, height) {
            return self.clone();
        }
        Plane::from_fn(width, height, |x, y| {
            self.get(x.min(self.width - 1), y.min(self.height - 1))
        })
    }

    /// Top-left `width × height` window.
    pub fn crop(&self, width: usize, height: usize) -> Plane {
        debug_assert!(width <= self.width && height <= self.height);
        if self.dims() == (width, height) {
            return self.clone();
        }
        Plane::from_fn(width, height, |x, y| self.get(x, y))
    }

    /// Copies the `w × h` region at `(x0, y0)` from `src` into the same place in `self`.
    pub fn copy_region(&mut self, src: &Plane, x0: usize, y0: usize, w: usize, h: usize) {
        for y in y0..y0 + h {
            let s = &src.row(y)[x0..x0 + w];
            self.row_mut(y)[x0..x0 + w].copy_from_slice(s);
        }
    }

    /// Sum of squared differences over a rectangular region.
    pub fn region_sse(&self, other: &Plane, x0: usize, y0: usize, w: usize, h: usize) -> f64 {
        let mut acc = 0.0;
        for y in y0..y0 + h {
            let a = &self.row(y)[x0..x0 + w];
            let b = &other.row(y)[x0..x0 + w];
            for (p, q) in a.iter().zip(b) {
                let d = p - q;
                acc += d * d;
            }
        }
        acc
    }
}

impl Index<(usize, usize)> for Plane {
    type Output = f64;

    /// Indexed as `(x, y)`.
    #[inline]
    fn index(&self, (x, y): (usize, usize)) -> &f64 {
        &self.data[y * self.width + x]
    }
}

impl IndexMut<(usize, usize)> for Plane {
    #[inline]
    fn index_mut(&mut self, (x, y): (usize, usize)) -> &mut f64 {
        &mut self.data[y * self.width + x]
    }
}
