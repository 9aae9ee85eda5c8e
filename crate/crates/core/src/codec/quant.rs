//! Hard-threshold quantizer.
//!
//! A coefficient with `|x| <= T` becomes zero; survivors are rounded to the
//! nearest multiple of `1 / scale` and stored as integers. The threshold is
//! compared against the unscaled value, so one `T` applies globally across
//! planes with different scales.

use crate::Plane;

#[derive(Clone, Debug, PartialEq)]
pub struct QuantizedPlane {
    pub width: usize,
    pub height: usize,
    pub values: Vec<i16>,
    /// Integer `q` represents `q / scale`.
    pub scale: f64,
    /// Values clamped to the `i16` range.
    pub saturated: usize,
}

impl QuantizedPlane {
    pub fn nonzero(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0).count()
    }
}

/// Unit-step quantization: `|x| <= t` maps to 0, the rest round to the nearest integer.
pub fn quantize(plane: &Plane, t: f64) -> QuantizedPlane {
    quantize_scaled(plane, t, 1.0)
}

pub fn quantize_scaled(plane: &Plane, t: f64, scale: f64) -> QuantizedPlane {
    debug_assert!(t >= 0.0 && scale > 0.0);
    let mut saturated = 0;
    let values = plane
        .data()
        .iter()
        .map(|&x| {
            if x.abs() <= t {
                return 0;
            }
            let q = (x * scale).round();
            if q > i16::MAX as f64 {
                saturated += 1;
                i16::MAX
            } else if q < i16::MIN as f64 {
                saturated += 1;
                i16::MIN
            } else {
                q as i16
            }
        })
        .collect();
    QuantizedPlane {
        width: plane.width(),
        height: plane.height(),
        values,
        scale,
        saturated,
    }
}

pub fn dequantize(q: &QuantizedPlane) -> Plane {
    let inv = 1.0 / q.scale;
    Plane::from_vec(
        q.width,
        q.height,
        q.values.iter().map(|&v| v as f64 * inv).collect(),
    )
    .expect("quantized plane holds width*height values")
}
