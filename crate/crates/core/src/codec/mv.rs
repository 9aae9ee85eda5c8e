//! Motion-vector coding: raster-order differential prediction, signed to
//! unsigned mapping (`v >= 0 -> 2v`, `v < 0 -> -2v - 1`), exp-Golomb order 0.

use super::bits::{BitReader, BitWriter};
use crate::motion::{grid_dims, MotionField, MotionVector};
use crate::{Error, Result};

/// Block geometry a motion payload is decoded against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MvGeometry {
    pub band_dims: (usize, usize),
    pub block_size: usize,
    pub precision: u32,
}

impl MvGeometry {
    pub fn of(field: &MotionField) -> Self {
        Self {
            band_dims: field.band_dims,
            block_size: field.block_size,
            precision: field.precision,
        }
    }
}

pub fn map_signed(v: i64) -> u64 {
    if v >= 0 {
        2 * v as u64
    } else {
        (-2 * v - 1) as u64
    }
}

pub fn unmap_signed(u: u64) -> i64 {
    if u.is_multiple_of(2) {
        (u / 2) as i64
    } else {
        -((u / 2) as i64) - 1
    }
}

/// Mapped symbols in coding order: `dx` then `dy` residual for each block.
pub fn mv_symbols(field: &MotionField) -> Vec<u64> {
    let mut prev = MotionVector::ZERO;
    let mut out = Vec::with_capacity(2 * field.vectors.len());
    for v in &field.vectors {
        out.push(map_signed(v.dx as i64 - prev.dx as i64));
        out.push(map_signed(v.dy as i64 - prev.dy as i64));
        prev = *v;
    }
    out
}

pub fn encode_mv(field: &MotionField) -> Vec<u8> {
    let mut w = BitWriter::new();
    for s in mv_symbols(field) {
        w.write_ue(s);
    }
    w.finish()
}

pub fn decode_mv(bytes: &[u8], geometry: MvGeometry) -> Result<MotionField> {
    if geometry.block_size == 0 {
        return Err(Error::InvalidParameter(
            "block size must be positive".into(),
        ));
    }
    let (cols, rows) = grid_dims(geometry.band_dims, geometry.block_size);
    let mut r = BitReader::new(bytes);
    let mut prev = MotionVector::ZERO;
    let mut vectors = Vec::with_capacity(cols * rows);
    let component = |r: &mut BitReader, base: i32| -> Result<i32> {
        let v = base as i64 + unmap_signed(r.read_ue()?);
        i32::try_from(v).map_err(|_| Error::Corrupt(format!("motion component {v} overflows")))
    };
    for _ in 0..cols * rows {
        let dx = component(&mut r, prev.dx)?;
        let dy = component(&mut r, prev.dy)?;
        prev = MotionVector::new(dx, dy);
        vectors.push(prev);
    }
    Ok(MotionField {
        block_size: geometry.block_size,
        precision: geometry.precision,
        band_dims: geometry.band_dims,
        vectors,
    })
}
