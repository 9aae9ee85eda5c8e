//! PSNR, the band-to-band baseline and rate-distortion sweeps.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::codec::{
    decode_sequence, encode_sequence_with_fields, search_bands, CodecConfig, EncodedStream, GopType,
};
use crate::motion::{search_candidates, MotionField, MotionVector, SearchParams};
use crate::wavelet::SubbandSet;
use crate::{Error, Frame, Result};

pub const PEAK: f64 = 255.0;

/// `10·log10(peak² / MSE)`; identical frames give `f64::INFINITY`.
pub fn psnr(a: &Frame, b: &Frame, peak: f64) -> Result<f64> {
    a.check_same_dims(b)?;
    if a.is_empty() {
        return Err(Error::Dimension("empty frames".into()));
    }
    let mse = a.sse(b) / a.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

/// Block matching restricted to whole subband-sample moves (pure circular
/// shifts, no subpixel operators). Vectors are reported at `params.precision`
/// and are always multiples of two pixels.
pub fn band_to_band_search(
    reference: &SubbandSet,
    target: &SubbandSet,
    params: &SearchParams,
) -> Result<MotionField> {
    params.validate()?;
    let h = params.precision;
    let r = (params.search_range / 2) as i32;
    let step = 2i32 << h;
    let candidates: Vec<MotionVector> = (-r..=r)
        .flat_map(|sy| (-r..=r).map(move |sx| MotionVector::new(sx * step, sy * step)))
        .collect();
    Ok(search_candidates(
        reference,
        target,
        params.block_size,
        h,
        &candidates,
        |b, mv| {
            let (sx, sy) = mv.subband_samples(h).expect("whole-sample candidate");
            Ok(b.roll(sx as isize, sy as isize))
        },
    )?
    .field)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MotionMethod {
    /// Subpixel in-band search.
    InBand,
    /// Whole-sample band-to-band baseline.
    BandToBand,
}

impl MotionMethod {
    pub fn name(self) -> &'static str {
        match self {
            MotionMethod::InBand => "inband",
            MotionMethod::BandToBand => "band2band",
        }
    }
}

/// Motion fields for every `(2t, 2t+1)` pair with the chosen method.
pub fn estimate_fields(
    frames: &[Frame],
    cfg: &CodecConfig,
    method: MotionMethod,
) -> Result<Vec<MotionField>> {
    cfg.validate()?;
    let params = cfg.search_params();
    frames
        .par_chunks_exact(2)
        .map(|pair| {
            let r = search_bands(&pair[0], cfg)?;
            let t = search_bands(&pair[1], cfg)?;
            match method {
                MotionMethod::InBand => crate::motion::full_search(&r, &t, &params),
                MotionMethod::BandToBand => band_to_band_search(&r, &t, &params),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateDistortionPoint {
    pub method: MotionMethod,
    pub threshold: f64,
    /// Whole stream, headers included.
    pub bits_total: u64,
    /// `bits_total / (W·H)`: bits per pixel position over the whole clip.
    pub bpp: f64,
    /// Residual (error frame) payload bits only.
    pub error_bits: u64,
    /// `error_bits / (W·H)`.
    pub error_bpp: f64,
    /// PSNR of each decoded target (predicted) frame.
    pub psnr_per_frame: Vec<f64>,
    pub psnr_mean: f64,
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

/// Measures one encoded stream against the source frames.
pub fn measure(
    frames: &[Frame],
    stream: &EncodedStream,
    method: MotionMethod,
    threshold: f64,
) -> Result<RateDistortionPoint> {
    let decoded = decode_sequence(&EncodedStream::from_bytes(&stream.to_bytes())?)?;
    if decoded.len() != frames.len() || frames.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "stream holds {} frames, source has {}",
            decoded.len(),
            frames.len()
        )));
    }
    let (w, h) = frames[0].dims();
    let pixels = (w * h) as f64;
    let bits_total = stream.byte_len() as u64 * 8;
    let error_bits: u64 = stream
        .gops
        .iter()
        .map(|g| g.residual.len() as u64 * 8)
        .sum();
    let mut psnr_per_frame = Vec::new();
    let mut index = 0;
    for g in &stream.gops {
        if g.gop_type == GopType::Pair {
            psnr_per_frame.push(psnr(&frames[index + 1], &decoded[index + 1], PEAK)?);
        }
        index += g.gop_type.frames();
    }
    Ok(RateDistortionPoint {
        method,
        threshold,
        bits_total,
        bpp: bits_total as f64 / pixels,
        error_bits,
        error_bpp: error_bits as f64 / pixels,
        psnr_mean: mean(&psnr_per_frame),
        psnr_per_frame,
    })
}

/// Encodes and decodes `frames` once per threshold. Motion is estimated once
/// and shared by every point. Rows come back sorted by threshold.
pub fn rd_sweep(
    frames: &[Frame],
    cfg: &CodecConfig,
    thresholds: &[f64],
    method: MotionMethod,
) -> Result<Vec<RateDistortionPoint>> {
    if thresholds.is_empty() {
        return Err(Error::InvalidParameter("threshold list is empty".into()));
    }
    if frames.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "a sweep needs at least 2 frames, got {}",
            frames.len()
        )));
    }
    let mut ts = thresholds.to_vec();
    if ts.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::InvalidParameter(
            "thresholds must be finite and >= 0".into(),
        ));
    }
    ts.sort_by(f64::total_cmp);
    let fields = estimate_fields(frames, cfg, method)?;
    ts.par_iter()
        .map(|&t| {
            let c = CodecConfig {
                threshold: t,
                ..*cfg
            };
            let seq = encode_sequence_with_fields(frames, &fields, &c)?;
            measure(frames, &seq.stream, method, c.stored_threshold())
        })
        .collect()
}

fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v}")
    }
}

/// CSV with columns
/// `threshold,bits,bpp,psnr_mean,psnr_f0..psnr_f{n-1},error_bits,error_bpp,method`.
pub fn to_csv(points: &[RateDistortionPoint]) -> String {
    let nframes = points
        .iter()
        .map(|p| p.psnr_per_frame.len())
        .max()
        .unwrap_or(0);
    let mut out = String::from("threshold,bits,bpp,psnr_mean");
    for i in 0..nframes {
        let _ = write!(out, ",psnr_f{i}");
    }
    out.push_str(",error_bits,error_bpp,method\n");
    for p in points {
        let _ = write!(
            out,
            "{},{},{},{}",
            fmt_f64(p.threshold),
            p.bits_total,
            fmt_f64(p.bpp),
            fmt_f64(p.psnr_mean)
        );
        for i in 0..nframes {
            match p.psnr_per_frame.get(i) {
                Some(v) => {
                    let _ = write!(out, ",{}", fmt_f64(*v));
                }
                None => out.push(','),
            }
        }
        let _ = writeln!(
            out,
            ",{},{},{}",
            p.error_bits,
            fmt_f64(p.error_bpp),
            p.method.name()
        );
    }
    out
}

/// Which rate to match curves on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RateAxis {
    Total,
    ErrorOnly,
}

fn rate_of(p: &RateDistortionPoint, axis: RateAxis) -> f64 {
    match axis {
        RateAxis::Total => p.bpp,
        RateAxis::ErrorOnly => p.error_bpp,
    }
}

/// Linear interpolation of `curve`'s mean PSNR at `rate`; `None` outside the
/// curve's rate span.
pub fn psnr_at_rate(curve: &[RateDistortionPoint], rate: f64, axis: RateAxis) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = curve
        .iter()
        .map(|p| (rate_of(p, axis), p.psnr_mean))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    for w in pts.windows(2) {
        let ((r0, p0), (r1, p1)) = (w[0], w[1]);
        if rate >= r0 && rate <= r1 {
            if r1 == r0 {
                return Some(p0.max(p1));
            }
            if !(p0.is_finite() && p1.is_finite()) {
                return Some(if rate == r1 { p1 } else { p0 });
            }
            return Some(p0 + (p1 - p0) * (rate - r0) / (r1 - r0));
        }
    }
    pts.iter().find(|(r, _)| *r == rate).map(|&(_, p)| p)
}

/// PSNR gain of each `proposed` point over `baseline` at the same rate.
pub fn gains_at_matched_rate(
    proposed: &[RateDistortionPoint],
    baseline: &[RateDistortionPoint],
    axis: RateAxis,
) -> Vec<Option<f64>> {
    proposed
        .iter()
        .map(|p| psnr_at_rate(baseline, rate_of(p, axis), axis).map(|b| p.psnr_mean - b))
        .collect()
}
