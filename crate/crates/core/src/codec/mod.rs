//! Reference/target MCTF codec.
//!
//! Frames are taken in pairs `(I_2t, I_2t+1)`. The reference is intra coded
//! as a three-level Haar pyramid. The target's error frame is its level-1
//! subbands minus the in-band motion-compensated original reference (open
//! loop); the decoder adds it to the prediction from the decoded reference.
//! The error frame gets `extra_levels` further decompositions of the
//! approximation before coding. A trailing unpaired frame is coded intra.
//!
//! Every coefficient plane goes through the hard-threshold quantizer and a
//! per-payload canonical Huffman code. Coefficients at pyramid level `k` are
//! kept on a `2^-k` grid; orthonormal Haar analysis of an integer frame
//! lands on exactly that grid.

pub mod bits;
pub mod entropy;
pub mod mv;
pub mod quant;
pub mod stream;

use rayon::prelude::*;

use crate::motion::{self, compensate, full_search, MotionField, SearchParams};
use crate::wavelet::{
    analyze_level, haar_forward, haar_inverse, padded_dims, synthesize_level, DetailLevel, Pyramid,
    SubbandSet,
};
use crate::{Error, Frame, Plane, Result};

pub use entropy::{entropy_decode, entropy_decode_bounded, entropy_encode, MAX_DECODED_SAMPLES};
pub use mv::{decode_mv, encode_mv, MvGeometry};
pub use quant::{dequantize, quantize, quantize_scaled, QuantizedPlane};
pub use stream::{EncodedStream, GopPayloads, GopType, StreamHeader};

/// Pyramid depth used for intra-coded frames.
pub const INTRA_LEVELS: u32 = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CodecConfig {
    /// Motion block edge in subband samples.
    pub block_size: usize,
    /// Motion precision `h` (vectors in `1/2^h` pel).
    pub precision: u32,
    /// Search half-width in pixels.
    pub search_range: u32,
    /// Global hard threshold on coefficient magnitude.
    pub threshold: f64,
    /// Extra decompositions of the error frame's approximation.
    pub extra_levels: u32,
}

impl Default for CodecConfig {
    fn default() -> Self {
        Self {
            block_size: 8,
            precision: 2,
            search_range: motion::DEFAULT_SEARCH_RANGE,
            threshold: 0.0,
            extra_levels: 2,
        }
    }
}

impl CodecConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.block_size == 0 || self.block_size > u8::MAX as usize {
            return bad(format!("block size {} outside 1..=255", self.block_size));
        }
        if self.precision > motion::MAX_PRECISION {
            return bad(format!(
                "precision {} exceeds {}",
                self.precision,
                motion::MAX_PRECISION
            ));
        }
        if self.search_range == 0 || self.search_range > u8::MAX as u32 {
            return bad(format!(
                "search range {} outside 1..=255",
                self.search_range
            ));
        }
        if !(self.threshold.is_finite() && self.threshold >= 0.0)
            || self.threshold > f32::MAX as f64
        {
            return bad(format!(
                "threshold {} must be finite and >= 0",
                self.threshold
            ));
        }
        if self.extra_levels > 8 {
            return bad(format!("extra levels {} exceeds 8", self.extra_levels));
        }
        Ok(())
    }

    /// Threshold as stored in the stream header.
    pub fn stored_threshold(&self) -> f64 {
        self.threshold as f32 as f64
    }

    pub fn search_params(&self) -> SearchParams {
        SearchParams {
            search_range: self.search_range,
            precision: self.precision,
            block_size: self.block_size,
        }
    }

    /// Frames are padded to a multiple of `2^pad_levels`.
    pub fn pad_levels(&self) -> u32 {
        INTRA_LEVELS.max(1 + self.extra_levels)
    }

    pub fn padded_dims(&self, width: usize, height: usize) -> (usize, usize) {
        padded_dims(width, height, self.pad_levels())
    }

    pub fn header(&self, width: usize, height: usize, frame_count: usize) -> Result<StreamHeader> {
        self.validate()?;
        let w = u16::try_from(width)
            .map_err(|_| Error::Dimension(format!("width {width} exceeds u16")))?;
        let h = u16::try_from(height)
            .map_err(|_| Error::Dimension(format!("height {height} exceeds u16")))?;
        let n = u32::try_from(frame_count)
            .map_err(|_| Error::Dimension(format!("{frame_count} frames exceed u32")))?;
        Ok(StreamHeader {
            width: w,
            height: h,
            frame_count: n,
            block_size: self.block_size as u8,
            precision: self.precision as u8,
            search_range: self.search_range as u8,
            threshold: self.threshold as f32,
            extra_levels: self.extra_levels as u8,
        })
    }

    pub fn from_header(h: &StreamHeader) -> Result<Self> {
        let cfg = Self {
            block_size: h.block_size as usize,
            precision: h.precision as u32,
            search_range: h.search_range as u32,
            threshold: h.threshold as f64,
            extra_levels: h.extra_levels as u32,
        };
        cfg.validate()
            .map_err(|e| Error::Corrupt(format!("header: {e}")))?;
        Ok(cfg)
    }
}

/// Encoder output for one GOP, with the encoder-side reconstruction.
#[derive(Clone, Debug)]
pub struct EncodedGop {
    pub payloads: GopPayloads,
    /// Decoded reference (and target for pairs), cropped to the input size.
    pub reconstruction: Vec<Frame>,
    pub field: Option<MotionField>,
    /// Nonzero quantized residual coefficients.
    pub residual_nonzero: usize,
    pub residual_coefficients: usize,
    pub saturated: usize,
}

fn level_scale(level: usize) -> f64 {
    (1u64 << level) as f64
}

/// Quantizes and entropy codes a pyramid; returns the payload and the
/// decoder's view of the pyramid.
fn code_pyramid(pyr: &Pyramid, threshold: f64) -> (Vec<u8>, Pyramid, usize, usize) {
    let levels = pyr.levels();
    let mut quantized = Vec::with_capacity(3 * levels + 1);
    for (k, d) in pyr.details.iter().enumerate() {
        for p in [&d.horizontal, &d.vertical, &d.diagonal] {
            quantized.push(quantize_scaled(p, threshold, level_scale(k + 1)));
        }
    }
    quantized.push(quantize_scaled(&pyr.approx, threshold, level_scale(levels)));
    let nonzero = quantized.iter().map(|q| q.nonzero()).sum();
    let saturated = quantized.iter().map(|q| q.saturated).sum();
    let bytes = entropy_encode(&quantized);
    let decoded = pyramid_from_quantized(&quantized, levels, pyr.original_dims)
        .expect("encoder-built planes are consistent");
    (bytes, decoded, nonzero, saturated)
}

fn pyramid_from_quantized(
    planes: &[QuantizedPlane],
    levels: usize,
    original_dims: (usize, usize),
) -> Result<Pyramid> {
    if planes.len() != 3 * levels + 1 {
        return Err(Error::Corrupt(format!(
            "expected {} planes for a {levels}-level pyramid, found {}",
            3 * levels + 1,
            planes.len()
        )));
    }
    let (w, h) = original_dims;
    let mut details = Vec::with_capacity(levels);
    for k in 0..levels {
        let want = (w >> (k + 1), h >> (k + 1));
        let p: Vec<Plane> = planes[3 * k..3 * k + 3].iter().map(dequantize).collect();
        if p.iter().any(|q| q.dims() != want) {
            return Err(Error::Corrupt(format!(
                "level {} planes are not {want:?}",
                k + 1
            )));
        }
        let mut it = p.into_iter();
        details.push(DetailLevel {
            horizontal: it.next().expect("3 planes"),
            vertical: it.next().expect("3 planes"),
            diagonal: it.next().expect("3 planes"),
        });
    }
    let approx = dequantize(&planes[3 * levels]);
    if approx.dims() != (w >> levels, h >> levels) {
        return Err(Error::Corrupt("approximation plane has wrong size".into()));
    }
    Ok(Pyramid {
        details,
        approx,
        original_dims,
    })
}

fn decode_pyramid(bytes: &[u8], levels: usize, dims: (usize, usize)) -> Result<Pyramid> {
    pyramid_from_quantized(
        &entropy_decode_bounded(bytes, dims.0 * dims.1)?,
        levels,
        dims,
    )
}

/// Error-frame pyramid: level-1 details plus `extra` levels of the approximation.
fn residual_pyramid(res: &SubbandSet, extra: u32) -> Result<Pyramid> {
    let (bw, bh) = res.dims();
    let level1 = DetailLevel {
        horizontal: res.horizontal.clone(),
        vertical: res.vertical.clone(),
        diagonal: res.diagonal.clone(),
    };
    let (mut details, approx) = if extra == 0 {
        (vec![level1], res.approx.clone())
    } else {
        let deeper = haar_forward(&res.approx, extra)?;
        let mut d = vec![level1];
        d.extend(deeper.details);
        (d, deeper.approx)
    };
    details.shrink_to_fit();
    Ok(Pyramid {
        details,
        approx,
        original_dims: (2 * bw, 2 * bh),
    })
}

fn check_frame(frame: &Frame) -> Result<()> {
    if frame.is_empty() {
        return Err(Error::Dimension("empty frame".into()));
    }
    if !frame.is_finite() {
        return Err(Error::InvalidParameter(
            "frame contains non-finite samples".into(),
        ));
    }
    Ok(())
}

struct IntraResult {
    bytes: Vec<u8>,
    padded_recon: Frame,
    decoded: Pyramid,
    saturated: usize,
}

fn intra_code(frame: &Frame, cfg: &CodecConfig) -> Result<IntraResult> {
    let (pw, ph) = cfg.padded_dims(frame.width(), frame.height());
    let padded = frame.pad_replicate(pw, ph);
    let pyr = haar_forward(&padded, INTRA_LEVELS)?;
    let (bytes, decoded, _, saturated) = code_pyramid(&pyr, cfg.stored_threshold());
    Ok(IntraResult {
        bytes,
        padded_recon: haar_inverse(&decoded)?,
        decoded,
        saturated,
    })
}

/// Intra-only GOP for a trailing unpaired frame.
pub fn encode_intra(frame: &Frame, cfg: &CodecConfig) -> Result<EncodedGop> {
    cfg.validate()?;
    check_frame(frame)?;
    let intra = intra_code(frame, cfg)?;
    Ok(EncodedGop {
        payloads: GopPayloads {
            gop_type: GopType::Intra,
            reference: intra.bytes,
            motion: Vec::new(),
            residual: Vec::new(),
        },
        reconstruction: vec![intra.padded_recon.crop(frame.width(), frame.height())],
        field: None,
        residual_nonzero: 0,
        residual_coefficients: 0,
        saturated: intra.saturated,
    })
}

/// Level-1 subbands of the replicate-padded frame, as used for motion search.
pub fn search_bands(frame: &Frame, cfg: &CodecConfig) -> Result<SubbandSet> {
    let (pw, ph) = cfg.padded_dims(frame.width(), frame.height());
    analyze_level(&frame.pad_replicate(pw, ph))
}

/// Motion field for a pair, estimated on the original reference.
pub fn estimate_pair(reference: &Frame, target: &Frame, cfg: &CodecConfig) -> Result<MotionField> {
    cfg.validate()?;
    reference.check_same_dims(target)?;
    full_search(
        &search_bands(reference, cfg)?,
        &search_bands(target, cfg)?,
        &cfg.search_params(),
    )
}

pub fn encode_gop(reference: &Frame, target: &Frame, cfg: &CodecConfig) -> Result<EncodedGop> {
    let field = estimate_pair(reference, target, cfg)?;
    encode_gop_with_field(reference, target, &field, cfg)
}

/// Encodes a pair using a precomputed motion field.
pub fn encode_gop_with_field(
    reference: &Frame,
    target: &Frame,
    field: &MotionField,
    cfg: &CodecConfig,
) -> Result<EncodedGop> {
    cfg.validate()?;
    check_frame(reference)?;
    check_frame(target)?;
    reference.check_same_dims(target)?;
    let (w, h) = reference.dims();
    let (pw, ph) = cfg.padded_dims(w, h);
    if field.band_dims != (pw / 2, ph / 2)
        || field.block_size != cfg.block_size
        || field.precision != cfg.precision
    {
        return Err(Error::Dimension(format!(
            "motion field ({:?}, block {}, h {}) does not match configuration",
            field.band_dims, field.block_size, field.precision
        )));
    }

    let intra = intra_code(reference, cfg)?;
    // Open loop: the error frame is taken against the original reference;
    // the reconstruction uses the decoded one, exactly as the decoder does.
    let ref_bands = analyze_level(&reference.pad_replicate(pw, ph))?;
    let target_bands = analyze_level(&target.pad_replicate(pw, ph))?;
    let error_frame = motion::residual(&target_bands, &compensate(&ref_bands, field)?)?;
    let res_pyr = residual_pyramid(&error_frame, cfg.extra_levels)?;
    let (residual_bytes, decoded_res, residual_nonzero, res_saturated) =
        code_pyramid(&res_pyr, cfg.stored_threshold());
    let prediction = compensate(&intra.decoded.subbands(1)?, field)?;
    let target_bands_rec = motion::add_back(&prediction, &decoded_res.subbands(1)?)?;
    let target_rec = synthesize_level(&target_bands_rec)?.crop(w, h);

    Ok(EncodedGop {
        payloads: GopPayloads {
            gop_type: GopType::Pair,
            reference: intra.bytes,
            motion: encode_mv(field),
            residual: residual_bytes,
        },
        reconstruction: vec![intra.padded_recon.crop(w, h), target_rec],
        field: Some(field.clone()),
        residual_nonzero,
        residual_coefficients: pw * ph,
        saturated: intra.saturated + res_saturated,
    })
}

/// Decodes one GOP of a `width × height` sequence.
pub fn decode_gop(
    payloads: &GopPayloads,
    width: usize,
    height: usize,
    cfg: &CodecConfig,
) -> Result<Vec<Frame>> {
    cfg.validate()?;
    if width == 0 || height == 0 {
        return Err(Error::Dimension("empty frame size".into()));
    }
    let (pw, ph) = cfg.padded_dims(width, height);
    let ref_pyr = decode_pyramid(&payloads.reference, INTRA_LEVELS as usize, (pw, ph))?;
    let reference = haar_inverse(&ref_pyr)?.crop(width, height);
    match payloads.gop_type {
        GopType::Intra => {
            if !payloads.motion.is_empty() || !payloads.residual.is_empty() {
                return Err(Error::Corrupt(
                    "intra GOP carries motion or residual data".into(),
                ));
            }
            Ok(vec![reference])
        }
        GopType::Pair => {
            let geometry = MvGeometry {
                band_dims: (pw / 2, ph / 2),
                block_size: cfg.block_size,
                precision: cfg.precision,
            };
            let field = decode_mv(&payloads.motion, geometry)?;
            let prediction = compensate(&ref_pyr.subbands(1)?, &field)?;
            let res_pyr =
                decode_pyramid(&payloads.residual, 1 + cfg.extra_levels as usize, (pw, ph))?;
            let bands = motion::add_back(&prediction, &res_pyr.subbands(1)?)?;
            Ok(vec![
                reference,
                synthesize_level(&bands)?.crop(width, height),
            ])
        }
    }
}

/// Stream plus the encoder-side reconstruction of every frame.
#[derive(Clone, Debug)]
pub struct EncodedSequence {
    pub stream: EncodedStream,
    pub reconstruction: Vec<Frame>,
    pub gops: Vec<EncodedGop>,
}

fn check_sequence(frames: &[Frame]) -> Result<()> {
    let first = frames
        .first()
        .ok_or_else(|| Error::InvalidParameter("no frames to encode".into()))?;
    for f in frames {
        first.check_same_dims(f)?;
    }
    Ok(())
}

/// Motion fields for every `(2t, 2t+1)` pair, using the proposed in-band search.
pub fn estimate_sequence(frames: &[Frame], cfg: &CodecConfig) -> Result<Vec<MotionField>> {
    check_sequence(frames)?;
    frames
        .par_chunks_exact(2)
        .map(|pair| estimate_pair(&pair[0], &pair[1], cfg))
        .collect()
}

/// Encodes with precomputed per-pair motion fields (one per full pair).
pub fn encode_sequence_with_fields(
    frames: &[Frame],
    fields: &[MotionField],
    cfg: &CodecConfig,
) -> Result<EncodedSequence> {
    cfg.validate()?;
    check_sequence(frames)?;
    if fields.len() != frames.len() / 2 {
        return Err(Error::InvalidParameter(format!(
            "{} motion fields for {} pairs",
            fields.len(),
            frames.len() / 2
        )));
    }
    let (w, h) = frames[0].dims();
    let header = cfg.header(w, h, frames.len())?;
    let gops: Vec<EncodedGop> = frames
        .par_chunks(2)
        .enumerate()
        .map(|(i, chunk)| match chunk {
            [r, t] => encode_gop_with_field(r, t, &fields[i], cfg),
            [single] => encode_intra(single, cfg),
            _ => unreachable!("chunks of at most two"),
        })
        .collect::<Result<_>>()?;
    let reconstruction = gops
        .iter()
        .flat_map(|g| g.reconstruction.iter().cloned())
        .collect();
    let stream = EncodedStream {
        header,
        gops: gops.iter().map(|g| g.payloads.clone()).collect(),
    };
    Ok(EncodedSequence {
        stream,
        reconstruction,
        gops,
    })
}

pub fn encode_sequence_detailed(frames: &[Frame], cfg: &CodecConfig) -> Result<EncodedSequence> {
    cfg.validate()?;
    let fields = estimate_sequence(frames, cfg)?;
    encode_sequence_with_fields(frames, &fields, cfg)
}

pub fn encode_sequence(frames: &[Frame], cfg: &CodecConfig) -> Result<EncodedStream> {
    Ok(encode_sequence_detailed(frames, cfg)?.stream)
}

pub fn decode_sequence(stream: &EncodedStream) -> Result<Vec<Frame>> {
    let cfg = CodecConfig::from_header(&stream.header)?;
    let (w, h) = (stream.header.width as usize, stream.header.height as usize);
    let mut frames = Vec::with_capacity(stream.header.frame_count as usize);
    for g in &stream.gops {
        frames.extend(decode_gop(g, w, h, &cfg)?);
    }
    if frames.len() != stream.header.frame_count as usize {
        return Err(Error::Corrupt(format!(
            "decoded {} frames, header declares {}",
            frames.len(),
            stream.header.frame_count
        )));
    }
    Ok(frames)
}
