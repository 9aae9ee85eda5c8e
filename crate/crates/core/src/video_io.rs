//! Luminance I/O: Y4M, raw planar YUV 4:2:0 and binary PGM (P5).
//!
//! Only the Y plane is read; chroma is skipped. Writers round to the nearest
//! integer and clamp to `[0, 255]`, counting clamped samples.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::{Error, Frame, Plane, Result};

/// Offset added to signed residuals before they are written as images.
pub const RESIDUAL_OFFSET: f64 = 128.0;
/// Largest accepted frame edge, matching the stream header's `u16` fields.
pub const MAX_DIMENSION: usize = u16::MAX as usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SourceFormat {
    Y4m,
    /// Headerless planar 4:2:0; dimensions come from the caller.
    RawYuv420 {
        width: usize,
        height: usize,
    },
    /// A single `.pgm` file, or a directory of them read in name order.
    PgmList,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceSource {
    pub path: PathBuf,
    pub format: SourceFormat,
}

impl SequenceSource {
    pub fn new(path: impl Into<PathBuf>, format: SourceFormat) -> Self {
        Self {
            path: path.into(),
            format,
        }
    }

    /// Picks the format from the path: `.y4m`, `.yuv` (needs `dims`), `.pgm`
    /// or a directory of PGM files.
    pub fn detect(path: impl Into<PathBuf>, dims: Option<(usize, usize)>) -> Result<Self> {
        let path = path.into();
        if path.is_dir() {
            return Ok(Self::new(path, SourceFormat::PgmList));
        }
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase());
        let format = match ext.as_deref() {
            Some("y4m") => SourceFormat::Y4m,
            Some("pgm") => SourceFormat::PgmList,
            Some("yuv") => {
                let (width, height) = dims.ok_or_else(|| {
                    Error::InvalidParameter("raw .yuv input needs explicit width and height".into())
                })?;
                SourceFormat::RawYuv420 { width, height }
            }
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "cannot tell the format of {}",
                    path.display()
                )))
            }
        };
        Ok(Self::new(path, format))
    }
}

/// Loads up to `max_frames` luminance frames (all when `None`).
pub fn load_frames(src: &SequenceSource, max_frames: Option<usize>) -> Result<Vec<Frame>> {
    let max = max_frames.unwrap_or(usize::MAX);
    match &src.format {
        SourceFormat::Y4m => Ok(parse_y4m(&fs::read(&src.path)?, max)?.1),
        SourceFormat::RawYuv420 { width, height } => {
            parse_raw_yuv420(&fs::read(&src.path)?, *width, *height, max)
        }
        SourceFormat::PgmList => {
            let files = if src.path.is_dir() {
                let mut v: Vec<PathBuf> = fs::read_dir(&src.path)?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| {
                        p.extension()
                            .and_then(|e| e.to_str())
                            .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
                    })
                    .collect();
                v.sort();
                v
            } else {
                vec![src.path.clone()]
            };
            files.iter().take(max).map(|p| read_pgm(p)).collect()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Y4mHeader {
    pub width: usize,
    pub height: usize,
    /// Raw `F` parameter, e.g. `30:1`.
    pub frame_rate: Option<String>,
    /// Raw `C` parameter, e.g. `420jpeg`; 4:2:0 when absent.
    pub colorspace: Option<String>,
}

impl Y4mHeader {
    /// Bytes of chroma following each luma plane.
    pub fn chroma_bytes(&self) -> Result<usize> {
        let (w, h) = (self.width, self.height);
        let (cw, ch) = (w.div_ceil(2), h.div_ceil(2));
        let cs = self.colorspace.as_deref().unwrap_or("420");
        Ok(match cs {
            "mono" => 0,
            "420" | "420jpeg" | "420paldv" | "420mpeg2" => 2 * cw * ch,
            "422" => 2 * cw * h,
            "444" => 2 * w * h,
            "444alpha" => 3 * w * h,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unsupported Y4M colorspace C{other}"
                )))
            }
        })
    }
}

fn parse_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        offset: offset as u64,
        message: message.into(),
    }
}

fn line_at(bytes: &[u8], start: usize) -> Result<(&[u8], usize)> {
    match bytes[start..].iter().position(|&b| b == b'\n') {
        Some(n) => Ok((&bytes[start..start + n], start + n + 1)),
        None => Err(parse_err(start, "missing newline")),
    }
}

pub fn parse_y4m_header(line: &[u8]) -> Result<Y4mHeader> {
    let text = std::str::from_utf8(line).map_err(|_| parse_err(0, "header is not ASCII"))?;
    let mut tokens = text.split(' ').filter(|t| !t.is_empty());
    if tokens.next() != Some("YUV4MPEG2") {
        return Err(parse_err(0, "missing YUV4MPEG2 signature"));
    }
    let (mut width, mut height, mut frame_rate, mut colorspace) = (None, None, None, None);
    let mut offset = "YUV4MPEG2".len();
    for tok in tokens {
        offset = text[offset..].find(tok).map_or(offset, |p| offset + p);
        if !tok.is_char_boundary(1) {
            continue;
        }
        let (key, val) = tok.split_at(1);
        match key {
            "W" | "H" => {
                let v: usize = val
                    .parse()
                    .map_err(|_| parse_err(offset, format!("bad dimension {tok}")))?;
                if v == 0 || v > MAX_DIMENSION {
                    return Err(parse_err(
                        offset,
                        format!("dimension {v} outside 1..={MAX_DIMENSION}"),
                    ));
                }
                if key == "W" {
                    width = Some(v)
                } else {
                    height = Some(v)
                }
            }
            "F" => frame_rate = Some(val.to_string()),
            "C" => colorspace = Some(val.to_string()),
            _ => {}
        }
    }
    Ok(Y4mHeader {
        width: width.ok_or_else(|| parse_err(0, "missing W"))?,
        height: height.ok_or_else(|| parse_err(0, "missing H"))?,
        frame_rate,
        colorspace,
    })
}

/// Parses a Y4M stream, keeping at most `max_frames` luminance planes.
pub fn parse_y4m(bytes: &[u8], max_frames: usize) -> Result<(Y4mHeader, Vec<Frame>)> {
    let (line, mut pos) = line_at(bytes, 0)?;
    let header = parse_y4m_header(line)?;
    let luma = header.width * header.height;
    let chroma = header.chroma_bytes()?;
    let mut frames = Vec::new();
    while pos < bytes.len() && frames.len() < max_frames {
        let index = frames.len();
        let (fline, next) = line_at(bytes, pos).map_err(|_| Error::TruncatedFrame {
            index,
            message: format!("frame header at byte {pos} has no newline"),
        })?;
        if !fline.starts_with(b"FRAME") {
            return Err(parse_err(pos, "expected FRAME marker"));
        }
        pos = next;
        if bytes.len() - pos < luma + chroma {
            return Err(Error::TruncatedFrame {
                index,
                message: format!(
                    "needs {} bytes at byte {pos}, {} remain",
                    luma + chroma,
                    bytes.len() - pos
                ),
            });
        }
        frames.push(luma_plane(
            &bytes[pos..pos + luma],
            header.width,
            header.height,
        ));
        pos += luma + chroma;
    }
    Ok((header, frames))
}

fn luma_plane(bytes: &[u8], width: usize, height: usize) -> Frame {
    Plane::from_vec(width, height, bytes.iter().map(|&b| b as f64).collect())
        .expect("slice holds width*height bytes")
}

pub fn raw_yuv420_frame_bytes(width: usize, height: usize) -> usize {
    width * height + 2 * width.div_ceil(2) * height.div_ceil(2)
}

pub fn parse_raw_yuv420(
    bytes: &[u8],
    width: usize,
    height: usize,
    max_frames: usize,
) -> Result<Vec<Frame>> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter(
            "raw YUV dimensions must be positive".into(),
        ));
    }
    let fsize = raw_yuv420_frame_bytes(width, height);
    let whole = bytes.len() / fsize;
    if !bytes.len().is_multiple_of(fsize) && whole < max_frames {
        return Err(Error::TruncatedFrame {
            index: whole,
            message: format!(
                "{} trailing bytes, frame size is {fsize} for {width}x{height}",
                bytes.len() % fsize
            ),
        });
    }
    Ok(bytes
        .chunks_exact(fsize)
        .take(max_frames)
        .map(|c| luma_plane(&c[..width * height], width, height))
        .collect())
}

fn to_byte(v: f64, clamped: &mut usize) -> u8 {
    let r = v.round();
    if !(0.0..=255.0).contains(&r) {
        *clamped += 1;
    }
    if r.is_nan() {
        return 0;
    }
    r.clamp(0.0, 255.0) as u8
}

/// Rounded, clamped 8-bit samples and the number of clamped values.
pub fn frame_to_bytes(frame: &Frame) -> (Vec<u8>, usize) {
    let mut clamped = 0;
    let out = frame
        .data()
        .iter()
        .map(|&v| to_byte(v, &mut clamped))
        .collect();
    (out, clamped)
}

/// Binary PGM (P5, maxval 255).
pub fn encode_pgm(frame: &Frame) -> (Vec<u8>, usize) {
    let (pixels, clamped) = frame_to_bytes(frame);
    let mut out = format!("P5\n{} {}\n255\n", frame.width(), frame.height()).into_bytes();
    out.extend(pixels);
    (out, clamped)
}

fn pgm_token(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
        *pos += 1;
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| parse_err(start, "expected a decimal number"))
}

pub fn parse_pgm(bytes: &[u8]) -> Result<Frame> {
    if !bytes.starts_with(b"P5") {
        return Err(parse_err(0, "not a binary PGM (P5)"));
    }
    let mut pos = 2;
    let width = pgm_token(bytes, &mut pos)?;
    let height = pgm_token(bytes, &mut pos)?;
    let maxval = pgm_token(bytes, &mut pos)?;
    if width == 0 || height == 0 || width > MAX_DIMENSION || height > MAX_DIMENSION {
        return Err(parse_err(
            3,
            format!("dimensions {width}x{height} outside 1..={MAX_DIMENSION}"),
        ));
    }
    if maxval == 0 || maxval > 255 {
        return Err(parse_err(pos, format!("unsupported maxval {maxval}")));
    }
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(parse_err(pos, "missing separator before raster"));
    }
    pos += 1;
    let need = width * height;
    if bytes.len() - pos < need {
        return Err(Error::TruncatedFrame {
            index: 0,
            message: format!(
                "raster needs {need} bytes at byte {pos}, {} remain",
                bytes.len() - pos
            ),
        });
    }
    Ok(luma_plane(&bytes[pos..pos + need], width, height))
}

pub fn read_pgm(path: &Path) -> Result<Frame> {
    parse_pgm(&fs::read(path)?)
}

/// Writes a PGM; returns the number of clamped samples.
pub fn save_frame(frame: &Frame, path: &Path) -> Result<usize> {
    let (bytes, clamped) = encode_pgm(frame);
    fs::write(path, bytes)?;
    Ok(clamped)
}

/// Writes a signed residual as a PGM, offset by [`RESIDUAL_OFFSET`].
pub fn save_residual(residual: &Frame, path: &Path) -> Result<usize> {
    save_frame(&residual.map(|v| v + RESIDUAL_OFFSET), path)
}

/// Y4M with the given colorspace tag (`mono` or a 4:2:0 variant; chroma is mid-grey).
pub fn encode_y4m(
    frames: &[Frame],
    frame_rate: &str,
    colorspace: &str,
) -> Result<(Vec<u8>, usize)> {
    let first = frames
        .first()
        .ok_or_else(|| Error::InvalidParameter("no frames to write".into()))?;
    let header = Y4mHeader {
        width: first.width(),
        height: first.height(),
        frame_rate: Some(frame_rate.to_string()),
        colorspace: Some(colorspace.to_string()),
    };
    let chroma = header.chroma_bytes()?;
    let mut out = Vec::new();
    writeln!(
        out,
        "YUV4MPEG2 W{} H{} F{} Ip A1:1 C{}",
        header.width, header.height, frame_rate, colorspace
    )?;
    let mut clamped = 0;
    for f in frames {
        first.check_same_dims(f)?;
        out.extend_from_slice(b"FRAME\n");
        let (px, c) = frame_to_bytes(f);
        clamped += c;
        out.extend(px);
        out.resize(out.len() + chroma, 128);
    }
    Ok((out, clamped))
}

pub fn encode_raw_yuv420(frames: &[Frame]) -> Result<(Vec<u8>, usize)> {
    let mut out = Vec::new();
    let mut clamped = 0;
    for f in frames {
        let (px, c) = frame_to_bytes(f);
        clamped += c;
        out.extend(px);
        out.resize(
            out.len() + 2 * f.width().div_ceil(2) * f.height().div_ceil(2),
            128,
        );
    }
    Ok((out, clamped))
}
