//! `WMC1` container.
//!
//! ```text
//! "WMC1"            4 bytes
//! version           u8 (= 1)
//! width, height     u16, u16
//! frame_count       u32
//! block_size        u8
//! precision_h       u8
//! search_range      u8
//! threshold         f32
//! extra_levels      u8
//! per GOP:
//!   gop_type        u8 (0 = pair, 1 = intra)
//!   reference, motion, residual: u32 length + bytes each (absent = length 0)
//! ```
//!
//! All multi-byte integers are little-endian.

use crate::{Error, Result};

pub const MAGIC: [u8; 4] = *b"WMC1";
pub const VERSION: u8 = 1;
pub const HEADER_BYTES: usize = 21;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StreamHeader {
    pub width: u16,
    pub height: u16,
    pub frame_count: u32,
    pub block_size: u8,
    pub precision: u8,
    pub search_range: u8,
    pub threshold: f32,
    pub extra_levels: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GopType {
    Pair = 0,
    Intra = 1,
}

impl GopType {
    pub fn frames(self) -> usize {
        match self {
            GopType::Pair => 2,
            GopType::Intra => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GopPayloads {
    pub gop_type: GopType,
    pub reference: Vec<u8>,
    pub motion: Vec<u8>,
    pub residual: Vec<u8>,
}

impl GopPayloads {
    /// Serialized size including type byte and length prefixes.
    pub fn byte_len(&self) -> usize {
        1 + 12 + self.reference.len() + self.motion.len() + self.residual.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncodedStream {
    pub header: StreamHeader,
    pub gops: Vec<GopPayloads>,
}

impl EncodedStream {
    pub fn to_bytes(&self) -> Vec<u8> {
        let h = &self.header;
        let mut out = Vec::with_capacity(
            HEADER_BYTES + self.gops.iter().map(|g| g.byte_len()).sum::<usize>(),
        );
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.extend_from_slice(&h.width.to_le_bytes());
        out.extend_from_slice(&h.height.to_le_bytes());
        out.extend_from_slice(&h.frame_count.to_le_bytes());
        out.push(h.block_size);
        out.push(h.precision);
        out.push(h.search_range);
        out.extend_from_slice(&h.threshold.to_le_bytes());
        out.push(h.extra_levels);
        for g in &self.gops {
            out.push(g.gop_type as u8);
            for p in [&g.reference, &g.motion, &g.residual] {
                out.extend_from_slice(&(p.len() as u32).to_le_bytes());
                out.extend_from_slice(p);
            }
        }
        out
    }

    pub fn byte_len(&self) -> usize {
        HEADER_BYTES + self.gops.iter().map(|g| g.byte_len()).sum::<usize>()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Cursor { bytes, pos: 0 };
        let magic: [u8; 4] = r.take(4, "magic")?.try_into().expect("4 bytes");
        if magic != MAGIC {
            return Err(Error::BadMagic(magic));
        }
        let version = r.u8("version")?;
        if version != VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let header = StreamHeader {
            width: r.u16("width")?,
            height: r.u16("height")?,
            frame_count: r.u32("frame count")?,
            block_size: r.u8("block size")?,
            precision: r.u8("precision")?,
            search_range: r.u8("search range")?,
            threshold: f32::from_le_bytes(r.take(4, "threshold")?.try_into().expect("4 bytes")),
            extra_levels: r.u8("extra levels")?,
        };
        let mut gops = Vec::new();
        let mut frames = 0usize;
        while frames < header.frame_count as usize {
            let gop_type = match r.u8("gop type")? {
                0 => GopType::Pair,
                1 => GopType::Intra,
                t => return Err(Error::Corrupt(format!("unknown gop type {t}"))),
            };
            let mut payload = |what| -> Result<Vec<u8>> {
                let len = r.u32(what)? as usize;
                Ok(r.take(len, what)?.to_vec())
            };
            let reference = payload("reference payload")?;
            let motion = payload("motion payload")?;
            let residual = payload("residual payload")?;
            frames += gop_type.frames();
            gops.push(GopPayloads {
                gop_type,
                reference,
                motion,
                residual,
            });
        }
        if frames != header.frame_count as usize {
            return Err(Error::Corrupt(format!(
                "GOPs cover {frames} frames, header declares {}",
                header.frame_count
            )));
        }
        if r.pos != bytes.len() {
            return Err(Error::Corrupt(format!(
                "{} trailing bytes after last GOP",
                bytes.len() - r.pos
            )));
        }
        Ok(Self { header, gops })
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Truncated(format!(
                "{what}: need {n} bytes at offset {}, {} left",
                self.pos,
                self.bytes.len() - self.pos
            )));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(
            self.take(2, what)?.try_into().expect("2 bytes"),
        ))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4, what)?.try_into().expect("4 bytes"),
        ))
    }
}
