//! In-band motion-compensated temporal filtering on critically-sampled Haar
//! subbands.
//!
//! The crate performs motion estimation and compensation directly on the
//! level-1 DWT coefficients of a video frame. Arbitrary dyadic displacements
//! `s / 2^h` are realised exactly as a circular shift of the subbands
//! followed by one application of bidiagonal Toeplitz operators. No
//! upsampling, inverse transform or interpolation is involved. Around that
//! sits a small reference/target codec (threshold quantizer, canonical
//! Huffman residual coder, exp-Golomb motion vectors) and a rate-distortion
//! harness.
//!
//! Module map:
//!
//! * [`wavelet`]: orthonormal 2-D Haar analysis/synthesis and the
//!   zero-detail upsampling model.
//! * [`inband_shift`]: dyadic shift decomposition, band operators and the
//!   wavelet-domain shift itself.
//! * [`motion`]: full-search block matching over all four subbands,
//!   compensation and residuals.
//! * [`codec`]: quantization, entropy coding and the `WMC1` bitstream.
//! * [`video_io`]: Y4M, raw YUV 4:2:0 and PGM input/output.
//! * [`eval`]: PSNR, the band-to-band baseline and rate-distortion sweeps.

pub mod codec;
pub mod eval;
pub mod inband_shift;
pub mod motion;
mod plane;
pub mod video_io;
pub mod wavelet;

pub use plane::{Frame, Plane};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("frame of {width}x{height} is not divisible by 2^{levels}")]
    NotDivisible {
        width: usize,
        height: usize,
        levels: u32,
    },
    #[error("invalid shift: {0}")]
    InvalidShift(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed code table: {0}")]
    MalformedTable(String),
    #[error("truncated stream: {0}")]
    Truncated(String),
    #[error("corrupt stream: {0}")]
    Corrupt(String),
    #[error("bad magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported stream version {0}")]
    UnsupportedVersion(u8),
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: u64, message: String },
    #[error("frame {index} is truncated: {message}")]
    TruncatedFrame { index: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
