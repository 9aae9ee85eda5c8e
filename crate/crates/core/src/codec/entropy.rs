//! Canonical Huffman coding of quantized planes.
//!
//! Payload layout:
//!
//! ```text
//! u16 plane_count
//! per plane: u16 width, u16 height, f64 scale          (little-endian)
//! bitstream (MSB first):
//!   ue(symbol_count)
//!   ue(first_symbol), ue(gap - 1) ...                   ascending symbol ids
//!   5-bit code length per symbol
//!   codewords until every sample is covered
//! ```
//!
//! Samples of all planes are scanned in order as one sequence. Zero runs
//! become `Run(c)` symbols covering lengths `[2^c, 2^(c+1))`, followed by
//! `c` raw bits. Nonzero values are symbols of their own.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use super::bits::{BitReader, BitWriter};
use super::quant::QuantizedPlane;
use crate::{Error, Result};

const RUN_CLASSES: u32 = 32;
/// Longest permitted codeword.
pub const MAX_CODE_LEN: u32 = 24;
const PLANE_HEADER_BYTES: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Token {
    Run { class: u32, extra: u32 },
    Value(i16),
}

fn symbol_id(t: Token) -> u32 {
    match t {
        Token::Run { class, .. } => class,
        Token::Value(v) => {
            let v = v as i32;
            let zig = if v > 0 { 2 * v - 2 } else { -2 * v - 1 };
            RUN_CLASSES + zig as u32
        }
    }
}

fn value_of(id: u32) -> Result<i16> {
    let zig = (id - RUN_CLASSES) as i32;
    let v = if zig % 2 == 0 {
        zig / 2 + 1
    } else {
        -(zig + 1) / 2
    };
    i16::try_from(v).map_err(|_| Error::MalformedTable(format!("symbol {id} out of range")))
}

fn tokenize(planes: &[QuantizedPlane]) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut run = 0u32;
    let flush = |run: &mut u32, tokens: &mut Vec<Token>| {
        if *run > 0 {
            let class = 31 - run.leading_zeros();
            tokens.push(Token::Run {
                class,
                extra: *run - (1 << class),
            });
            *run = 0;
        }
    };
    for v in planes.iter().flat_map(|p| p.values.iter().copied()) {
        if v == 0 {
            run += 1;
        } else {
            flush(&mut run, &mut tokens);
            tokens.push(Token::Value(v));
        }
    }
    flush(&mut run, &mut tokens);
    tokens
}

/// Huffman code lengths for `(symbol, count)` pairs, limited to [`MAX_CODE_LEN`].
pub fn code_lengths(freqs: &BTreeMap<u32, u64>) -> BTreeMap<u32, u32> {
    let symbols: Vec<u32> = freqs.keys().copied().collect();
    if symbols.len() <= 1 {
        return symbols.into_iter().map(|s| (s, 1)).collect();
    }
    let mut counts: Vec<u64> = freqs.values().copied().collect();
    loop {
        let lens = huffman_depths(&counts);
        if lens.iter().all(|&l| l <= MAX_CODE_LEN) {
            return symbols.into_iter().zip(lens).collect();
        }
        for c in &mut counts {
            *c = (*c).div_ceil(2);
        }
    }
}

fn huffman_depths(counts: &[u64]) -> Vec<u32> {
    let n = counts.len();
    // parent links; leaves are 0..n
    let mut parent = vec![usize::MAX; n];
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| Reverse((c, i)))
        .collect();
    while heap.len() > 1 {
        let Reverse((c1, a)) = heap.pop().expect("len > 1");
        let Reverse((c2, b)) = heap.pop().expect("len > 1");
        let node = parent.len();
        parent.push(usize::MAX);
        parent[a] = node;
        parent[b] = node;
        heap.push(Reverse((c1 + c2, node)));
    }
    (0..n)
        .map(|leaf| {
            let mut d = 0;
            let mut i = leaf;
            while parent[i] != usize::MAX {
                i = parent[i];
                d += 1;
            }
            d
        })
        .collect()
}

/// Canonical codes: `(length, code)` per symbol, assigned in (length, symbol) order.
fn canonical_codes(lengths: &BTreeMap<u32, u32>) -> BTreeMap<u32, (u32, u32)> {
    let mut order: Vec<(u32, u32)> = lengths.iter().map(|(&s, &l)| (l, s)).collect();
    order.sort_unstable();
    let mut out = BTreeMap::new();
    let mut code = 0u32;
    let mut prev_len = 0u32;
    for (len, sym) in order {
        code <<= len - prev_len;
        out.insert(sym, (len, code));
        code += 1;
        prev_len = len;
    }
    out
}

struct Decoder {
    /// Symbols sorted by (length, id).
    sorted: Vec<u32>,
    /// Per length: first code, count, offset into `sorted`.
    first: [u32; MAX_CODE_LEN as usize + 1],
    count: [u32; MAX_CODE_LEN as usize + 1],
    offset: [u32; MAX_CODE_LEN as usize + 1],
}

impl Decoder {
    fn new(lengths: &BTreeMap<u32, u32>) -> Result<Self> {
        let kraft: f64 = lengths.values().map(|&l| 0.5f64.powi(l as i32)).sum();
        if kraft > 1.0 {
            return Err(Error::MalformedTable(format!(
                "Kraft sum {kraft} exceeds 1"
            )));
        }
        let mut order: Vec<(u32, u32)> = lengths.iter().map(|(&s, &l)| (l, s)).collect();
        order.sort_unstable();
        let mut count = [0u32; MAX_CODE_LEN as usize + 1];
        for &(l, _) in &order {
            count[l as usize] += 1;
        }
        let mut first = [0u32; MAX_CODE_LEN as usize + 1];
        let mut offset = [0u32; MAX_CODE_LEN as usize + 1];
        let (mut code, mut off) = (0u32, 0u32);
        for l in 1..=MAX_CODE_LEN as usize {
            code <<= 1;
            first[l] = code;
            offset[l] = off;
            code += count[l];
            off += count[l];
        }
        Ok(Self {
            sorted: order.into_iter().map(|(_, s)| s).collect(),
            first,
            count,
            offset,
        })
    }

    fn read(&self, r: &mut BitReader) -> Result<u32> {
        let mut code = 0u32;
        for l in 1..=MAX_CODE_LEN as usize {
            code = (code << 1) | r.read_bit()? as u32;
            let rel = code.wrapping_sub(self.first[l]);
            if code >= self.first[l] && rel < self.count[l] {
                return Ok(self.sorted[(self.offset[l] + rel) as usize]);
            }
        }
        Err(Error::Corrupt("codeword not in table".into()))
    }
}

/// Serializes quantized planes with a per-payload canonical Huffman code.
pub fn entropy_encode(planes: &[QuantizedPlane]) -> Vec<u8> {
    let mut out = Vec::with_capacity(2 + PLANE_HEADER_BYTES * planes.len());
    out.extend_from_slice(&(planes.len() as u16).to_le_bytes());
    for p in planes {
        out.extend_from_slice(&(p.width as u16).to_le_bytes());
        out.extend_from_slice(&(p.height as u16).to_le_bytes());
        out.extend_from_slice(&p.scale.to_le_bytes());
    }

    let tokens = tokenize(planes);
    let mut freqs: BTreeMap<u32, u64> = BTreeMap::new();
    for &t in &tokens {
        *freqs.entry(symbol_id(t)).or_default() += 1;
    }
    let lengths = code_lengths(&freqs);
    let codes = canonical_codes(&lengths);

    let mut w = BitWriter::new();
    w.write_ue(lengths.len() as u64);
    let mut prev: Option<u32> = None;
    for &s in lengths.keys() {
        match prev {
            None => w.write_ue(s as u64),
            Some(p) => w.write_ue((s - p - 1) as u64),
        }
        prev = Some(s);
    }
    for &l in lengths.values() {
        w.write_bits(l as u64, 5);
    }
    for t in tokens {
        let (len, code) = codes[&symbol_id(t)];
        w.write_bits(code as u64, len);
        if let Token::Run { class, extra } = t {
            w.write_bits(extra as u64, class);
        }
    }
    out.extend(w.finish());
    out
}

fn take<'a>(bytes: &'a [u8], pos: &mut usize, n: usize) -> Result<&'a [u8]> {
    if bytes.len() < *pos + n {
        return Err(Error::Truncated(format!(
            "plane header needs {n} bytes at offset {pos}"
        )));
    }
    let s = &bytes[*pos..*pos + n];
    *pos += n;
    Ok(s)
}

/// Sample budget for [`entropy_decode`] (64 Mi coefficients).
pub const MAX_DECODED_SAMPLES: usize = 1 << 26;

/// Inverse of [`entropy_encode`].
pub fn entropy_decode(bytes: &[u8]) -> Result<Vec<QuantizedPlane>> {
    entropy_decode_bounded(bytes, MAX_DECODED_SAMPLES)
}

/// As [`entropy_decode`], rejecting payloads whose plane headers declare more
/// than `max_samples` coefficients before anything is allocated.
pub fn entropy_decode_bounded(bytes: &[u8], max_samples: usize) -> Result<Vec<QuantizedPlane>> {
    let mut pos = 0usize;
    let count = u16::from_le_bytes(take(bytes, &mut pos, 2)?.try_into().expect("2 bytes")) as usize;
    let mut planes = Vec::with_capacity(count.min(bytes.len() / 12));
    let mut total = 0usize;
    for _ in 0..count {
        let width =
            u16::from_le_bytes(take(bytes, &mut pos, 2)?.try_into().expect("2 bytes")) as usize;
        let height =
            u16::from_le_bytes(take(bytes, &mut pos, 2)?.try_into().expect("2 bytes")) as usize;
        let scale = f64::from_le_bytes(take(bytes, &mut pos, 8)?.try_into().expect("8 bytes"));
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Corrupt(format!("invalid plane scale {scale}")));
        }
        total += width * height;
        if total > max_samples {
            return Err(Error::Corrupt(format!(
                "plane headers declare more than {max_samples} samples"
            )));
        }
        planes.push(QuantizedPlane {
            width,
            height,
            values: Vec::new(),
            scale,
            saturated: 0,
        });
    }

    let mut r = BitReader::new(&bytes[pos..]);
    let nsym = r.read_ue()?;
    if nsym > (RUN_CLASSES as u64 + (1 << 17)) {
        return Err(Error::MalformedTable(format!("{nsym} symbols")));
    }
    let mut symbols = Vec::with_capacity(nsym as usize);
    let mut next = 0u64;
    for i in 0..nsym {
        let v = r.read_ue()?;
        let s = if i == 0 { v } else { next + v };
        if s > u32::MAX as u64 {
            return Err(Error::MalformedTable(format!("symbol id {s} overflows")));
        }
        if s >= RUN_CLASSES as u64 {
            value_of(s as u32)?;
        }
        symbols.push(s as u32);
        next = s + 1;
    }
    let mut lengths = BTreeMap::new();
    for &s in &symbols {
        let l = r.read_bits(5)? as u32;
        if l == 0 || l > MAX_CODE_LEN {
            return Err(Error::MalformedTable(format!(
                "code length {l} for symbol {s}"
            )));
        }
        lengths.insert(s, l);
    }
    if total > 0 && lengths.is_empty() {
        return Err(Error::MalformedTable(
            "empty table for non-empty planes".into(),
        ));
    }

    let mut flat: Vec<i16> = Vec::with_capacity(total.min(1 << 20));
    if total > 0 {
        let dec = Decoder::new(&lengths)?;
        while flat.len() < total {
            let id = dec.read(&mut r)?;
            if id < RUN_CLASSES {
                let extra = r.read_bits(id)? as usize;
                let run = (1usize << id) + extra;
                if flat.len() + run > total {
                    return Err(Error::Corrupt(format!(
                        "zero run of {run} overflows {total} samples"
                    )));
                }
                flat.resize(flat.len() + run, 0);
            } else {
                flat.push(value_of(id)?);
            }
        }
    }
    let mut it = flat.into_iter();
    for p in &mut planes {
        p.values.extend(it.by_ref().take(p.width * p.height));
    }
    Ok(planes)
}
