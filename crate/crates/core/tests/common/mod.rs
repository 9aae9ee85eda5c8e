//! Test-only oracles and fixtures. Nothing here calls into the in-band shift
//! implementation.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wmc::wavelet::SubbandSet;
use wmc::{Frame, Plane};

pub fn random_frame(w: usize, h: usize, seed: u64) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Plane::from_fn(w, h, |_, _| rng.gen_range(0.0..255.0))
}

pub fn random_integer_frame(w: usize, h: usize, seed: u64) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Plane::from_fn(w, h, |_, _| rng.gen_range(0..=255) as f64)
}

/// Periodic, band-limited texture with some fine detail; values in roughly [20, 235].
pub fn smooth_texture(w: usize, h: usize, seed: u64) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let waves: Vec<(f64, f64, f64, f64)> = (0..6)
        .map(|_| {
            let kx = rng.gen_range(1..=4) as f64;
            let ky = rng.gen_range(1..=4) as f64;
            (
                kx,
                ky,
                rng.gen_range(0.0..std::f64::consts::TAU),
                rng.gen_range(8.0..25.0),
            )
        })
        .collect();
    let noise: Vec<f64> = (0..w * h).map(|_| rng.gen_range(-4.0..4.0)).collect();
    Plane::from_fn(w, h, |x, y| {
        let (u, v) = (x as f64 / w as f64, y as f64 / h as f64);
        let s: f64 = waves
            .iter()
            .map(|&(kx, ky, ph, a)| a * (std::f64::consts::TAU * (kx * u + ky * v) + ph).sin())
            .sum();
        (128.0 + s + noise[y * w + x]).clamp(0.0, 255.0)
    })
}

fn upsample(frame: &Frame, h: u32) -> Frame {
    let f = 1usize << h;
    let mut out = Plane::zeros(frame.width() * f, frame.height() * f);
    for y in 0..out.height() {
        for x in 0..out.width() {
            out[(x, y)] = frame[(x / f, y / f)] / f as f64;
        }
    }
    out
}

fn rotate(p: &Plane, dx: i64, dy: i64) -> Plane {
    let (w, h) = (p.width() as i64, p.height() as i64);
    let mut out = Plane::zeros(p.width(), p.height());
    for y in 0..h {
        for x in 0..w {
            let sx = (x - dx).rem_euclid(w) as usize;
            let sy = (y - dy).rem_euclid(h) as usize;
            out[(x as usize, y as usize)] = p[(sx, sy)];
        }
    }
    out
}

/// One orthonormal Haar level from the 2×2 block formulas.
pub fn haar_level(p: &Plane) -> SubbandSet {
    let (w, h) = (p.width() / 2, p.height() / 2);
    let at = |x: usize, y: usize, dx: usize, dy: usize| p[(2 * x + dx, 2 * y + dy)];
    let band = |sa: f64, sb: f64, sc: f64| {
        Plane::from_fn(w, h, |x, y| {
            (at(x, y, 0, 0) + sa * at(x, y, 1, 0) + sb * at(x, y, 0, 1) + sc * at(x, y, 1, 1)) / 2.0
        })
    };
    SubbandSet {
        approx: band(1.0, 1.0, 1.0),
        horizontal: band(-1.0, 1.0, -1.0),
        vertical: band(1.0, -1.0, -1.0),
        diagonal: band(-1.0, -1.0, 1.0),
    }
}

fn approx_after(p: &Plane, levels: u32) -> Plane {
    (0..levels).fold(p.clone(), |a, _| haar_level(&a).approx)
}

/// Level-1 subbands of `frame` displaced by `(sx, sy) / 2^h` pixels:
/// zero-detail upsampling, circular integer shift, analysis back down.
pub fn oracle_bands(frame: &Frame, sx: i64, sy: i64, h: u32) -> SubbandSet {
    let rolled = rotate(&upsample(frame, h), sx, sy);
    haar_level(&approx_after(&rolled, h))
}

/// Pixel-domain frame displaced by `(sx, sy) / 2^h` pixels under the same model.
pub fn oracle_frame(frame: &Frame, sx: i64, sy: i64, h: u32) -> Frame {
    let rolled = rotate(&upsample(frame, h), sx, sy);
    approx_after(&rolled, h)
}

/// `(ref, target)` pairs with target = reference displaced by `(sx, sy)/2^h`;
/// successive pairs also pan by whole pixels.
pub fn translating_sequence(base: &Frame, pairs: usize, sx: i64, sy: i64, h: u32) -> Vec<Frame> {
    let mut out = Vec::with_capacity(2 * pairs);
    for t in 0..pairs as i64 {
        let r = rotate(base, 3 * t, t);
        let target = oracle_frame(&r, sx, sy, h);
        out.push(r);
        out.push(target);
    }
    out
}

/// Dense `n × n` matrix product helpers for an independent evaluation route.
pub type Dense = Vec<Vec<f64>>;

pub fn to_dense(p: &Plane) -> Dense {
    p.rows().map(|r| r.to_vec()).collect()
}

pub fn from_dense(d: &Dense) -> Plane {
    Plane::from_rows(d).unwrap()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for l in 0..k {
            let s = a[i][l];
            if s == 0.0 {
                continue;
            }
            for j in 0..m {
                out[i][j] += s * b[l][j];
            }
        }
    }
    out
}

pub fn add(terms: &[(f64, Dense)]) -> Dense {
    let mut out = vec![vec![0.0; terms[0].1[0].len()]; terms[0].1.len()];
    for (c, t) in terms {
        for (o, r) in out.iter_mut().zip(t) {
            for (x, y) in o.iter_mut().zip(r) {
                *x += c * y;
            }
        }
    }
    out
}

pub fn triple(l: &Dense, x: &Dense, r: &Dense) -> Dense {
    matmul(&matmul(l, x), r)
}
