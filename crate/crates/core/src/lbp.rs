//! Rotation-invariant uniform local binary patterns (riu2).
//!
//! Neighbors are sampled on a circle of radius `r` around each pixel. Neighbor
//! `i` sits at angle `2πi/p`, counter-clockwise from the positive horizontal
//! axis, at offset `(r cos θ, -r sin θ)` in (column, row) coordinates. A
//! coordinate within [`LATTICE_SNAP`] of an integer is rounded to it, the
//! rest are sampled bilinearly. Interpolation weights come from the fractional
//! part of the offset (not of the absolute position), so every pixel sees the
//! same weights.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Distance below which a sampling coordinate is treated as an exact lattice
/// coordinate.
pub const LATTICE_SNAP: f64 = 1e-6;

/// Largest supported neighbor count (codes are packed into a `u64`).
pub const MAX_NEIGHBORS: usize = 64;

/// A `(P, R)` neighborhood: `p` neighbors on a circle of radius `r` pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LbpConfig {
    p: usize,
    r: f64,
}

impl LbpConfig {
    pub fn new(p: usize, r: f64) -> Result<Self> {
        if !(4..=MAX_NEIGHBORS).contains(&p) {
            return Err(Error::validation(format!(
                "neighbor count must be in 4..={MAX_NEIGHBORS}, got {p}"
            )));
        }
        if !r.is_finite() || r < 1.0 {
            return Err(Error::validation(format!("radius must be >= 1, got {r}")));
        }
        Ok(LbpConfig { p, r })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Padding needed so every circle sample stays inside the image.
    pub fn pad(&self) -> usize {
        self.r.ceil() as usize
    }

    /// Number of distinct riu2 codes, `p + 2`.
    pub fn bins(&self) -> usize {
        self.p + 2
    }

    /// The non-uniform catch-all code, `p + 1`.
    pub fn nonuniform_code(&self) -> u32 {
        self.p as u32 + 1
    }
}

impl std::fmt::Display for LbpConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.p, self.r)
    }
}

/// Per-pixel riu2 codes.
#[derive(Debug, Clone, PartialEq)]
pub struct LbpMap {
    width: usize,
    height: usize,
    codes: Vec<u32>,
    config: LbpConfig,
}

impl LbpMap {
    pub fn new(width: usize, height: usize, codes: Vec<u32>, config: LbpConfig) -> Result<Self> {
        if width == 0 || height == 0 || codes.len() != width * height {
            return Err(Error::validation(format!(
                "{} codes do not fill a {width}x{height} map",
                codes.len()
            )));
        }
        if let Some(c) = codes.iter().find(|&&c| c > config.nonuniform_code()) {
            return Err(Error::validation(format!(
                "code {c} out of range for P = {}",
                config.p
            )));
        }
        Ok(LbpMap {
            width,
            height,
            codes,
            config,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    pub fn config(&self) -> LbpConfig {
        self.config
    }
}

/// Normalized code frequencies, one bin per riu2 code.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    bins: Vec<f64>,
}

impl Histogram {
    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }
}

/// Where one neighbor is read relative to the center pixel.
#[derive(Debug, Clone, Copy)]
struct Tap {
    // integer part of the offset (floor, or the snapped value)
    dx: isize,
    dy: isize,
    // fractional part, exactly 0.0 when the coordinate was snapped
    fx: f64,
    fy: f64,
}

impl Tap {
    fn new(index: usize, config: LbpConfig) -> Self {
        let theta = 2.0 * PI * index as f64 / config.p as f64;
        let (dx, fx) = split_coord(config.r * theta.cos());
        let (dy, fy) = split_coord(-config.r * theta.sin());
        Tap { dx, dy, fx, fy }
    }

    /// Column/row extents touched relative to the center, inclusive.
    fn reach(&self) -> (isize, isize, isize, isize) {
        let x1 = self.dx + (self.fx != 0.0) as isize;
        let y1 = self.dy + (self.fy != 0.0) as isize;
        (self.dx, x1, self.dy, y1)
    }
}

fn split_coord(v: f64) -> (isize, f64) {
    let nearest = v.round();
    if (v - nearest).abs() < LATTICE_SNAP {
        (nearest as isize, 0.0)
    } else {
        let fl = v.floor();
        (fl as isize, v - fl)
    }
}

/// Bilinear read at `(x + dx + fx, y + dy + fy)`. Written as nested lerps so a
/// constant neighborhood reproduces its value exactly.
#[inline]
fn read(data: &[f64], width: usize, base: usize, tap: &Tap) -> f64 {
    let a = data[base];
    if tap.fx == 0.0 && tap.fy == 0.0 {
        return a;
    }
    if tap.fy == 0.0 {
        return a + tap.fx * (data[base + 1] - a);
    }
    let c = data[base + width];
    if tap.fx == 0.0 {
        return a + tap.fy * (c - a);
    }
    let top = a + tap.fx * (data[base + 1] - a);
    let bottom = c + tap.fx * (data[base + width + 1] - c);
    top + tap.fy * (bottom - top)
}

/// Samples the `p` circle neighbors of pixel `(x, y)`.
pub fn sample_neighbors(image: &GrayImage, x: usize, y: usize, config: LbpConfig) -> Result<Vec<f64>> {
    let (w, h) = image.dimensions();
    (0..config.p)
        .map(|i| {
            let tap = Tap::new(i, config);
            let (x0, x1, y0, y1) = tap.reach();
            let (x, y) = (x as isize, y as isize);
            if x + x0 < 0 || y + y0 < 0 || x + x1 >= w as isize || y + y1 >= h as isize {
                return Err(Error::OutOfBounds {
                    x: x as f64 + tap.dx as f64 + tap.fx,
                    y: y as f64 + tap.dy as f64 + tap.fy,
                    width: w,
                    height: h,
                });
            }
            let base = (y + tap.dy) as usize * w + (x + tap.dx) as usize;
            Ok(read(image.data(), w, base, &tap))
        })
        .collect()
}

/// Number of 0/1 transitions around the circular bit sequence.
pub fn uniformity(bits: &[u8]) -> u32 {
    match bits {
        [] => 0,
        [first, ..] => {
            let last = bits[bits.len() - 1];
            let wrap = (last != *first) as u32;
            wrap + bits.windows(2).filter(|w| w[0] != w[1]).count() as u32
        }
    }
}

/// Strict step: 1 for positive input, 0 otherwise (including zero).
#[inline]
pub fn heaviside(v: f64) -> u8 {
    (v > 0.0) as u8
}

/// The riu2 code of a center value and its circularly ordered neighbors:
/// the number of brighter neighbors for uniform patterns (at most two
/// transitions), `p + 1` otherwise.
pub fn riu2_code(center: f64, neighbors: &[f64]) -> u32 {
    let bits: Vec<u8> = neighbors.iter().map(|&g| heaviside(g - center)).collect();
    if uniformity(&bits) <= 2 {
        bits.iter().map(|&b| b as u32).sum()
    } else {
        neighbors.len() as u32 + 1
    }
}

/// Code map of an image already padded by `config.pad()` pixels on each side.
/// The output covers the unpadded interior.
pub fn lbp_map(padded: &GrayImage, config: LbpConfig) -> Result<LbpMap> {
    let pad = config.pad();
    let (pw, ph) = padded.dimensions();
    if pw < 2 * pad + 1 || ph < 2 * pad + 1 {
        return Err(Error::validation(format!(
            "a {pw}x{ph} image is too small for radius {} (needs at least {}x{})",
            config.r,
            2 * pad + 1,
            2 * pad + 1
        )));
    }
    let (w, h) = (pw - 2 * pad, ph - 2 * pad);
    let taps: Vec<Tap> = (0..config.p).map(|i| Tap::new(i, config)).collect();
    // signed flat offset of each tap's base pixel
    let offsets: Vec<isize> = taps
        .iter()
        .map(|t| t.dy * pw as isize + t.dx)
        .collect();
    let p = config.p as u32;
    let mask = if p == 64 { u64::MAX } else { (1u64 << p) - 1 };
    let data = padded.data();
    let mut codes = Vec::with_capacity(w * h);
    for y in pad..pad + h {
        for x in pad..pad + w {
            let center_idx = y * pw + x;
            let center = data[center_idx];
            let mut pattern = 0u64;
            for (bit, (tap, off)) in taps.iter().zip(&offsets).enumerate() {
                let base = (center_idx as isize + off) as usize;
                if read(data, pw, base, tap) > center {
                    pattern |= 1 << bit;
                }
            }
            let rotated = ((pattern >> 1) | (pattern << (p - 1))) & mask;
            let transitions = (pattern ^ rotated).count_ones();
            codes.push(if transitions <= 2 {
                pattern.count_ones()
            } else {
                p + 1
            });
        }
    }
    Ok(LbpMap {
        width: w,
        height: h,
        codes,
        config,
    })
}

/// Frequencies of every code `0..=p+1`, including empty bins.
pub fn histogram(map: &LbpMap) -> Histogram {
    let mut counts = vec![0usize; map.config.bins()];
    for &c in &map.codes {
        counts[c as usize] += 1;
    }
    let total = map.codes.len() as f64;
    Histogram {
        bins: counts.into_iter().map(|c| c as f64 / total).collect(),
    }
}

/// Codes rescaled to `[0, 1]` by dividing by `p + 1`.
pub fn normalize_map(map: &LbpMap) -> GrayImage {
    let scale = map.config.nonuniform_code() as f64;
    GrayImage::from_raw(
        map.width,
        map.height,
        map.codes.iter().map(|&c| c as f64 / scale).collect(),
    )
}
