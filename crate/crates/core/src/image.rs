//! Grayscale images in `[0, 1]`, raster decoding and symmetric padding.
//!
//! A [`GrayImage`] is also the state grid of the automaton: every cell holds
//! one real-valued state and evolves in place of the pixel intensity.

use std::path::Path;

use image::{DynamicImage, ImageReader};

use crate::error::{Error, Result};

const LUMA_R: f64 = 0.299;
const LUMA_G: f64 = 0.587;
const LUMA_B: f64 = 0.114;

/// Row-major grid of intensities, every value in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::validation(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::validation(format!(
                "expected {} values for a {width}x{height} image, got {}",
                width * height,
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::validation(format!(
                "pixel value {v} outside [0, 1]"
            )));
        }
        Ok(GrayImage {
            width,
            height,
            data,
        })
    }

    /// Image with every pixel set to `value`.
    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    /// Trusted constructor for internal producers whose outputs are in range
    /// by construction.
    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        debug_assert!(data.iter().all(|v| (0.0..=1.0).contains(v)));
        GrayImage {
            width,
            height,
            data,
        }
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

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    /// Rotates the image a quarter turn counter-clockwise.
    pub fn rotate90(&self) -> GrayImage {
        let (w, h) = (self.width, self.height);
        let mut data = Vec::with_capacity(w * h);
        for ny in 0..w {
            for nx in 0..h {
                data.push(self.get(w - 1 - ny, nx));
            }
        }
        GrayImage::from_raw(h, w, data)
    }
}

/// Decodes a raster file into a normalized grayscale image.
///
/// Color inputs are reduced with fixed luminance weights
/// (0.299 R + 0.587 G + 0.114 B) after dividing each channel by its maximum
/// code value; alpha is ignored.
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    let decoded = reader.decode().map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Format {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    })?;
    from_dynamic(&decoded).map_err(|e| match e {
        Error::Validation(msg) => Error::Validation(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Converts an already decoded image.
pub fn from_dynamic(img: &DynamicImage) -> Result<GrayImage> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    if w == 0 || h == 0 {
        return Err(Error::validation("zero-dimension image"));
    }
    let data: Vec<f64> = match img {
        DynamicImage::ImageLuma8(b) => b.pixels().map(|p| p[0] as f64 / 255.0).collect(),
        DynamicImage::ImageLumaA8(b) => b.pixels().map(|p| p[0] as f64 / 255.0).collect(),
        DynamicImage::ImageLuma16(b) => b.pixels().map(|p| p[0] as f64 / 65535.0).collect(),
        DynamicImage::ImageLumaA16(b) => b.pixels().map(|p| p[0] as f64 / 65535.0).collect(),
        DynamicImage::ImageRgb8(b) => b
            .pixels()
            .map(|p| luminance(p[0] as f64, p[1] as f64, p[2] as f64, 255.0))
            .collect(),
        DynamicImage::ImageRgba8(b) => b
            .pixels()
            .map(|p| luminance(p[0] as f64, p[1] as f64, p[2] as f64, 255.0))
            .collect(),
        DynamicImage::ImageRgb16(b) => b
            .pixels()
            .map(|p| luminance(p[0] as f64, p[1] as f64, p[2] as f64, 65535.0))
            .collect(),
        DynamicImage::ImageRgba16(b) => b
            .pixels()
            .map(|p| luminance(p[0] as f64, p[1] as f64, p[2] as f64, 65535.0))
            .collect(),
        other => other
            .to_rgb32f()
            .pixels()
            .map(|p| luminance(p[0] as f64, p[1] as f64, p[2] as f64, 1.0))
            .collect(),
    };
    GrayImage::new(w, h, data)
}

fn luminance(r: f64, g: f64, b: f64, max: f64) -> f64 {
    let v = LUMA_R * (r / max) + LUMA_G * (g / max) + LUMA_B * (b / max);
    v.clamp(0.0, 1.0)
}

/// Maps a possibly negative or overflowing index back into `0..n` by
/// boundary-inclusive mirror reflection: `-1 -> 0`, `-2 -> 1`, `n -> n-1`.
#[inline]
pub(crate) fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let r = if i < 0 {
        -i - 1
    } else if i >= n {
        2 * n - i - 1
    } else {
        i
    };
    debug_assert!((0..n).contains(&r));
    r as usize
}

/// Extends the image by `r` pixels on every side with mirror reflections of
/// itself. The edge row and column are repeated once, so padded row `-1`
/// copies row `0` and row `-2` copies row `1`.
pub fn pad_symmetric(image: &GrayImage, r: usize) -> Result<GrayImage> {
    if r == 0 {
        return Err(Error::validation("padding size must be at least 1"));
    }
    let (w, h) = image.dimensions();
    if r > w.min(h) {
        return Err(Error::validation(format!(
            "padding {r} exceeds the smaller dimension of a {w}x{h} image"
        )));
    }
    let (pw, ph) = (w + 2 * r, h + 2 * r);
    let mut data = Vec::with_capacity(pw * ph);
    let cols: Vec<usize> = (0..pw)
        .map(|px| reflect(px as isize - r as isize, w))
        .collect();
    for py in 0..ph {
        let src = image.row(reflect(py as isize - r as isize, h));
        data.extend(cols.iter().map(|&c| src[c]));
    }
    Ok(GrayImage::from_raw(pw, ph, data))
}
