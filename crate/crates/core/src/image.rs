//! Grayscale raster type, colour conversion and resampling.

use crate::error::{Error, Result};

/// Largest supported bit depth. Pixels are stored as `u16`.
pub const MAX_BIT_DEPTH: u8 = 16;

/// A row-major grayscale image with a declared bit depth.
///
/// Rows are indexed by `row` (downwards) and columns by `col` (rightwards),
/// both zero-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    bit_depth: u8,
    pixels: Vec<u16>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, bit_depth: u8, pixels: Vec<u16>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::argument(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if bit_depth == 0 || bit_depth > MAX_BIT_DEPTH {
            return Err(Error::argument(format!(
                "bit depth must be in 1..={MAX_BIT_DEPTH}, got {bit_depth}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::argument(format!(
                "expected {} pixels for {width}x{height}, got {}",
                width * height,
                pixels.len()
            )));
        }
        let max = max_value(bit_depth);
        if let Some(v) = pixels.iter().find(|&&v| v > max) {
            return Err(Error::argument(format!(
                "pixel value {v} exceeds {max} for bit depth {bit_depth}"
            )));
        }
        Ok(GrayImage {
            width,
            height,
            bit_depth,
            pixels,
        })
    }

    /// 8-bit image from raw bytes.
    pub fn from_u8(width: usize, height: usize, pixels: &[u8]) -> Result<Self> {
        Self::new(width, height, 8, pixels.iter().map(|&v| v as u16).collect())
    }

    /// 8-bit image whose pixel at `(row, col)` is `f(row, col)`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut pixels = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                pixels.push(f(row, col) as u16);
            }
        }
        GrayImage {
            width,
            height,
            bit_depth: 8,
            pixels,
        }
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self::from_fn(width, height, |_, _| value)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bit_depth(&self) -> u8 {
        self.bit_depth
    }

    /// `2^B - 1`.
    pub fn max_value(&self) -> u16 {
        max_value(self.bit_depth)
    }

    pub fn pixels(&self) -> &[u16] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u16 {
        self.pixels[row * self.width + col]
    }

    /// Applies `f` to every pixel; the result must stay within the bit depth.
    pub fn map(&self, f: impl Fn(u16) -> u16) -> Result<Self> {
        Self::new(
            self.width,
            self.height,
            self.bit_depth,
            self.pixels.iter().map(|&v| f(v)).collect(),
        )
    }

    pub(crate) fn to_f64(&self) -> Vec<f64> {
        self.pixels.iter().map(|&v| v as f64).collect()
    }
}

pub(crate) fn max_value(bit_depth: u8) -> u16 {
    ((1u32 << bit_depth) - 1) as u16
}

/// BT.601 luma of an RGB triple, rounded and clamped to the bit depth.
pub fn to_gray(rgb: [u16; 3], bit_depth: u8) -> u16 {
    let [r, g, b] = rgb.map(f64::from);
    let luma = (0.299 * r + 0.587 * g + 0.114 * b).round();
    luma.clamp(0.0, max_value(bit_depth) as f64) as u16
}

/// Bilinear resampling with half-pixel centres.
///
/// Source coordinates are clamped to the image, so edges replicate and the
/// output never leaves `[min(input), max(input)]`.
pub fn resize_bilinear(img: &GrayImage, out_width: usize, out_height: usize) -> Result<GrayImage> {
    if out_width == 0 || out_height == 0 {
        return Err(Error::argument(format!(
            "target dimensions must be positive, got {out_width}x{out_height}"
        )));
    }
    if out_width == img.width && out_height == img.height {
        return Ok(img.clone());
    }

    let cols = axis_weights(img.width, out_width);
    let rows = axis_weights(img.height, out_height);
    let max = img.max_value() as f64;

    let mut pixels = Vec::with_capacity(out_width * out_height);
    for &(r0, r1, t) in &rows {
        for &(c0, c1, s) in &cols {
            let p = |r: usize, c: usize| img.get(r, c) as f64;
            let top = p(r0, c0) + (p(r0, c1) - p(r0, c0)) * s;
            let bottom = p(r1, c0) + (p(r1, c1) - p(r1, c0)) * s;
            let v = top + (bottom - top) * t;
            pixels.push(v.round().clamp(0.0, max) as u16);
        }
    }
    GrayImage::new(out_width, out_height, img.bit_depth, pixels)
}

/// Per output index: lower source index, upper source index, fraction.
fn axis_weights(input: usize, output: usize) -> Vec<(usize, usize, f64)> {
    let scale = input as f64 / output as f64;
    let last = (input - 1) as f64;
    (0..output)
        .map(|i| {
            let src = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, last);
            let lo = src.floor();
            let frac = src - lo;
            let lo = lo as usize;
            let hi = if frac > 0.0 { lo + 1 } else { lo };
            (lo, hi, frac)
        })
        .collect()
}
