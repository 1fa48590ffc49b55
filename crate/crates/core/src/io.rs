//! Reading and writing grayscale rasters.
//!
//! PGM (binary `P5`, plus plain `P2` on input) is the reference format and
//! round-trips bit-exactly. PNG input is decoded with the `image` crate and
//! converted to luma with [`to_gray`].

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{to_gray, GrayImage};

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Loads a PGM or PNG file as a grayscale image.
pub fn load_gray(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::from(e).with_path(path))?;
    decode_image(&bytes).map_err(|e| e.with_path(path))
}

/// Decodes an in-memory image, sniffing the format from its magic bytes.
pub fn decode_image(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.starts_with(b"P5") || bytes.starts_with(b"P2") {
        decode_pgm(bytes)
    } else if bytes.starts_with(PNG_SIGNATURE) {
        decode_png(bytes)
    } else {
        Err(Error::format(
            "unsupported image format (expected PGM or PNG)",
        ))
    }
}

pub fn write_pgm(path: impl AsRef<Path>, img: &GrayImage) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(img)).map_err(|e| Error::from(e).with_path(path))
}

/// Encodes as binary PGM with `maxval = 2^B - 1`; 16-bit samples are
/// big-endian as the format requires.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let maxval = img.max_value();
    let mut out = format!("P5\n{} {}\n{}\n", img.width(), img.height(), maxval).into_bytes();
    if maxval < 256 {
        out.extend(img.pixels().iter().map(|&v| v as u8));
    } else {
        for &v in img.pixels() {
            out.extend_from_slice(&v.to_be_bytes());
        }
    }
    out
}

pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut header = HeaderReader { bytes, pos: 2 };
    let plain = match &bytes[..2.min(bytes.len())] {
        b"P5" => false,
        b"P2" => true,
        _ => return Err(Error::format("missing PGM magic")),
    };
    let width = header.next_number()?;
    let height = header.next_number()?;
    let maxval = header.next_number()?;
    if width == 0 || height == 0 {
        return Err(Error::format("PGM dimensions must be positive"));
    }
    if maxval == 0 || maxval > u16::MAX as usize {
        return Err(Error::format(format!("PGM maxval {maxval} out of range")));
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| Error::format("PGM dimensions overflow"))?;
    let bit_depth = (usize::BITS - maxval.leading_zeros()) as u8;

    let pixels: Vec<u16> = if plain {
        let mut pixels = Vec::with_capacity(count);
        for _ in 0..count {
            pixels.push(header.next_number()? as u16);
        }
        pixels
    } else {
        // exactly one whitespace byte separates the header from the raster
        let start = header.pos + 1;
        let sample_bytes = if maxval < 256 { 1 } else { 2 };
        let data = bytes
            .get(start..start + count * sample_bytes)
            .ok_or_else(|| Error::format("PGM raster is truncated"))?;
        if sample_bytes == 1 {
            data.iter().map(|&v| v as u16).collect()
        } else {
            data.chunks_exact(2)
                .map(|c| u16::from_be_bytes([c[0], c[1]]))
                .collect()
        }
    };
    if let Some(v) = pixels.iter().find(|&&v| v as usize > maxval) {
        return Err(Error::format(format!(
            "PGM sample {v} exceeds maxval {maxval}"
        )));
    }
    GrayImage::new(width, height, bit_depth, pixels)
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderReader<'_> {
    fn next_number(&mut self) -> Result<usize> {
        loop {
            match self.bytes.get(self.pos) {
                Some(b'#') => {
                    while !matches!(self.bytes.get(self.pos), Some(b'\n') | None) {
                        self.pos += 1;
                    }
                }
                Some(c) if c.is_ascii_whitespace() => self.pos += 1,
                Some(c) if c.is_ascii_digit() => break,
                Some(_) => return Err(Error::format("unexpected byte in PGM header")),
                None => return Err(Error::format("PGM header is truncated")),
            }
        }
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format("PGM header number out of range"))
    }
}

fn decode_png(bytes: &[u8]) -> Result<GrayImage> {
    let decoded = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| Error::format(format!("PNG decode failed: {e}")))?;
    let (width, height) = (decoded.width() as usize, decoded.height() as usize);
    match decoded {
        image::DynamicImage::ImageLuma8(buf) => GrayImage::from_u8(width, height, buf.as_raw()),
        other => {
            let rgb = other.to_rgb8();
            let pixels = rgb
                .pixels()
                .map(|p| to_gray([p[0] as u16, p[1] as u16, p[2] as u16], 8))
                .collect();
            GrayImage::new(width, height, 8, pixels)
        }
    }
}
