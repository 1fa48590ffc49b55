//! Input generators shared by the benchmarks.

use ldop::GrayImage;

/// Deterministic textured image: a smooth gradient with xorshift noise.
pub fn textured(width: usize, height: usize, seed: u64) -> GrayImage {
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    GrayImage::from_fn(width, height, |r, c| {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        let base = (r * 2 + c * 3) as u64;
        ((base + (state & 0x3f)) % 256) as u8
    })
}
