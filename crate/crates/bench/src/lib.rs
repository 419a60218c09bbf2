//! Shared inputs for the criterion benches.

use catex_core::GrayImage;

/// Deterministic pseudo-random texture of side `size` (xorshift, no external RNG).
pub fn noise_image(size: usize, seed: u64) -> GrayImage {
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    GrayImage::from_fn(size, size, |_, _| {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    })
    .expect("values are in [0, 1)")
}
