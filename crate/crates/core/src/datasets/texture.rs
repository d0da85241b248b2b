use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::pgm::GrayImage;
use crate::error::Result;

/// Seeded grayscale test texture: a few random plane waves plus pixel noise, scaled into
/// `[16, 239]`.
pub fn synthetic_texture(height: usize, width: usize, seed: u64) -> Result<GrayImage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let waves: Vec<(f64, f64, f64)> = (0..4)
        .map(|_| {
            let angle = rng.random_range(0.0..std::f64::consts::PI);
            let freq = rng.random_range(0.05..0.6);
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            (freq * angle.cos(), freq * angle.sin(), phase)
        })
        .collect();
    let mut pixels = Vec::with_capacity(height * width);
    for y in 0..height {
        for x in 0..width {
            let wave: f64 = waves
                .iter()
                .map(|&(fy, fx, ph)| (fy * y as f64 + fx * x as f64 + ph).sin())
                .sum::<f64>()
                / waves.len() as f64;
            let noise = rng.random_range(-0.25..0.25);
            let v = 127.5 + 90.0 * wave + 40.0 * noise;
            pixels.push(v.round().clamp(16.0, 239.0) as u8);
        }
    }
    GrayImage::new(height, width, pixels)
}

/// Copies `patch` (row-major, `side×side`) into `img` centered on `(center_y, center_x)`.
pub fn plant_patch(
    img: &mut GrayImage,
    center_y: usize,
    center_x: usize,
    side: usize,
    patch: &[u8],
) {
    assert_eq!(patch.len(), side * side, "patch must have side² pixels");
    let (top, left) = (center_y - side / 2, center_x - side / 2);
    for dy in 0..side {
        for dx in 0..side {
            img.set(top + dy, left + dx, patch[dy * side + dx]);
        }
    }
}
