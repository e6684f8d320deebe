//! Damaged digits and pure-noise images for the recovery experiments.

use rand::seq::index::sample;
use rand::Rng;

use crate::raster::{BinaryImage, GrayImage};
use crate::thinning::thin;

/// Black pixels of `mask` within Chebyshev distance `radius` of its skeleton.
pub fn skeleton_neighbourhood(mask: &BinaryImage, radius: usize) -> Vec<(usize, usize)> {
    let skeleton = thin(mask);
    let (w, h) = (mask.width(), mask.height());
    let mut near = BinaryImage::new(w, h);
    for (x, y) in skeleton.black_pixels() {
        for ny in y.saturating_sub(radius)..(y + radius + 1).min(h) {
            for nx in x.saturating_sub(radius)..(x + radius + 1).min(w) {
                near.set(nx, ny, true);
            }
        }
    }
    mask.black_pixels().filter(|&(x, y)| near.get(x, y)).collect()
}

/// Erases `fraction` of the ink pixels (intensity above `threshold`) lying
/// within one pixel of the skeleton of the thresholded image.
pub fn damage_near_skeleton<R: Rng + ?Sized>(rng: &mut R, img: &GrayImage, fraction: f64, threshold: f32) -> GrayImage {
    let mask = BinaryImage::from_pixels(
        img.width,
        img.height,
        img.values.iter().map(|&v| v > threshold).collect(),
    );
    let near = skeleton_neighbourhood(&mask, 1);
    let k = ((near.len() as f64) * fraction).round() as usize;
    let mut out = img.clone();
    for i in sample(rng, near.len(), k.min(near.len())) {
        let (x, y) = near[i];
        out.values[y * img.width + x] = 0.0;
    }
    out
}

/// Unlabeled image whose pixels carry ink with probability `ink`, at a
/// uniformly random intensity.
pub fn uniform_noise<R: Rng + ?Sized>(rng: &mut R, width: usize, height: usize, ink: f64) -> GrayImage {
    let values = (0..width * height)
        .map(|_| if rng.gen_bool(ink) { rng.gen::<f32>() } else { 0.0 })
        .collect();
    GrayImage::new(width, height, values, None)
}
