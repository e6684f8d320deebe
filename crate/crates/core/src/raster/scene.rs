//! Composition of multi-object test scenes from binary sources.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{BinaryImage, RasterError};

/// Attempts per object before random placement gives up.
pub const PLACEMENT_RETRY_CAP: usize = 1000;

/// Where one source image lands in a scene.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ScenePlacement {
    pub source_index: usize,
    /// Side of the square the source is rescaled into.
    pub target_size: usize,
    pub origin: (usize, usize),
}

/// One line of a scene manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SceneManifestRecord {
    pub source_index: usize,
    pub size: usize,
    pub origin: (usize, usize),
    pub label: Option<u8>,
}

/// Output dimensions of a source rescaled so its larger side is `target`.
fn scaled_dims(w: usize, h: usize, target: usize) -> (usize, usize) {
    let side = w.max(h).max(1);
    let sw = ((w * target) as f64 / side as f64).round().max(1.0) as usize;
    let sh = ((h * target) as f64 / side as f64).round().max(1.0) as usize;
    (sw, sh)
}

/// Nearest-neighbour rescale so the larger side equals `target`.
pub fn resize_nearest(img: &BinaryImage, target: usize) -> BinaryImage {
    let (w, h) = (img.width(), img.height());
    let (sw, sh) = scaled_dims(w, h, target);
    let mut out = BinaryImage::new(sw, sh);
    if w == 0 || h == 0 {
        return out;
    }
    let xs: Vec<usize> = (0..sw).map(|x| ((2 * x + 1) * w / (2 * sw)).min(w - 1)).collect();
    for y in 0..sh {
        let sy = ((2 * y + 1) * h / (2 * sh)).min(h - 1);
        for (x, &sx) in xs.iter().enumerate() {
            if img.get(sx, sy) {
                out.set(x, y, true);
            }
        }
    }
    out
}

type Rect = (usize, usize, usize, usize); // x, y, w, h

fn rects_overlap(a: Rect, b: Rect) -> bool {
    a.0 < b.0 + b.2 && b.0 < a.0 + a.2 && a.1 < b.1 + b.3 && b.1 < a.1 + a.3
}

fn placement_rect(p: &ScenePlacement, src: &BinaryImage) -> Rect {
    let (w, h) = scaled_dims(src.width(), src.height(), p.target_size);
    (p.origin.0, p.origin.1, w, h)
}

/// Pastes every placement (rescaled with nearest neighbour) into a white
/// canvas. With `forbid_overlap`, placed rectangles must be pairwise disjoint.
pub fn compose_scene(
    placements: &[ScenePlacement],
    sources: &[BinaryImage],
    canvas: (usize, usize),
    forbid_overlap: bool,
) -> Result<BinaryImage, RasterError> {
    let mut rects = Vec::with_capacity(placements.len());
    for (i, p) in placements.iter().enumerate() {
        let src = sources.get(p.source_index).ok_or(RasterError::MissingSource {
            index: i,
            source_index: p.source_index,
        })?;
        let r = placement_rect(p, src);
        if r.0 + r.2 > canvas.0 || r.1 + r.3 > canvas.1 {
            return Err(RasterError::OutOfCanvas {
                index: i,
                width: canvas.0,
                height: canvas.1,
            });
        }
        if forbid_overlap {
            if let Some(j) = rects.iter().position(|&q| rects_overlap(q, r)) {
                return Err(RasterError::Overlap { first: j, second: i });
            }
        }
        rects.push(r);
    }
    let mut out = BinaryImage::new(canvas.0, canvas.1);
    for (p, r) in placements.iter().zip(&rects) {
        let scaled = resize_nearest(&sources[p.source_index], p.target_size);
        for (x, y) in scaled.black_pixels() {
            out.set(r.0 + x, r.1 + y, true);
        }
    }
    Ok(out)
}

/// Draws random origins for `(source_index, size)` requests by rejection
/// sampling. Square sources are assumed for the footprint (`size` x `size`).
pub fn random_layout<R: Rng + ?Sized>(
    rng: &mut R,
    requests: &[(usize, usize)],
    canvas: (usize, usize),
    forbid_overlap: bool,
) -> Result<Vec<ScenePlacement>, RasterError> {
    let mut placed: Vec<ScenePlacement> = Vec::with_capacity(requests.len());
    for (index, &(source_index, size)) in requests.iter().enumerate() {
        if size > canvas.0 || size > canvas.1 {
            return Err(RasterError::OutOfCanvas {
                index,
                width: canvas.0,
                height: canvas.1,
            });
        }
        let mut found = None;
        for _ in 0..PLACEMENT_RETRY_CAP {
            let origin = (
                rng.gen_range(0..=canvas.0 - size),
                rng.gen_range(0..=canvas.1 - size),
            );
            let r = (origin.0, origin.1, size, size);
            let clash = forbid_overlap
                && placed.iter().any(|q| {
                    rects_overlap((q.origin.0, q.origin.1, q.target_size, q.target_size), r)
                });
            if !clash {
                found = Some(origin);
                break;
            }
        }
        let origin = found.ok_or(RasterError::PlacementFailed {
            index,
            attempts: PLACEMENT_RETRY_CAP,
        })?;
        placed.push(ScenePlacement {
            source_index,
            target_size: size,
            origin,
        });
    }
    Ok(placed)
}
