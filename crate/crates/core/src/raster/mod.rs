//! Raster stage: grayscale ingestion, binarization and test-scene composition.

mod idx;
mod pnm;
mod scene;

use std::collections::VecDeque;

use thiserror::Error;

pub use idx::{load_idx, load_idx_images, load_idx_labels};
pub use pnm::{read_pbm, read_pgm, write_gray_pgm, write_pbm, write_pgm};
pub use scene::{
    compose_scene, random_layout, resize_nearest, SceneManifestRecord, ScenePlacement,
    PLACEMENT_RETRY_CAP,
};

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic number {found:#010x}, expected {expected:#010x}")]
    BadMagic { found: u32, expected: u32 },
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("image/label count mismatch: {images} images, {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("malformed image file: {0}")]
    Malformed(String),
    #[error("placement {index} does not fit inside the {width}x{height} canvas")]
    OutOfCanvas { index: usize, width: usize, height: usize },
    #[error("placements {first} and {second} overlap")]
    Overlap { first: usize, second: usize },
    #[error("placement {index} references missing source {source_index}")]
    MissingSource { index: usize, source_index: usize },
    #[error("could not place object {index} without overlap after {attempts} attempts")]
    PlacementFailed { index: usize, attempts: usize },
}

/// Grayscale image with row-major intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f32>,
    pub label: Option<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, values: Vec<f32>, label: Option<u8>) -> Self {
        assert_eq!(values.len(), width * height, "value count must match dimensions");
        debug_assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
        GrayImage {
            width,
            height,
            values,
            label,
        }
    }

    pub fn filled(width: usize, height: usize, value: f32) -> Self {
        GrayImage::new(width, height, vec![value; width * height], None)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.values[y * self.width + x]
    }
}

/// Black/white raster. Black pixels are the foreground.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    pixels: Vec<bool>,
}

impl std::fmt::Debug for BinaryImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "BinaryImage {}x{}", self.width, self.height)?;
        if self.width * self.height <= 4096 {
            for y in 0..self.height {
                let row: String = (0..self.width)
                    .map(|x| if self.get(x, y) { '#' } else { '.' })
                    .collect();
                writeln!(f, "{row}")?;
            }
        }
        Ok(())
    }
}

impl BinaryImage {
    /// All-white image.
    pub fn new(width: usize, height: usize) -> Self {
        BinaryImage {
            width,
            height,
            pixels: vec![false; width * height],
        }
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<bool>) -> Self {
        assert_eq!(pixels.len(), width * height);
        BinaryImage {
            width,
            height,
            pixels,
        }
    }

    /// Builds an image from black coordinates. Panics on out-of-range points.
    pub fn from_black<I: IntoIterator<Item = (usize, usize)>>(
        width: usize,
        height: usize,
        black: I,
    ) -> Self {
        let mut img = BinaryImage::new(width, height);
        for (x, y) in black {
            img.set(x, y, true);
        }
        img
    }

    /// Parses rows of `#` (black) and `.` (white). Handy in tests.
    pub fn from_ascii(rows: &[&str]) -> Self {
        let height = rows.len();
        let width = rows.iter().map(|r| r.len()).max().unwrap_or(0);
        let mut img = BinaryImage::new(width, height);
        for (y, row) in rows.iter().enumerate() {
            for (x, c) in row.chars().enumerate() {
                if c == '#' {
                    img.set(x, y, true);
                }
            }
        }
        img
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[bool] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.pixels[y * self.width + x]
    }

    /// Out-of-range coordinates read as white.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.pixels[y as usize * self.width + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, black: bool) {
        self.pixels[y * self.width + x] = black;
    }

    pub fn black_count(&self) -> usize {
        self.pixels.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.pixels.iter().any(|&b| b)
    }

    /// Black pixels in raster order (row by row, left to right).
    pub fn black_pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.pixels
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % w, i / w))
    }

    /// Inclusive bounding box `(xmin, ymin, xmax, ymax)` of the black pixels.
    pub fn bounding_box(&self) -> Option<(usize, usize, usize, usize)> {
        let mut bb: Option<(usize, usize, usize, usize)> = None;
        for (x, y) in self.black_pixels() {
            bb = Some(match bb {
                None => (x, y, x, y),
                Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
            });
        }
        bb
    }

    /// Copy shifted by `(dx, dy)` onto a canvas of the given size; pixels
    /// falling outside are dropped.
    pub fn translated(&self, dx: i64, dy: i64, width: usize, height: usize) -> BinaryImage {
        let mut out = BinaryImage::new(width, height);
        for (x, y) in self.black_pixels() {
            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
            if nx >= 0 && ny >= 0 && (nx as usize) < width && (ny as usize) < height {
                out.set(nx as usize, ny as usize, true);
            }
        }
        out
    }

    /// True if every black pixel of `self` is black in `other`.
    pub fn is_subset_of(&self, other: &BinaryImage) -> bool {
        self.width == other.width
            && self.height == other.height
            && self
                .pixels
                .iter()
                .zip(&other.pixels)
                .all(|(&a, &b)| !a || b)
    }

    /// True if some 2x2 window is entirely black.
    pub fn has_2x2_block(&self) -> bool {
        if self.width < 2 || self.height < 2 {
            return false;
        }
        (0..self.height - 1).any(|y| {
            (0..self.width - 1).any(|x| {
                self.get(x, y) && self.get(x + 1, y) && self.get(x, y + 1) && self.get(x + 1, y + 1)
            })
        })
    }

    /// Number of 8-connected black components.
    pub fn component_count(&self) -> usize {
        label_components(self, true, &NEIGHBORS_8).1
    }

    /// Number of holes: 4-connected white regions not touching the border.
    pub fn hole_count(&self) -> usize {
        // Pad with a white frame so every outside region merges into one.
        let (w, h) = (self.width + 2, self.height + 2);
        let padded = self.translated(1, 1, w, h);
        let (_, n) = label_components(&padded, false, &NEIGHBORS_4);
        n.saturating_sub(1)
    }

    /// Pixels of every hole (4-connected white region not touching the
    /// border), holes ordered by their first pixel in raster order.
    pub fn holes(&self) -> Vec<Vec<(usize, usize)>> {
        let (w, h) = (self.width + 2, self.height + 2);
        let padded = self.translated(1, 1, w, h);
        let (labels, n) = label_components(&padded, false, &NEIGHBORS_4);
        // label 0 is the outside (the padded frame starts at index 0)
        let mut holes = vec![Vec::new(); n.saturating_sub(1)];
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                let l = labels[y * w + x];
                if l != usize::MAX && l != 0 {
                    holes[l - 1].push((x - 1, y - 1));
                }
            }
        }
        holes
    }

    /// Copy with every hole of at most `max_area` pixels filled black.
    pub fn fill_small_holes(&self, max_area: usize) -> BinaryImage {
        let mut out = self.clone();
        for hole in self.holes() {
            if hole.len() <= max_area {
                for (x, y) in hole {
                    out.set(x, y, true);
                }
            }
        }
        out
    }

    /// Labels of 8-connected black components (`usize::MAX` for white) and
    /// the component count. Labels follow raster order of first pixel.
    pub fn component_labels(&self) -> (Vec<usize>, usize) {
        label_components(self, true, &NEIGHBORS_8)
    }
}

const NEIGHBORS_4: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];
const NEIGHBORS_8: [(i64, i64); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

fn label_components(img: &BinaryImage, value: bool, nbrs: &[(i64, i64)]) -> (Vec<usize>, usize) {
    let (w, h) = (img.width, img.height);
    let mut labels = vec![usize::MAX; w * h];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if img.pixels[start] != value || labels[start] != usize::MAX {
            continue;
        }
        labels[start] = count;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            for &(dx, dy) in nbrs {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if img.pixels[j] == value && labels[j] == usize::MAX {
                    labels[j] = count;
                    queue.push_back(j);
                }
            }
        }
        count += 1;
    }
    (labels, count)
}

/// Bilinear upscale by an integer factor, then threshold: a pixel is black
/// iff its resampled intensity exceeds `threshold`.
pub fn binarize_upscale(img: &GrayImage, factor: usize, threshold: f32) -> BinaryImage {
    assert!(factor >= 1, "upscale factor must be positive");
    assert!(
        threshold > 0.0 && threshold < 1.0,
        "threshold must lie in (0, 1)"
    );
    let (w, h) = (img.width * factor, img.height * factor);
    let mut out = BinaryImage::new(w, h);
    if img.width == 0 || img.height == 0 {
        return out;
    }
    let f = factor as f32;
    // Sample positions along each axis are shared by every row/column.
    let axis = |n_out: usize, n_in: usize| -> Vec<(usize, usize, f32)> {
        (0..n_out)
            .map(|o| {
                let s = ((o as f32 + 0.5) / f - 0.5).clamp(0.0, (n_in - 1) as f32);
                let i0 = s.floor() as usize;
                let i1 = (i0 + 1).min(n_in - 1);
                (i0, i1, s - i0 as f32)
            })
            .collect()
    };
    let xs = axis(w, img.width);
    let ys = axis(h, img.height);
    for (oy, &(y0, y1, ty)) in ys.iter().enumerate() {
        for (ox, &(x0, x1, tx)) in xs.iter().enumerate() {
            let top = img.get(x0, y0) * (1.0 - tx) + img.get(x1, y0) * tx;
            let bottom = img.get(x0, y1) * (1.0 - tx) + img.get(x1, y1) * tx;
            let v = top * (1.0 - ty) + bottom * ty;
            if v > threshold {
                out.set(ox, oy, true);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_holes_are_filled() {
        let img = BinaryImage::from_ascii(&[
            "########",
            "#.##...#",
            "####...#",
            "########",
        ]);
        assert_eq!(img.holes().iter().map(Vec::len).collect::<Vec<_>>(), vec![1, 6]);
        let filled = img.fill_small_holes(2);
        assert_eq!(filled.hole_count(), 1);
        assert_eq!(filled.black_count(), img.black_count() + 1);
    }

    #[test]
    fn upscale_dimensions() {
        let img = GrayImage::filled(28, 28, 0.0);
        let out = binarize_upscale(&img, 10, 0.1);
        assert_eq!((out.width(), out.height()), (280, 280));
    }

    #[test]
    fn below_threshold_is_white() {
        let img = GrayImage::filled(5, 4, 0.05);
        assert!(binarize_upscale(&img, 3, 0.1).is_empty());
    }

    #[test]
    fn factor_one_all_ones_is_black() {
        let img = GrayImage::filled(6, 3, 1.0);
        let out = binarize_upscale(&img, 1, 0.1);
        assert_eq!((out.width(), out.height()), (6, 3));
        assert_eq!(out.black_count(), 18);
    }

    #[test]
    fn single_bright_pixel_grows_smoothly() {
        let mut v = vec![0.0; 9];
        v[4] = 1.0;
        let out = binarize_upscale(&GrayImage::new(3, 3, v, None), 10, 0.1);
        // centre pixel block is black, corners of the canvas are white
        assert!(out.get(15, 15));
        assert!(!out.get(0, 0));
        // symmetric about the centre
        for (x, y) in out.black_pixels().collect::<Vec<_>>() {
            assert!(out.get(29 - x, y) && out.get(x, 29 - y));
        }
    }

    #[test]
    fn topology_counts() {
        let ring = BinaryImage::from_ascii(&["#####", "#...#", "#.#.#", "#...#", "#####"]);
        assert_eq!(ring.component_count(), 2);
        assert_eq!(ring.hole_count(), 1);
        let diag = BinaryImage::from_ascii(&["#..", ".#.", "..#"]);
        assert_eq!(diag.component_count(), 1);
        // a diagonal ring encloses a 4-connected hole
        let diamond = BinaryImage::from_ascii(&[".#.", "#.#", ".#."]);
        assert_eq!(diamond.component_count(), 1);
        assert_eq!(diamond.hole_count(), 1);
        assert!(!diamond.has_2x2_block());
        assert!(BinaryImage::from_ascii(&["##", "##"]).has_2x2_block());
    }
}
