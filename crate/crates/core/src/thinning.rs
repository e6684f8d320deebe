//! Skeletonization and the recurrent uniform filter used to repair damaged
//! inputs before re-thinning.
//!
//! Thinning peels one border layer per direction (north, south, west, east)
//! per round. Candidates for a direction are collected in parallel; they are
//! then deleted in raster order, re-checking deletability against the
//! current grid, so every single deletion removes a simple point and the
//! number of components and holes cannot change. End points (exactly one
//! black neighbour) are kept so strokes are not shortened. A final pass
//! breaks up any remaining 2x2 black blocks where a simple point exists.

use crate::raster::BinaryImage;

/// Neighbour offsets, counter-clockwise starting east (image y down, so
/// "north" is `dy = -1`).
const RING: [(i64, i64); 8] = [
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

const DIRECTIONS: [(i64, i64); 4] = [(0, -1), (0, 1), (-1, 0), (1, 0)];

struct Grid {
    w: i64,
    h: i64,
    px: Vec<bool>,
}

impl Grid {
    #[inline]
    fn at(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && x < self.w && y < self.h && self.px[(y * self.w + x) as usize]
    }

    #[inline]
    fn ring(&self, x: i64, y: i64) -> [bool; 8] {
        let mut r = [false; 8];
        for (k, &(dx, dy)) in RING.iter().enumerate() {
            r[k] = self.at(x + dx, y + dy);
        }
        r
    }

    /// Yokoi 8-connectivity number equals one and the pixel is not an end
    /// point: deleting it changes neither connectivity nor hole structure.
    fn deletable(&self, x: i64, y: i64) -> bool {
        let r = self.ring(x, y);
        let neighbours = r.iter().filter(|&&b| b).count();
        if neighbours < 2 {
            return false;
        }
        let c = |k: usize| !r[k % 8] as i32;
        let yokoi: i32 = [0usize, 2, 4, 6]
            .iter()
            .map(|&k| c(k) - c(k) * c(k + 1) * c(k + 2))
            .sum();
        yokoi == 1
    }
}

/// Reduces black regions to an 8-connected, unit-width skeleton.
///
/// The output is a subset of the input with the same number of 8-connected
/// components and 4-connected holes.
pub fn thin(img: &BinaryImage) -> BinaryImage {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let mut g = Grid {
        w,
        h,
        px: img.pixels().to_vec(),
    };
    let idx = |x: i64, y: i64| (y * w + x) as usize;

    let is_border = |g: &Grid, x: i64, y: i64| RING.iter().any(|&(dx, dy)| !g.at(x + dx, y + dy));
    let mut active: Vec<usize> = img
        .black_pixels()
        .map(|(x, y)| (x as i64, y as i64))
        .filter(|&(x, y)| is_border(&g, x, y))
        .map(|(x, y)| idx(x, y))
        .collect();
    let mut queued = vec![false; (w * h) as usize];

    loop {
        let mut changed = false;
        let mut exposed: Vec<usize> = Vec::new();
        for &(dx, dy) in &DIRECTIONS {
            let candidates: Vec<usize> = active
                .iter()
                .copied()
                .filter(|&i| {
                    let (x, y) = (i as i64 % w, i as i64 / w);
                    g.px[i] && !g.at(x + dx, y + dy) && g.deletable(x, y)
                })
                .collect();
            for i in candidates {
                let (x, y) = (i as i64 % w, i as i64 / w);
                if g.deletable(x, y) {
                    g.px[i] = false;
                    changed = true;
                    for &(ox, oy) in &RING {
                        let (nx, ny) = (x + ox, y + oy);
                        if g.at(nx, ny) {
                            exposed.push(idx(nx, ny));
                        }
                    }
                }
            }
        }
        if !changed {
            if break_blocks(&mut g, &active, &mut exposed) {
                changed = true;
            } else {
                break;
            }
        }
        // Next round's active set: surviving border pixels plus newly exposed.
        let mut next: Vec<usize> = Vec::with_capacity(active.len() + exposed.len());
        for i in active.drain(..).chain(exposed) {
            if g.px[i] && !queued[i] {
                queued[i] = true;
                next.push(i);
            }
        }
        for &i in &next {
            queued[i] = false;
        }
        next.sort_unstable();
        active = next;
        debug_assert!(changed);
    }
    BinaryImage::from_pixels(img.width(), img.height(), g.px)
}

/// Deletes one simple pixel from every 2x2 black block that has one.
fn break_blocks(g: &mut Grid, active: &[usize], exposed: &mut Vec<usize>) -> bool {
    let w = g.w;
    let mut changed = false;
    for &i in active {
        if !g.px[i] {
            continue;
        }
        let (x, y) = (i as i64 % w, i as i64 / w);
        // `i` as top-left corner of a block
        if !(g.at(x + 1, y) && g.at(x, y + 1) && g.at(x + 1, y + 1)) {
            continue;
        }
        for (cx, cy) in [(x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)] {
            if g.deletable(cx, cy) {
                g.px[(cy * w + cx) as usize] = false;
                changed = true;
                for &(ox, oy) in &RING {
                    if g.at(cx + ox, cy + oy) {
                        exposed.push(((cy + oy) * w + cx + ox) as usize);
                    }
                }
                break;
            }
        }
    }
    changed
}

/// Settings for [`recurrent_filter`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterConfig {
    /// Odd window side, at least 3.
    pub kernel: usize,
    /// A pixel becomes black when the black fraction of its window exceeds this.
    pub threshold: f64,
    pub iterations: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            kernel: 3,
            threshold: 0.25,
            iterations: 10,
        }
    }
}

/// Repeatedly applies a uniform (box) filter followed by a threshold.
/// Returns the image after every iteration; outside pixels count as white.
pub fn recurrent_filter(img: &BinaryImage, cfg: FilterConfig) -> Vec<BinaryImage> {
    assert!(cfg.kernel >= 3 && cfg.kernel % 2 == 1, "kernel must be odd and >= 3");
    assert!(cfg.threshold > 0.0 && cfg.threshold < 1.0);
    assert!(cfg.iterations >= 1);
    let mut out = Vec::with_capacity(cfg.iterations);
    let mut cur = img.clone();
    for _ in 0..cfg.iterations {
        cur = box_threshold(&cur, cfg.kernel, cfg.threshold);
        out.push(cur.clone());
    }
    out
}

fn box_threshold(img: &BinaryImage, kernel: usize, threshold: f64) -> BinaryImage {
    let (w, h) = (img.width(), img.height());
    // summed-area table with a zero row/column in front
    let mut sat = vec![0u32; (w + 1) * (h + 1)];
    for y in 0..h {
        let mut row = 0u32;
        for x in 0..w {
            row += img.get(x, y) as u32;
            sat[(y + 1) * (w + 1) + x + 1] = sat[y * (w + 1) + x + 1] + row;
        }
    }
    let r = kernel / 2;
    let area = (kernel * kernel) as f64;
    let mut out = BinaryImage::new(w, h);
    for y in 0..h {
        let (y0, y1) = (y.saturating_sub(r), (y + r + 1).min(h));
        for x in 0..w {
            let (x0, x1) = (x.saturating_sub(r), (x + r + 1).min(w));
            let s = sat[y1 * (w + 1) + x1] + sat[y0 * (w + 1) + x0]
                - sat[y0 * (w + 1) + x1]
                - sat[y1 * (w + 1) + x0];
            if s as f64 / area > threshold {
                out.set(x, y, true);
            }
        }
    }
    out
}
