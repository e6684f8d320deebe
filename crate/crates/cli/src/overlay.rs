//! Grayscale overlays: a binary mask in light gray with graph edges or
//! detection boxes drawn over it.

use std::path::Path;

use shapegraph::raster::{write_pgm, BinaryImage, RasterError};
use shapegraph::skeleton_graph::{supercover, SimplifiedGraph};

pub const WHITE: u8 = 255;
pub const MASK: u8 = 200;
pub const VERTEX: u8 = 90;
pub const INK: u8 = 0;

pub struct Canvas {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Canvas {
    pub fn over(mask: &BinaryImage) -> Self {
        let data = mask.pixels().iter().map(|&b| if b { MASK } else { WHITE }).collect();
        Canvas {
            width: mask.width(),
            height: mask.height(),
            data,
        }
    }

    fn put(&mut self, x: i64, y: i64, shade: u8) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.data[y as usize * self.width + x as usize] = shade;
        }
    }

    pub fn segment(&mut self, a: (i64, i64), b: (i64, i64), shade: u8) {
        supercover(a, b, |x, y| {
            self.put(x, y, shade);
            true
        });
    }

    /// Square dot of side `2 * r + 1`.
    pub fn dot(&mut self, (x, y): (i64, i64), r: i64, shade: u8) {
        for dy in -r..=r {
            for dx in -r..=r {
                self.put(x + dx, y + dy, shade);
            }
        }
    }

    /// Outline of `[xmin, ymin, xmax, ymax]`, `thickness` pixels wide.
    pub fn rect(&mut self, bbox: [f64; 4], thickness: i64, shade: u8) {
        let [x0, y0, x1, y1] = bbox.map(|v| v.round() as i64);
        for t in 0..thickness.max(1) {
            let (a, b, c, d) = (x0 - t, y0 - t, x1 + t, y1 + t);
            self.segment((a, b), (c, b), shade);
            self.segment((c, b), (c, d), shade);
            self.segment((c, d), (a, d), shade);
            self.segment((a, d), (a, b), shade);
        }
    }

    pub fn graph(&mut self, g: &SimplifiedGraph<f64>) {
        let at = |v: usize| {
            let p = g.vertices()[v];
            (p.x.round() as i64, p.y.round() as i64)
        };
        for &(a, b) in g.edges() {
            self.segment(at(a), at(b), INK);
        }
        let r = (self.width.max(self.height) / 200).max(1) as i64;
        for v in 0..g.vertices().len() {
            self.dot(at(v), r, VERTEX);
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), RasterError> {
        write_pgm(path, self.width, self.height, &self.data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use shapegraph::geometry::Point;

    #[test]
    fn edges_are_drawn_over_the_mask() {
        let mask = BinaryImage::from_ascii(&["#####", ".....", "....."]);
        let mut c = Canvas::over(&mask);
        assert_eq!(c.data[0], MASK);
        assert_eq!(c.data[5], WHITE);
        let g = SimplifiedGraph::new(vec![Point::new(0.0, 2.0), Point::new(4.0, 2.0)], vec![(0, 1)]);
        c.graph(&g);
        assert_eq!(c.data[2 * 5 + 2], INK);
        assert_eq!(c.data[2 * 5], VERTEX);
    }

    #[test]
    fn boxes_clip_at_the_border() {
        let mut c = Canvas::over(&BinaryImage::new(4, 4));
        c.rect([-2.0, -2.0, 2.0, 2.0], 1, INK);
        assert_eq!(c.data[2 * 4 + 1], INK);
        assert_eq!(c.data[0], WHITE);
    }
}
