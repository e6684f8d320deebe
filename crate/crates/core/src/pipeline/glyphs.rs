//! Stroke-drawn capital letters used as non-digit distractors.

use crate::raster::BinaryImage;

/// Letters with stroke definitions.
pub const GLYPHS: [char; 6] = ['M', 'W', 'H', 'X', 'K', 'E'];

type Stroke = &'static [(f64, f64)];

/// Polylines in the unit square, y down.
pub fn glyph_strokes(c: char) -> Option<&'static [Stroke]> {
    Some(match c {
        'M' => &[&[(0.0, 1.0), (0.0, 0.0), (0.5, 0.6), (1.0, 0.0), (1.0, 1.0)]],
        'W' => &[&[(0.0, 0.0), (0.25, 1.0), (0.5, 0.35), (0.75, 1.0), (1.0, 0.0)]],
        'H' => &[&[(0.0, 0.0), (0.0, 1.0)], &[(1.0, 0.0), (1.0, 1.0)], &[(0.0, 0.5), (1.0, 0.5)]],
        'X' => &[&[(0.0, 0.0), (1.0, 1.0)], &[(1.0, 0.0), (0.0, 1.0)]],
        'K' => &[&[(0.0, 0.0), (0.0, 1.0)], &[(1.0, 0.0), (0.0, 0.55)], &[(0.3, 0.4), (1.0, 1.0)]],
        'E' => &[
            &[(1.0, 0.0), (0.0, 0.0), (0.0, 1.0), (1.0, 1.0)],
            &[(0.0, 0.5), (0.8, 0.5)],
        ],
        _ => return None,
    })
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    ((p.0 - a.0 - t * dx).powi(2) + (p.1 - a.1 - t * dy).powi(2)).sqrt()
}

/// Renders a glyph into a `side` x `side` mask: the letter fills the
/// central `box_fraction` of the square and strokes are `stroke` pixels
/// wide.
pub fn render_glyph(c: char, side: usize, box_fraction: f64, stroke: f64) -> Option<BinaryImage> {
    let strokes = glyph_strokes(c)?;
    let inner = side as f64 * box_fraction;
    let off = 0.5 * (side as f64 - inner);
    let map = |(x, y): (f64, f64)| (off + x * inner, off + y * inner);
    let segments: Vec<((f64, f64), (f64, f64))> = strokes
        .iter()
        .flat_map(|s| s.windows(2).map(|w| (map(w[0]), map(w[1]))))
        .collect();
    let mut out = BinaryImage::new(side, side);
    let r = 0.5 * stroke;
    for y in 0..side {
        for x in 0..side {
            let p = (x as f64 + 0.5, y as f64 + 0.5);
            if segments.iter().any(|&(a, b)| segment_distance(p, a, b) <= r) {
                out.set(x, y, true);
            }
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_glyph_is_one_component() {
        for c in GLYPHS {
            let g = render_glyph(c, 280, 0.72, 24.0).unwrap();
            assert_eq!(g.component_count(), 1, "{c}");
            assert_eq!(g.hole_count(), 0, "{c}");
        }
        assert!(render_glyph('5', 280, 0.72, 24.0).is_none());
    }
}
