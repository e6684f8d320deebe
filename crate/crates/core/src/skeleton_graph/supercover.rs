//! Integer segment traversal that visits every pixel the ideal segment
//! between two pixel centres passes through, including both pixels when it
//! crosses exactly at a corner.

use crate::raster::BinaryImage;

/// Visits the supercover of the segment `(x0, y0) -> (x1, y1)`. Stops early
/// and returns `false` as soon as `visit` does.
pub fn supercover(
    (x0, y0): (i64, i64),
    (x1, y1): (i64, i64),
    mut visit: impl FnMut(i64, i64) -> bool,
) -> bool {
    let (dx, dy) = (x1 - x0, y1 - y0);
    let (sx, sy) = (dx.signum(), dy.signum());
    let (adx, ady) = (dx.abs(), dy.abs());
    let (ddx, ddy) = (2 * adx, 2 * ady);
    let (mut x, mut y) = (x0, y0);
    if !visit(x, y) {
        return false;
    }
    if ddx >= ddy {
        let mut err = adx;
        let mut prev = err;
        for _ in 0..adx {
            x += sx;
            err += ddy;
            if err > ddx {
                y += sy;
                err -= ddx;
                let s = err + prev;
                if s < ddx {
                    if !visit(x, y - sy) {
                        return false;
                    }
                } else if s > ddx {
                    if !visit(x - sx, y) {
                        return false;
                    }
                } else if !visit(x, y - sy) || !visit(x - sx, y) {
                    return false;
                }
            }
            if !visit(x, y) {
                return false;
            }
            prev = err;
        }
    } else {
        let mut err = ady;
        let mut prev = err;
        for _ in 0..ady {
            y += sy;
            err += ddx;
            if err > ddy {
                x += sx;
                err -= ddy;
                let s = err + prev;
                if s < ddy {
                    if !visit(x - sx, y) {
                        return false;
                    }
                } else if s > ddy {
                    if !visit(x, y - sy) {
                        return false;
                    }
                } else if !visit(x - sx, y) || !visit(x, y - sy) {
                    return false;
                }
            }
            if !visit(x, y) {
                return false;
            }
            prev = err;
        }
    }
    true
}

/// True when every pixel of the segment's supercover is black in `mask`.
pub fn segment_covered(mask: &BinaryImage, a: (i64, i64), b: (i64, i64)) -> bool {
    supercover(a, b, |x, y| mask.get_signed(x, y))
}
