//! Mask-to-graph front end: small-hole filling, thinning, spur pruning,
//! pixel graph construction and simplification.
//!
//! Clean-up thresholds are relative to the stroke width of each connected
//! component, estimated as `2 * area / perimeter`, so a component is
//! treated the same whatever else shares the canvas.

use super::{build_thin_graph, simplify, SimplifiedGraph, SimplifyOrder};
use crate::raster::BinaryImage;
use crate::scalar::Real;
use crate::thinning::thin;

const PRUNE_ROUNDS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkeletonConfig {
    /// Holes of at most `hole_factor * width^2` pixels are filled.
    pub hole_factor: f64,
    /// Pendant branches shorter than `spur_factor * width` are removed.
    pub spur_factor: f64,
    pub order: SimplifyOrder,
}

impl Default for SkeletonConfig {
    fn default() -> Self {
        SkeletonConfig {
            hole_factor: 0.25,
            spur_factor: 1.0,
            order: SimplifyOrder::Deterministic,
        }
    }
}

/// Component labels of the mask (8-connected) and the stroke width of each
/// component.
pub fn stroke_widths(mask: &BinaryImage) -> (Vec<usize>, Vec<f64>) {
    let (labels, n) = mask.component_labels();
    let mut area = vec![0usize; n];
    let mut perimeter = vec![0usize; n];
    for (x, y) in mask.black_pixels() {
        let l = labels[y * mask.width() + x];
        area[l] += 1;
        let (x, y) = (x as i64, y as i64);
        perimeter[l] += [(1, 0), (-1, 0), (0, 1), (0, -1)]
            .iter()
            .filter(|&&(dx, dy)| !mask.get_signed(x + dx, y + dy))
            .count();
    }
    let widths = area
        .iter()
        .zip(&perimeter)
        .map(|(&a, &p)| 2.0 * a as f64 / p.max(1) as f64)
        .collect();
    (labels, widths)
}

/// Removes pendant skeleton branches (end point up to, not including, the
/// first junction) shorter than `max_len(end point)`. A junction never
/// loses all of its branches: the longest is then kept.
pub fn prune_spurs(skeleton: &BinaryImage, max_len: impl Fn((i64, i64)) -> f64) -> BinaryImage {
    let g = build_thin_graph(skeleton);
    let adj = g.adjacency();
    // (junction, length, pixels) per short spur
    let mut spurs: Vec<(usize, f64, Vec<usize>)> = Vec::new();
    for start in 0..g.vertices.len() {
        if adj[start].len() != 1 {
            continue;
        }
        let (mut prev, mut cur) = (start, adj[start][0]);
        let mut path = vec![start];
        let mut len = 0.0;
        let step = |a: usize, b: usize| {
            let (p, q) = (g.vertices[a], g.vertices[b]);
            (((p.0 - q.0).pow(2) + (p.1 - q.1).pow(2)) as f64).sqrt()
        };
        len += step(prev, cur);
        while adj[cur].len() == 2 {
            path.push(cur);
            let next = if adj[cur][0] == prev { adj[cur][1] } else { adj[cur][0] };
            len += step(cur, next);
            prev = cur;
            cur = next;
        }
        if adj[cur].len() >= 3 && len < max_len(g.vertices[start]) {
            spurs.push((cur, len, path));
        }
    }
    spurs.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.total_cmp(&a.1)));
    let mut out = skeleton.clone();
    let mut k = 0;
    while k < spurs.len() {
        let junction = spurs[k].0;
        let group_end = spurs[k..].iter().position(|s| s.0 != junction).map_or(spurs.len(), |p| k + p);
        // keep the longest spur when every branch of the junction is short
        let skip_first = group_end - k >= adj[junction].len();
        for (_, _, path) in &spurs[k + usize::from(skip_first)..group_end] {
            for &v in path {
                let (x, y) = g.vertices[v];
                out.set(x as usize, y as usize, false);
            }
        }
        k = group_end;
    }
    out
}

/// Full front end from a binary mask to its simplified graph.
pub fn skeletonize<T: Real>(mask: &BinaryImage, cfg: &SkeletonConfig) -> SimplifiedGraph<T> {
    let w = mask.width();
    let (labels, widths) = stroke_widths(mask);
    let mut filled = mask.clone();
    for hole in mask.holes() {
        // the pixel above a hole's first pixel is ink of the enclosing component
        let (x, y) = hole[0];
        let width = widths[labels[(y - 1) * w + x]];
        if (hole.len() as f64) <= cfg.hole_factor * width * width {
            for (x, y) in hole {
                filled.set(x, y, true);
            }
        }
    }
    // filling never merges components or moves a component's first pixel,
    // so labels of the filled mask index the same widths
    let (labels, _) = filled.component_labels();
    let mut pruned = thin(&filled);
    // junction clusters can leave stubs behind, so prune to a fixed point
    for _ in 0..PRUNE_ROUNDS {
        let next = prune_spurs(&pruned, |(x, y)| {
            cfg.spur_factor * widths[labels[y as usize * w + x as usize]]
        });
        if next == pruned {
            break;
        }
        pruned = next;
    }
    simplify(&build_thin_graph(&pruned), &filled, cfg.order)
}
