//! Collapse of degree-2 pixel chains into straight segments that stay on
//! the ink.
//!
//! Anchors (degree other than two, plus the smallest vertex of every pure
//! cycle) are never removed. Each chain between anchors is reduced by
//! repeatedly replacing the longest run whose end-to-end segment is fully
//! covered by black mask pixels; a final pass removes any remaining degree-2
//! vertex whose neighbours can be joined directly. A shortcut is also
//! refused when the region it cuts off would contain a hole of the mask, so
//! loops around holes survive. Cycles keep at least three vertices and no
//! duplicate edges are created.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::supercover::segment_covered;
use super::{SimplifiedGraph, ThinGraph};
use crate::geometry::Point;
use crate::raster::BinaryImage;
use crate::scalar::Real;

/// Order in which collapsible runs are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SimplifyOrder {
    /// Longest chain first (ties: smallest endpoint index); within a chain
    /// the longest covered run first (ties: earliest start).
    #[default]
    Deterministic,
    /// Random chain order and random covered runs, for robustness checks.
    Seeded(u64),
}

struct Chain {
    /// Thin-graph vertex indices from one anchor to another (equal for loops).
    path: Vec<usize>,
}

fn extract_chains(g: &ThinGraph, adj: &[Vec<usize>]) -> Vec<Chain> {
    let n = g.vertices.len();
    let mut anchor: Vec<bool> = adj.iter().map(|a| a.len() != 2).collect();
    let mut used: BTreeSet<(usize, usize)> = BTreeSet::new();
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut chains = Vec::new();

    let walk = |start: usize, anchor: &[bool], used: &mut BTreeSet<(usize, usize)>| {
        let mut out = Vec::new();
        for &first in &adj[start] {
            if used.contains(&key(start, first)) {
                continue;
            }
            used.insert(key(start, first));
            let mut path = vec![start, first];
            let (mut prev, mut cur) = (start, first);
            while !anchor[cur] {
                let next = adj[cur]
                    .iter()
                    .copied()
                    .find(|&v| v != prev && !used.contains(&key(cur, v)))
                    .or_else(|| {
                        // two-vertex cycle guard: fall back to any unused edge
                        adj[cur].iter().copied().find(|&v| !used.contains(&key(cur, v)))
                    });
                let Some(next) = next else { break };
                used.insert(key(cur, next));
                path.push(next);
                prev = cur;
                cur = next;
            }
            out.push(Chain { path });
        }
        out
    };

    for v in 0..n {
        if anchor[v] {
            chains.extend(walk(v, &anchor, &mut used));
        }
    }
    // what is left are pure cycles
    for v in 0..n {
        if adj[v].iter().any(|&u| !used.contains(&key(v, u))) {
            anchor[v] = true;
            chains.extend(walk(v, &anchor, &mut used));
        }
    }
    chains
}

/// One pixel per hole of the mask. The boundary of any region cut off by a
/// covered shortcut lies on ink, so a hole is either wholly inside it or
/// wholly outside and one pixel decides.
fn hole_sites(mask: &BinaryImage) -> Vec<(i64, i64)> {
    mask.holes()
        .iter()
        .map(|h| (h[0].0 as i64, h[0].1 as i64))
        .collect()
}

/// Even-odd test of `p` against the closed polygon `poly`.
fn inside(p: (i64, i64), poly: &[(i64, i64)]) -> bool {
    let mut odd = false;
    let n = poly.len();
    for k in 0..n {
        let (a, b) = (poly[k], poly[(k + 1) % n]);
        if (a.1 > p.1) != (b.1 > p.1) {
            // x of the edge at height p.1, compared without division
            let lhs = (p.0 - a.0) * (b.1 - a.1);
            let rhs = (b.0 - a.0) * (p.1 - a.1);
            if (b.1 > a.1 && lhs < rhs) || (b.1 < a.1 && lhs > rhs) {
                odd = !odd;
            }
        }
    }
    odd
}

fn shortcut_ok(mask: &BinaryImage, holes: &[(i64, i64)], run: &[(i64, i64)]) -> bool {
    let (a, b) = (run[0], run[run.len() - 1]);
    segment_covered(mask, a, b) && !holes.iter().any(|&h| inside(h, run))
}

struct Reducer<'a> {
    pts: Vec<(i64, i64)>,
    mask: &'a BinaryImage,
    holes: &'a [(i64, i64)],
    reach: Vec<usize>,
}

impl<'a> Reducer<'a> {
    fn new(pts: Vec<(i64, i64)>, mask: &'a BinaryImage, holes: &'a [(i64, i64)]) -> Self {
        let n = pts.len();
        let mut r = Reducer {
            pts,
            mask,
            holes,
            reach: Vec::new(),
        };
        r.reach = (0..n).map(|i| r.search(i, n - 1)).collect();
        r
    }

    fn covered(&self, i: usize, j: usize) -> bool {
        shortcut_ok(self.mask, self.holes, &self.pts[i..=j])
    }

    /// Largest `j` in `(i, hi]` with a covered segment, found by bisection
    /// (coverage is close to monotone along a chain); `i` when none.
    fn search(&self, i: usize, hi: usize) -> usize {
        if i >= hi {
            return i;
        }
        if self.covered(i, hi) {
            return hi;
        }
        let (mut lo, mut up) = (i, hi); // lo: known good (or i), up: known bad
        if !self.covered(i, i + 1) {
            return i;
        }
        lo = lo.max(i + 1);
        while up - lo > 1 {
            let mid = lo + (up - lo) / 2;
            if self.covered(i, mid) {
                lo = mid;
            } else {
                up = mid;
            }
        }
        lo
    }

    fn reach_within(&self, i: usize, hi: usize) -> usize {
        if self.reach[i] <= hi {
            self.reach[i]
        } else {
            self.search(i, hi)
        }
    }

    /// Indices kept between `lo` and `hi` (both kept, both included).
    fn reduce(&self, lo: usize, hi: usize, rng: &mut Option<ChaCha8Rng>, keep: &mut Vec<usize>) {
        if hi <= lo + 1 {
            return;
        }
        let spans: Vec<(usize, usize)> = (lo..hi)
            .map(|i| (i, self.reach_within(i, hi)))
            .filter(|&(i, j)| j >= i + 2)
            .collect();
        let pick = match rng {
            None => spans.iter().copied().max_by(|a, b| {
                (a.1 - a.0).cmp(&(b.1 - b.0)).then(b.0.cmp(&a.0))
            }),
            Some(rng) if !spans.is_empty() => {
                let (i, j) = spans[rng.gen_range(0..spans.len())];
                Some((i, rng.gen_range(i + 2..=j)))
            }
            Some(_) => None,
        };
        match pick {
            None => keep.extend(lo + 1..hi),
            Some((i, j)) => {
                self.reduce(lo, i, rng, keep);
                if i != lo {
                    keep.push(i);
                }
                if j != hi {
                    keep.push(j);
                }
                self.reduce(j, hi, rng, keep);
            }
        }
    }
}

fn farthest_from_segment(pts: &[(i64, i64)], a: (i64, i64), b: (i64, i64), among: &[usize]) -> Option<usize> {
    let (pa, pb) = (Point::<f64>::from_pixel(a.0, a.1), Point::<f64>::from_pixel(b.0, b.1));
    among.iter().copied().max_by(|&i, &j| {
        let di = crate::geometry::distance_to_line(Point::from_pixel(pts[i].0, pts[i].1), pa, pb);
        let dj = crate::geometry::distance_to_line(Point::from_pixel(pts[j].0, pts[j].1), pa, pb);
        di.total_cmp(&dj).then(j.cmp(&i))
    })
}

/// Simplifies a thinned graph against the pre-thinning mask.
pub fn simplify<T: Real>(g: &ThinGraph, mask: &BinaryImage, order: SimplifyOrder) -> SimplifiedGraph<T> {
    let adj = g.adjacency();
    let holes = hole_sites(mask);
    let mut chains = extract_chains(g, &adj);
    let mut rng = match order {
        SimplifyOrder::Deterministic => None,
        SimplifyOrder::Seeded(s) => Some(ChaCha8Rng::seed_from_u64(s)),
    };
    match rng.as_mut() {
        None => chains.sort_by(|a, b| {
            let ka = (a.path[0].min(*a.path.last().unwrap()), a.path[0]);
            let kb = (b.path[0].min(*b.path.last().unwrap()), b.path[0]);
            b.path.len().cmp(&a.path.len()).then(ka.cmp(&kb))
        }),
        Some(r) => chains.shuffle(r),
    }

    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut edges: BTreeSet<(usize, usize)> = chains
        .iter()
        .filter(|c| c.path.len() == 2)
        .map(|c| key(c.path[0], c.path[1]))
        .collect();

    for chain in chains.iter().filter(|c| c.path.len() > 2) {
        let path = &chain.path;
        let pts: Vec<(i64, i64)> = path.iter().map(|&v| g.vertices[v]).collect();
        let last = path.len() - 1;
        let closed = path[0] == path[last];
        let red = Reducer::new(pts.clone(), mask, &holes);
        let mut keep = vec![0];
        if closed {
            // split at the vertex farthest from the anchor
            let a = Point::<f64>::from_pixel(pts[0].0, pts[0].1);
            let m = (1..last)
                .max_by(|&i, &j| {
                    let di = a.distance(Point::from_pixel(pts[i].0, pts[i].1));
                    let dj = a.distance(Point::from_pixel(pts[j].0, pts[j].1));
                    di.total_cmp(&dj).then(j.cmp(&i))
                })
                .unwrap_or(1);
            let mut first = Vec::new();
            red.reduce(0, m, &mut rng, &mut first);
            let mut second = Vec::new();
            red.reduce(m, last, &mut rng, &mut second);
            if first.is_empty() && second.is_empty() {
                let pool: Vec<usize> = if m > 1 { (1..m).collect() } else { (m + 1..last).collect() };
                if let Some(extra) = farthest_from_segment(&pts, pts[0], pts[m], &pool) {
                    if extra < m {
                        first.push(extra);
                    } else {
                        second.push(extra);
                    }
                }
            }
            first.sort_unstable();
            second.sort_unstable();
            keep.extend(first);
            keep.push(m);
            keep.extend(second);
        } else {
            let mut inner = Vec::new();
            red.reduce(0, last, &mut rng, &mut inner);
            inner.sort_unstable();
            if inner.is_empty() && edges.contains(&key(path[0], path[last])) {
                let pool: Vec<usize> = (1..last).collect();
                inner.extend(farthest_from_segment(&pts, pts[0], pts[last], &pool));
            }
            keep.extend(inner);
        }
        keep.push(last);
        for w in keep.windows(2) {
            edges.insert(key(path[w[0]], path[w[1]]));
        }
    }

    final_pass(g, mask, &holes, &mut edges);

    // keep vertices that still carry an edge, plus isolated pixels
    let mut alive = vec![false; g.vertices.len()];
    for &(a, b) in &edges {
        alive[a] = true;
        alive[b] = true;
    }
    for (v, a) in adj.iter().enumerate() {
        if a.is_empty() {
            alive[v] = true;
        }
    }
    let mut remap = vec![usize::MAX; g.vertices.len()];
    let mut vertices = Vec::new();
    for v in 0..g.vertices.len() {
        if alive[v] {
            remap[v] = vertices.len();
            let (x, y) = g.vertices[v];
            vertices.push(Point::from_pixel(x, y));
        }
    }
    let edges = edges.into_iter().map(|(a, b)| (remap[a], remap[b])).collect();
    SimplifiedGraph::new(vertices, edges)
}

/// Removes degree-2 vertices whose neighbours can be joined by a valid
/// shortcut, until none remain. Degrees of junctions and end points never
/// change during simplification, so only chain vertices and cycle seeds are
/// affected.
fn final_pass(
    g: &ThinGraph,
    mask: &BinaryImage,
    holes: &[(i64, i64)],
    edges: &mut BTreeSet<(usize, usize)>,
) {
    let n = g.vertices.len();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for &(a, b) in edges.iter() {
        adj[a].insert(b);
        adj[b].insert(a);
    }
    loop {
        let mut changed = false;
        for v in 0..n {
            if adj[v].len() != 2 {
                continue;
            }
            let mut it = adj[v].iter().copied();
            let (u, w) = (it.next().unwrap(), it.next().unwrap());
            let run = [g.vertices[u], g.vertices[v], g.vertices[w]];
            if adj[u].contains(&w) || !shortcut_ok(mask, holes, &run) {
                continue;
            }
            adj[v].clear();
            adj[u].remove(&v);
            adj[w].remove(&v);
            adj[u].insert(w);
            adj[w].insert(u);
            changed = true;
        }
        if !changed {
            break;
        }
    }
    edges.clear();
    for (a, list) in adj.iter().enumerate() {
        for &b in list {
            if a < b {
                edges.insert((a, b));
            }
        }
    }
}

/// Checks the fixed-point property: no removable degree-2 vertex remains.
/// Vertices that are the only way to keep a cycle at three vertices, or
/// whose removal would duplicate an edge, are exempt.
pub fn is_maximal<T: Real>(g: &SimplifiedGraph<T>, mask: &BinaryImage) -> bool {
    let adj = g.adjacency();
    let holes = hole_sites(mask);
    let px = |p: Point<T>| (p.x.round().to_f64_lossy() as i64, p.y.round().to_f64_lossy() as i64);
    adj.iter().enumerate().all(|(v, nb)| {
        if nb.len() != 2 {
            return true;
        }
        let (u, w) = (nb[0], nb[1]);
        if adj[u].binary_search(&w).is_ok() {
            return true;
        }
        let run = [px(g.vertices()[u]), px(g.vertices()[v]), px(g.vertices()[w])];
        !shortcut_ok(mask, &holes, &run)
    })
}
