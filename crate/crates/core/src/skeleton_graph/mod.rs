//! Pixel graphs of skeletons and their simplification to minimal
//! piecewise-linear representations.

mod simplify;
mod skeletonize;
mod supercover;

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::raster::BinaryImage;
use crate::scalar::Real;

pub use simplify::{is_maximal, simplify, SimplifyOrder};
pub use skeletonize::{prune_spurs, skeletonize, stroke_widths, SkeletonConfig};
pub use supercover::{segment_covered, supercover};

/// One vertex per skeleton pixel; edges join 8-neighbours, except that a
/// diagonal pair is left unjoined when a pixel bridges it through a
/// horizontal and a vertical step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThinGraph {
    /// Pixel coordinates in raster order.
    pub vertices: Vec<(i64, i64)>,
    /// Unordered pairs stored as `(lo, hi)`, sorted.
    pub edges: Vec<(usize, usize)>,
}

impl ThinGraph {
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }
}

pub fn build_thin_graph(skeleton: &BinaryImage) -> ThinGraph {
    let vertices: Vec<(i64, i64)> = skeleton
        .black_pixels()
        .map(|(x, y)| (x as i64, y as i64))
        .collect();
    let index: HashMap<(i64, i64), usize> =
        vertices.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let black = |x: i64, y: i64| skeleton.get_signed(x, y);
    let mut edges = Vec::new();
    for (i, &(x, y)) in vertices.iter().enumerate() {
        // forward neighbours only, so every pair is visited once
        for (dx, dy) in [(1, 0), (0, 1)] {
            if let Some(&j) = index.get(&(x + dx, y + dy)) {
                edges.push((i.min(j), i.max(j)));
            }
        }
        for (dx, dy) in [(1, 1), (-1, 1)] {
            let (xj, yj) = (x + dx, y + dy);
            if let Some(&j) = index.get(&(xj, yj)) {
                // a bridge shares x with one end and y with the other
                let bridged = black(x, yj) || black(xj, y);
                if !bridged {
                    edges.push((i.min(j), i.max(j)));
                }
            }
        }
    }
    edges.sort_unstable();
    ThinGraph { vertices, edges }
}

/// Minimal representation: straight edges between absolute coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
#[serde(from = "GraphJson<T>", into = "GraphJson<T>")]
pub struct SimplifiedGraph<T> {
    vertices: Vec<Point<T>>,
    edges: Vec<(usize, usize)>,
    total_length: T,
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
struct GraphJson<T> {
    vertices: Vec<Point<T>>,
    edges: Vec<[usize; 2]>,
}

impl<T: Real> From<GraphJson<T>> for SimplifiedGraph<T> {
    fn from(j: GraphJson<T>) -> Self {
        SimplifiedGraph::new(j.vertices, j.edges.into_iter().map(|[a, b]| (a, b)).collect())
    }
}

impl<T: Real> From<SimplifiedGraph<T>> for GraphJson<T> {
    fn from(g: SimplifiedGraph<T>) -> Self {
        GraphJson {
            vertices: g.vertices,
            edges: g.edges.into_iter().map(|(a, b)| [a, b]).collect(),
        }
    }
}

impl<T: Real> SimplifiedGraph<T> {
    /// Normalizes edges to `(lo, hi)`, drops self-loops and duplicates, and
    /// sorts them. Panics on out-of-range vertex indices.
    pub fn new(vertices: Vec<Point<T>>, edges: Vec<(usize, usize)>) -> Self {
        let set: BTreeSet<(usize, usize)> = edges
            .into_iter()
            .filter(|&(a, b)| a != b)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        let edges: Vec<_> = set.into_iter().collect();
        assert!(edges.iter().all(|&(_, b)| b < vertices.len()), "edge out of range");
        let total_length = edges
            .iter()
            .fold(T::zero(), |acc, &(a, b)| acc + vertices[a].distance(vertices[b]));
        SimplifiedGraph {
            vertices,
            edges,
            total_length,
        }
    }

    pub fn empty() -> Self {
        SimplifiedGraph::new(Vec::new(), Vec::new())
    }

    pub fn vertices(&self) -> &[Point<T>] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn total_length(&self) -> T {
        self.total_length
    }

    pub fn edge_length(&self, e: usize) -> T {
        let (a, b) = self.edges[e];
        self.vertices[a].distance(self.vertices[b])
    }

    /// Index of the edge joining `a` and `b`, if any.
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.binary_search(&(a.min(b), a.max(b))).ok()
    }

    /// Sorted neighbour lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn translated(&self, dx: T, dy: T) -> Self {
        let d = Point::new(dx, dy);
        SimplifiedGraph::new(
            self.vertices.iter().map(|&p| p + d).collect(),
            self.edges.clone(),
        )
    }

    /// Uniform scaling about the origin.
    pub fn scaled(&self, s: T) -> Self {
        SimplifiedGraph::new(
            self.vertices.iter().map(|&p| p * s).collect(),
            self.edges.clone(),
        )
    }

    /// Axis-aligned bounds `(xmin, ymin, xmax, ymax)`.
    pub fn bounding_box(&self) -> Option<(T, T, T, T)> {
        let first = self.vertices.first()?;
        Some(self.vertices.iter().fold(
            (first.x, first.y, first.x, first.y),
            |(x0, y0, x1, y1), p| (x0.min(p.x), y0.min(p.y), x1.max(p.x), y1.max(p.y)),
        ))
    }
}

/// Splits a graph into connected components (isolated vertices included),
/// ordered by their smallest vertex index. Coordinates are unchanged.
pub fn split_components<T: Real>(g: &SimplifiedGraph<T>) -> Vec<SimplifiedGraph<T>> {
    let n = g.vertices().len();
    let adj = g.adjacency();
    let mut comp = vec![usize::MAX; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = groups.len();
        let mut members = vec![s];
        comp[s] = id;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &u in &adj[v] {
                if comp[u] == usize::MAX {
                    comp[u] = id;
                    members.push(u);
                    q.push_back(u);
                }
            }
        }
        members.sort_unstable();
        groups.push(members);
    }
    groups
        .iter()
        .map(|members| {
            let local: HashMap<usize, usize> =
                members.iter().enumerate().map(|(i, &v)| (v, i)).collect();
            let vertices = members.iter().map(|&v| g.vertices()[v]).collect();
            let edges = g
                .edges()
                .iter()
                .filter(|(a, _)| local.contains_key(a))
                .map(|(a, b)| (local[a], local[b]))
                .collect();
            SimplifiedGraph::new(vertices, edges)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img(points: &[(usize, usize)]) -> BinaryImage {
        BinaryImage::from_black(4, 4, points.iter().copied())
    }

    #[test]
    fn horizontal_neighbours_join() {
        let g = build_thin_graph(&img(&[(0, 0), (1, 0)]));
        assert_eq!(g.edges, vec![(0, 1)]);
    }

    #[test]
    fn bridged_diagonal_is_excluded() {
        let g = build_thin_graph(&img(&[(0, 0), (1, 1), (1, 0)]));
        // raster order: (0,0)=0, (1,0)=1, (1,1)=2
        assert_eq!(g.vertices, vec![(0, 0), (1, 0), (1, 1)]);
        assert_eq!(g.edges, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn lone_diagonal_joins() {
        let g = build_thin_graph(&img(&[(2, 0), (1, 1), (0, 2)]));
        assert_eq!(g.edges, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn isolated_pixel() {
        let g = build_thin_graph(&img(&[(2, 2)]));
        assert_eq!(g.vertices.len(), 1);
        assert!(g.edges.is_empty());
    }

    fn triangle(offset: f64) -> (Vec<Point<f64>>, Vec<(usize, usize)>) {
        (
            vec![
                Point::new(offset, 0.0),
                Point::new(offset + 4.0, 0.0),
                Point::new(offset, 3.0),
            ],
            vec![(0, 1), (1, 2), (0, 2)],
        )
    }

    #[test]
    fn components() {
        let (mut v, mut e) = triangle(0.0);
        let (v2, e2) = triangle(100.0);
        e.extend(e2.iter().map(|&(a, b)| (a + 3, b + 3)));
        v.extend(v2);
        let g = SimplifiedGraph::new(v, e);
        assert_eq!(g.total_length(), 24.0);
        let parts = split_components(&g);
        assert_eq!(parts.len(), 2);
        assert!(parts.iter().all(|p| p.vertices().len() == 3));
        assert_eq!(parts[1].vertices()[0], Point::new(100.0, 0.0));

        let (v, e) = triangle(0.0);
        let one = SimplifiedGraph::new(v, e);
        assert_eq!(split_components(&one), vec![one.clone()]);
        assert!(split_components(&SimplifiedGraph::<f64>::empty()).is_empty());
    }

    #[test]
    fn json_roundtrip() {
        let (v, e) = triangle(0.5);
        let g = SimplifiedGraph::new(v, e);
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"vertices":[[0.5,0.0],[4.5,0.0],[0.5,3.0]],"edges":[[0,1],[0,2],[1,2]]}"#);
        let back: SimplifiedGraph<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
    }
}
