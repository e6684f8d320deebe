//! Walks in a simplified graph and their classification into arcs, lines
//! and loops.
//!
//! Open walks are stored in a canonical orientation: from the end point with
//! the smaller vertex index to the larger one. Vertex indices follow raster
//! order, which translation and uniform scaling preserve, so the orientation
//! (and with it the arc-plus / arc-minus distinction) is stable under both.
//! Closed walks start at their smallest vertex and continue towards the
//! smaller of its two cycle neighbours.

mod decompose;
mod edge_set;
mod index;

use serde::{Deserialize, Serialize};

use crate::geometry::{distance_to_line, turn_angle};
use crate::scalar::Real;
use crate::skeleton_graph::SimplifiedGraph;

pub use decompose::{cover_order, decompose, DecomposeConfig, DecomposeResult, Decomposition};
pub use edge_set::EdgeSet;
pub use index::{simple_paths, Candidate, PrimitiveConfig, PrimitiveIndex};

/// Turns with magnitude below this many degrees count as straight, and
/// turns within it of 180 degrees count as reversals.
pub const ZERO_TURN_DEG: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrimitiveKind {
    /// Every turn clockwise on screen.
    ArcPlus,
    /// Every turn counter-clockwise on screen.
    ArcMinus,
    Line,
    Loop,
}

impl PrimitiveKind {
    pub const ALL: [PrimitiveKind; 4] = [
        PrimitiveKind::ArcPlus,
        PrimitiveKind::ArcMinus,
        PrimitiveKind::Line,
        PrimitiveKind::Loop,
    ];

    pub fn is_arc(self) -> bool {
        matches!(self, PrimitiveKind::ArcPlus | PrimitiveKind::ArcMinus)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            PrimitiveKind::ArcPlus => "arc+",
            PrimitiveKind::ArcMinus => "arc-",
            PrimitiveKind::Line => "line",
            PrimitiveKind::Loop => "loop",
        }
    }
}

/// Vertex sequence; a closed walk repeats its first vertex at the end.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Walk {
    pub vertices: Vec<usize>,
}

impl Walk {
    pub fn new(vertices: Vec<usize>) -> Self {
        Walk { vertices }
    }

    pub fn is_closed(&self) -> bool {
        self.vertices.len() > 2 && self.vertices.first() == self.vertices.last()
    }

    pub fn edge_count(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn reversed(&self) -> Walk {
        Walk::new(self.vertices.iter().rev().copied().collect())
    }

    /// Distinct vertices (the closing repeat of a closed walk dropped).
    pub fn distinct(&self) -> &[usize] {
        if self.is_closed() {
            &self.vertices[..self.vertices.len() - 1]
        } else {
            &self.vertices
        }
    }

    /// Graph edge indices of the steps. Panics if a step is not an edge.
    pub fn edge_indices<T: Real>(&self, g: &SimplifiedGraph<T>) -> Vec<usize> {
        self.vertices
            .windows(2)
            .map(|w| g.edge_index(w[0], w[1]).expect("walk step is not a graph edge"))
            .collect()
    }

    /// Consecutive vertices adjacent and no vertex repeated (except the
    /// closing one).
    pub fn is_valid<T: Real>(&self, g: &SimplifiedGraph<T>) -> bool {
        let n = g.vertices().len();
        if self.vertices.len() < 2 || self.vertices.iter().any(|&v| v >= n) {
            return false;
        }
        let mut seen = self.distinct().to_vec();
        seen.sort_unstable();
        seen.dedup();
        seen.len() == self.distinct().len()
            && self.vertices.windows(2).all(|w| g.edge_index(w[0], w[1]).is_some())
    }

    pub fn length<T: Real>(&self, g: &SimplifiedGraph<T>) -> T {
        let p = g.vertices();
        self.vertices
            .windows(2)
            .fold(T::zero(), |acc, w| acc + p[w[0]].distance(p[w[1]]))
    }

    /// Signed turn at every interior vertex, degrees, clockwise positive.
    /// For a closed walk the turn at the closing vertex is included.
    pub fn turns<T: Real>(&self, g: &SimplifiedGraph<T>) -> Vec<T> {
        let p = g.vertices();
        let mut pts: Vec<usize> = self.vertices.clone();
        if self.is_closed() {
            pts.push(self.vertices[1]);
        }
        pts.windows(3)
            .map(|w| turn_angle(p[w[1]] - p[w[0]], p[w[2]] - p[w[1]]))
            .collect()
    }

    /// Canonical orientation (see module docs).
    pub fn canonical(&self) -> Walk {
        if self.is_closed() {
            let d = self.distinct();
            let k = d.len();
            let (start, _) = d.iter().enumerate().min_by_key(|&(_, &v)| v).unwrap();
            let next = d[(start + 1) % k];
            let prev = d[(start + k - 1) % k];
            let mut out: Vec<usize> = if next <= prev {
                (0..k).map(|i| d[(start + i) % k]).collect()
            } else {
                (0..k).map(|i| d[(start + k - i) % k]).collect()
            };
            out.push(out[0]);
            Walk::new(out)
        } else if self.vertices.first() > self.vertices.last() {
            self.reversed()
        } else {
            self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct Primitive<T> {
    pub kind: PrimitiveKind,
    #[serde(rename = "vertices")]
    pub walk: Walk,
    pub length: T,
}

/// Line test: every vertex lies within `threshold * length` of the chord.
/// The walk must be open with distinct end points.
pub fn classify_line<T: Real>(g: &SimplifiedGraph<T>, walk: &Walk, threshold: T) -> Option<Primitive<T>> {
    if walk.is_closed() || walk.vertices.len() < 2 {
        return None;
    }
    let p = g.vertices();
    let (a, b) = (p[walk.vertices[0]], p[*walk.vertices.last().unwrap()]);
    if (b - a).norm() <= T::zero() {
        return None;
    }
    let length = walk.length(g);
    let max_dev = walk.vertices[1..walk.vertices.len() - 1]
        .iter()
        .map(|&v| distance_to_line(p[v], a, b))
        .fold(T::zero(), T::max);
    (max_dev / length < threshold).then(|| Primitive {
        kind: PrimitiveKind::Line,
        walk: walk.clone(),
        length,
    })
}

/// Arc test: at least one interior turn, all non-zero turns share one sign,
/// each below 180 degrees in magnitude, total at most 360 degrees.
pub fn classify_arc<T: Real>(g: &SimplifiedGraph<T>, walk: &Walk) -> Option<Primitive<T>> {
    if walk.is_closed() || walk.vertices.len() < 3 {
        return None;
    }
    let p = g.vertices();
    if walk.vertices.windows(2).any(|w| p[w[0]] == p[w[1]]) {
        return None;
    }
    let eps = T::lit(ZERO_TURN_DEG);
    let turns: Vec<T> = walk.turns(g).into_iter().filter(|t| t.abs() >= eps).collect();
    if turns.is_empty() || turns.iter().any(|t| t.abs() >= T::half_turn() - eps) {
        return None;
    }
    let positive = turns[0] > T::zero();
    if turns.iter().any(|&t| (t > T::zero()) != positive) {
        return None;
    }
    let total = turns.iter().fold(T::zero(), |a, &t| a + t);
    if total.abs() > T::full_turn() + eps {
        return None;
    }
    Some(Primitive {
        kind: if positive { PrimitiveKind::ArcPlus } else { PrimitiveKind::ArcMinus },
        walk: walk.clone(),
        length: walk.length(g),
    })
}

/// Every primitive reading of a walk: a loop for a closed walk, otherwise
/// a line and/or an arc.
pub fn classify_walk<T: Real>(g: &SimplifiedGraph<T>, walk: &Walk, line_threshold: T) -> Vec<Primitive<T>> {
    if walk.is_closed() {
        return vec![Primitive {
            kind: PrimitiveKind::Loop,
            walk: walk.clone(),
            length: walk.length(g),
        }];
    }
    classify_line(g, walk, line_threshold)
        .into_iter()
        .chain(classify_arc(g, walk))
        .collect()
}

/// All simple cycles of at most `budget` edges, each once, as loop
/// primitives in canonical orientation. The flag reports that `cap` cycles
/// were reached before enumeration finished.
pub fn find_loops<T: Real>(g: &SimplifiedGraph<T>, budget: usize, cap: usize) -> (Vec<Primitive<T>>, bool) {
    let adj = g.adjacency();
    let n = adj.len();
    let mut out = Vec::new();
    let mut on_path = vec![false; n];
    let mut exhausted = false;
    for s in 0..n {
        let mut path = vec![s];
        on_path[s] = true;
        // iterative DFS over neighbour positions; only vertices > s allowed
        let mut stack = vec![0usize];
        while let Some(pos) = stack.last_mut() {
            let v = *path.last().unwrap();
            if *pos >= adj[v].len() {
                stack.pop();
                on_path[v] = false;
                path.pop();
                continue;
            }
            let u = adj[v][*pos];
            *pos += 1;
            if u == s && path.len() >= 3 && path[1] < v {
                if out.len() >= cap {
                    exhausted = true;
                    break;
                }
                let mut walk = path.clone();
                walk.push(s);
                let walk = Walk::new(walk);
                out.push(Primitive {
                    kind: PrimitiveKind::Loop,
                    length: walk.length(g),
                    walk,
                });
            } else if u > s && !on_path[u] && path.len() < budget {
                on_path[u] = true;
                path.push(u);
                stack.push(0);
            }
        }
        for &v in &path {
            on_path[v] = false;
        }
        if exhausted {
            break;
        }
    }
    (out, exhausted)
}

#[cfg(test)]
mod tests;
