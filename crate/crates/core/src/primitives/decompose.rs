//! Exact covers of an edge set by edge-disjoint primitives.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{EdgeSet, Primitive, PrimitiveConfig, PrimitiveIndex};
use crate::scalar::Real;
use crate::skeleton_graph::SimplifiedGraph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct DecomposeConfig {
    pub primitives: PrimitiveConfig,
    /// Covers kept, best first.
    pub max_decompositions: usize,
    /// Largest number of primitives in one cover.
    pub max_primitives: usize,
    /// Search nodes before giving up.
    pub node_cap: usize,
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        DecomposeConfig {
            primitives: PrimitiveConfig::default(),
            max_decompositions: 10,
            max_primitives: 8,
            node_cap: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct Decomposition<T> {
    pub primitives: Vec<Primitive<T>>,
    /// Covered graph edge indices, ascending.
    pub edges: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecomposeResult<T> {
    pub decompositions: Vec<Decomposition<T>>,
    /// A cap was hit; better covers may exist.
    pub exhausted: bool,
}

/// Fewer primitives first, then longer primitives first (lengths compared
/// in descending order), then kinds and walks for determinism.
pub fn cover_order<T: Real>(a: &Decomposition<T>, b: &Decomposition<T>) -> Ordering {
    let lengths = |d: &Decomposition<T>| {
        let mut l: Vec<T> = d.primitives.iter().map(|p| p.length).collect();
        l.sort_by(|x, y| y.partial_cmp(x).unwrap());
        l
    };
    let key = |d: &Decomposition<T>| {
        let mut k: Vec<_> = d.primitives.iter().map(|p| (p.kind, p.walk.clone())).collect();
        k.sort();
        k
    };
    a.primitives
        .len()
        .cmp(&b.primitives.len())
        .then_with(|| {
            let (la, lb) = (lengths(a), lengths(b));
            la.iter()
                .zip(&lb)
                .map(|(x, y)| y.partial_cmp(x).unwrap())
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
        .then_with(|| key(a).cmp(&key(b)))
}

struct Search<'a, T> {
    index: &'a PrimitiveIndex<T>,
    containing: Vec<Vec<usize>>,
    max_edges: usize,
    nodes: usize,
    node_cap: usize,
    chosen: Vec<usize>,
    found: Vec<Vec<usize>>,
}

impl<T: Real> Search<'_, T> {
    /// Covers `remaining` with exactly `left` more primitives.
    fn run(&mut self, remaining: &EdgeSet, left: usize) -> bool {
        self.nodes += 1;
        if self.nodes > self.node_cap {
            return false;
        }
        let Some(e) = remaining.first() else {
            if left == 0 {
                self.found.push(self.chosen.clone());
            }
            return true;
        };
        if left == 0 || remaining.len() > left * self.max_edges {
            return true;
        }
        for k in 0..self.containing[e].len() {
            let c = self.containing[e][k];
            let cand = &self.index.candidates[c];
            if !cand.edges.is_subset_of(remaining) {
                continue;
            }
            let mut rest = remaining.clone();
            rest.difference_with(&cand.edges);
            self.chosen.push(c);
            let ok = self.run(&rest, left - 1);
            self.chosen.pop();
            if !ok {
                return false;
            }
        }
        true
    }
}

/// Decomposes the subgraph formed by `edges` into edge-disjoint primitives
/// covering it exactly. Covers are found by increasing primitive count and
/// returned in [`cover_order`], at most `max_decompositions` of them.
pub fn decompose<T: Real>(g: &SimplifiedGraph<T>, edges: &[usize], cfg: &DecomposeConfig) -> DecomposeResult<T> {
    let m = g.edges().len();
    let sub = EdgeSet::from_indices(m, edges);
    if sub.is_empty() {
        return DecomposeResult {
            decompositions: Vec::new(),
            exhausted: false,
        };
    }
    let index = PrimitiveIndex::build_within(g, Some(&sub), &cfg.primitives);
    let mut containing = vec![Vec::new(); m];
    for (c, cand) in index.candidates.iter().enumerate() {
        for e in cand.edges.iter() {
            containing[e].push(c);
        }
    }
    let max_edges = index.candidates.iter().map(|c| c.edges.len()).max().unwrap_or(0);
    let mut search = Search {
        index: &index,
        containing,
        max_edges,
        nodes: 0,
        node_cap: cfg.node_cap,
        chosen: Vec::new(),
        found: Vec::new(),
    };
    let mut exhausted = index.exhausted;
    for k in 1..=cfg.max_primitives.min(sub.len()) {
        if !search.run(&sub, k) {
            exhausted = true;
            break;
        }
        if search.found.len() >= cfg.max_decompositions {
            break;
        }
    }
    let mut out: Vec<Decomposition<T>> = search
        .found
        .iter()
        .map(|cover| Decomposition {
            primitives: cover.iter().map(|&c| index.candidates[c].primitive.clone()).collect(),
            edges: sub.iter().collect(),
        })
        .collect();
    out.sort_by(cover_order);
    out.truncate(cfg.max_decompositions);
    DecomposeResult {
        decompositions: out,
        exhausted,
    }
}
