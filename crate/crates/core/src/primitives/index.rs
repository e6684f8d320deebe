use serde::{Deserialize, Serialize};

use super::{classify_walk, find_loops, EdgeSet, Primitive, PrimitiveKind, Walk};
use crate::scalar::Real;
use crate::skeleton_graph::SimplifiedGraph;

/// Limits for walk enumeration and the line test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct PrimitiveConfig {
    pub line_threshold: f64,
    /// Longest walk or cycle considered, in edges.
    pub edge_budget: usize,
    /// Most walks (and, separately, cycles) enumerated per graph.
    pub walk_cap: usize,
}

impl Default for PrimitiveConfig {
    fn default() -> Self {
        PrimitiveConfig {
            line_threshold: 0.1,
            edge_budget: 24,
            walk_cap: 200_000,
        }
    }
}

/// Open simple paths of 1..=`budget` edges using only `allowed` edges (all
/// edges when `None`), each once in canonical orientation. The flag reports
/// that `cap` was hit.
pub fn simple_paths<T: Real>(
    g: &SimplifiedGraph<T>,
    allowed: Option<&EdgeSet>,
    budget: usize,
    cap: usize,
) -> (Vec<Walk>, bool) {
    let n = g.vertices().len();
    let mut adj = vec![Vec::new(); n];
    for (e, &(a, b)) in g.edges().iter().enumerate() {
        if allowed.is_none_or(|s| s.contains(e)) {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    let mut out = Vec::new();
    let mut on_path = vec![false; n];
    for s in 0..n {
        let mut path = vec![s];
        on_path[s] = true;
        let mut stack = vec![0usize];
        while let Some(pos) = stack.last_mut() {
            let v = *path.last().unwrap();
            if *pos >= adj[v].len() || path.len() > budget {
                stack.pop();
                on_path[v] = false;
                path.pop();
                continue;
            }
            let u = adj[v][*pos];
            *pos += 1;
            if on_path[u] {
                continue;
            }
            on_path[u] = true;
            path.push(u);
            if u > s {
                if out.len() >= cap {
                    return (out, true);
                }
                out.push(Walk::new(path.clone()));
            }
            stack.push(0);
        }
    }
    (out, false)
}

/// A primitive reading of a walk together with the edges it uses.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate<T> {
    pub primitive: Primitive<T>,
    pub edges: EdgeSet,
}

/// Every primitive reading of every walk and cycle within the budget.
#[derive(Debug, Clone)]
pub struct PrimitiveIndex<T> {
    pub candidates: Vec<Candidate<T>>,
    /// Candidate indices per kind (in `PrimitiveKind::ALL` order), longest
    /// first.
    pub by_kind: [Vec<usize>; 4],
    /// Enumeration stopped at a cap; the index may be incomplete.
    pub exhausted: bool,
    pub edge_count: usize,
}

fn kind_slot(k: PrimitiveKind) -> usize {
    PrimitiveKind::ALL.iter().position(|&x| x == k).unwrap()
}

impl<T: Real> PrimitiveIndex<T> {
    pub fn build(g: &SimplifiedGraph<T>, cfg: &PrimitiveConfig) -> Self {
        Self::build_within(g, None, cfg)
    }

    /// Restricts candidates to walks over `allowed` edges.
    pub fn build_within(g: &SimplifiedGraph<T>, allowed: Option<&EdgeSet>, cfg: &PrimitiveConfig) -> Self {
        let m = g.edges().len();
        let threshold = T::lit(cfg.line_threshold);
        let (paths, mut exhausted) = simple_paths(g, allowed, cfg.edge_budget, cfg.walk_cap);
        let mut candidates = Vec::new();
        for walk in paths {
            let edges = EdgeSet::from_indices(m, &walk.edge_indices(g));
            for primitive in classify_walk(g, &walk, threshold) {
                candidates.push(Candidate {
                    primitive,
                    edges: edges.clone(),
                });
            }
        }
        let (loops, loops_exhausted) = find_loops(g, cfg.edge_budget, cfg.walk_cap);
        exhausted |= loops_exhausted;
        for primitive in loops {
            let edges = EdgeSet::from_indices(m, &primitive.walk.edge_indices(g));
            if allowed.is_none_or(|s| edges.is_subset_of(s)) {
                candidates.push(Candidate { primitive, edges });
            }
        }
        let mut by_kind: [Vec<usize>; 4] = Default::default();
        for (i, c) in candidates.iter().enumerate() {
            by_kind[kind_slot(c.primitive.kind)].push(i);
        }
        for list in &mut by_kind {
            list.sort_by(|&a, &b| {
                let (pa, pb) = (&candidates[a].primitive, &candidates[b].primitive);
                pb.length.partial_cmp(&pa.length).unwrap().then_with(|| pa.walk.cmp(&pb.walk))
            });
        }
        PrimitiveIndex {
            candidates,
            by_kind,
            exhausted,
            edge_count: m,
        }
    }

    pub fn of_kind(&self, k: PrimitiveKind) -> &[usize] {
        &self.by_kind[kind_slot(k)]
    }
}
