//! Random graphs and classes for property tests, and exhaustive oracles
//! for the search routines.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::features::{
    learn_class, DecompositionGraph, FeatureClass, Interval, LearnOptions, MeasuredInstance, Provenance, RangeVector,
    WideCircular,
};
use crate::geometry::Point;
use crate::measurements::Measure;
use crate::primitives::{classify_walk, Primitive, PrimitiveKind, Walk};
use crate::scalar::Real;
use crate::skeleton_graph::SimplifiedGraph;

/// Connected graph with at most `max_edges` edges on distinct integer
/// coordinates in `[0, span)^2`. Vertices are listed in raster order, like
/// those produced by simplification.
pub fn random_graph<T: Real, R: Rng + ?Sized>(rng: &mut R, max_edges: usize, span: i64) -> SimplifiedGraph<T> {
    assert!(max_edges >= 1 && span >= 4);
    let m = rng.gen_range(1..=max_edges);
    let n = rng.gen_range(2..=m + 1).min((span * span) as usize);
    let mut pts: Vec<(i64, i64)> = Vec::with_capacity(n);
    while pts.len() < n {
        let p = (rng.gen_range(0..span), rng.gen_range(0..span));
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    pts.sort_by_key(|&(x, y)| (y, x));
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges: Vec<(usize, usize)> = (1..n)
        .map(|i| {
            let j = order[rng.gen_range(0..i)];
            (order[i].min(j), order[i].max(j))
        })
        .collect();
    let mut tries = 0;
    while edges.len() < m && tries < 100 {
        tries += 1;
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let e = (a.min(b), a.max(b));
        if a != b && !edges.contains(&e) {
            edges.push(e);
        }
    }
    let vertices = pts.into_iter().map(|(x, y)| Point::from_pixel(x, y)).collect();
    SimplifiedGraph::new(vertices, edges)
}

/// Kind and walk per class vertex.
pub type Assignment = Vec<(PrimitiveKind, Vec<usize>)>;

/// The walk using exactly `edges` if they form one simple path or cycle,
/// in canonical orientation.
pub fn walk_of_edges<T: Real>(g: &SimplifiedGraph<T>, edges: &[usize]) -> Option<Walk> {
    let n = g.vertices().len();
    let mut adj = vec![Vec::new(); n];
    for &e in edges {
        let (a, b) = g.edges()[e];
        adj[a].push(b);
        adj[b].push(a);
    }
    if edges.is_empty() || adj.iter().any(|a| a.len() > 2) {
        return None;
    }
    let used: Vec<usize> = (0..n).filter(|&v| !adj[v].is_empty()).collect();
    let ends: Vec<usize> = used.iter().copied().filter(|&v| adj[v].len() == 1).collect();
    let start = match ends.len() {
        0 => used[0],
        2 => ends[0],
        _ => return None,
    };
    let mut walk = vec![start];
    let (mut prev, mut cur) = (usize::MAX, start);
    while let Some(&next) = adj[cur].iter().find(|&&u| u != prev) {
        if next == start {
            walk.push(start);
            break;
        }
        walk.push(next);
        prev = cur;
        cur = next;
    }
    // a second component leaves edges unvisited
    (walk.len() - 1 == edges.len()).then(|| Walk::new(walk).canonical())
}

/// Every primitive of a small graph, found by classifying the walk of each
/// edge subset. Exponential in the edge count.
pub fn brute_force_primitives<T: Real>(g: &SimplifiedGraph<T>, line_threshold: T) -> Vec<Primitive<T>> {
    let m = g.edges().len();
    assert!(m <= 16, "brute force needs a small graph");
    (1u32..1 << m)
        .filter_map(|mask| walk_of_edges(g, &(0..m).filter(|e| mask & (1 << e) != 0).collect::<Vec<_>>()))
        .flat_map(|w| classify_walk(g, &w, line_threshold))
        .collect()
}

/// Every assignment of pairwise edge-disjoint primitives to the class
/// vertices that passes membership, by exhaustive enumeration.
pub fn brute_force_instances<T: Real>(g: &SimplifiedGraph<T>, cls: &FeatureClass, line_threshold: T) -> BTreeSet<Assignment> {
    let prims = brute_force_primitives(g, line_threshold);
    let edge_sets: Vec<BTreeSet<usize>> = prims.iter().map(|p| p.walk.edge_indices(g).into_iter().collect()).collect();
    let k = cls.graph.vertices.len();
    let mut out = BTreeSet::new();
    let mut pick: Vec<usize> = Vec::with_capacity(k);
    fn rec<T: Real>(
        g: &SimplifiedGraph<T>,
        cls: &FeatureClass,
        prims: &[Primitive<T>],
        edge_sets: &[BTreeSet<usize>],
        pick: &mut Vec<usize>,
        out: &mut BTreeSet<Assignment>,
    ) {
        if pick.len() == cls.graph.vertices.len() {
            let disjoint = pick
                .iter()
                .enumerate()
                .all(|(i, &a)| pick[i + 1..].iter().all(|&b| edge_sets[a].is_disjoint(&edge_sets[b])));
            if !disjoint {
                return;
            }
            let chosen: Vec<&Primitive<T>> = pick.iter().map(|&i| &prims[i]).collect();
            let inst = MeasuredInstance::measure(g, &chosen, g.total_length());
            if cls.accepts_aligned(&inst) {
                out.insert(chosen.iter().map(|p| (p.kind, p.walk.vertices.clone())).collect());
            }
            return;
        }
        let want = cls.graph.vertices[pick.len()];
        for i in 0..prims.len() {
            if prims[i].kind == want {
                pick.push(i);
                rec(g, cls, prims, edge_sets, pick, out);
                pick.pop();
            }
        }
    }
    rec(g, cls, &prims, &edge_sets, &mut pick, &mut out);
    out
}

/// A class shaped after random primitives of `g` (or random kinds when `g`
/// lacks them), learned with a random slack so that it sometimes matches.
pub fn random_class<R: Rng + ?Sized>(rng: &mut R, g: &SimplifiedGraph<f64>, line_threshold: f64) -> FeatureClass {
    let prims = brute_force_primitives(g, line_threshold);
    let k = rng.gen_range(1..=3);
    let kinds: Vec<PrimitiveKind> = (0..k)
        .map(|_| {
            if !prims.is_empty() && rng.gen_bool(0.8) {
                prims[rng.gen_range(0..prims.len())].kind
            } else {
                PrimitiveKind::ALL[rng.gen_range(0..4)]
            }
        })
        .collect();
    let graph = DecompositionGraph::complete(kinds.clone());
    let pool = |kind: PrimitiveKind| prims.iter().filter(move |p| p.kind == kind).collect::<Vec<_>>();
    let sample = |rng: &mut R| -> Option<MeasuredInstance> {
        let chosen: Option<Vec<&Primitive<f64>>> = kinds
            .iter()
            .map(|&kind| {
                let p = pool(kind);
                (!p.is_empty()).then(|| p[rng.gen_range(0..p.len())])
            })
            .collect();
        chosen.map(|c| MeasuredInstance::measure(g, &c, g.total_length()))
    };
    let examples: Vec<MeasuredInstance> = (0..rng.gen_range(1..=3)).filter_map(|_| sample(rng)).collect();
    let opts = LearnOptions {
        slack: [0.0, 0.2, 0.5, 1.0][rng.gen_range(0..4)],
        wide_circular: WideCircular::Unconstrained,
        ..LearnOptions::default()
    };
    let learned = examples.first().and_then(|first| {
        learn_class("random".into(), 0, graph.clone(), first.clone(), &examples, &opts, Provenance::default()).ok()
    });
    learned.unwrap_or_else(|| {
        // nothing of these kinds to learn from: unconstrained ranges
        let unary = kinds.iter().map(|&t| vec![Interval::Any; Measure::unary_names(t).len()]).collect();
        let relations = graph
            .edges
            .iter()
            .map(|&(a, b)| vec![Interval::Any; Measure::relation_names(kinds[a], kinds[b]).len()])
            .collect();
        FeatureClass {
            id: "random".into(),
            label: 0,
            graph: graph.clone(),
            source: MeasuredInstance {
                kinds: kinds.clone(),
                unary: Vec::new(),
                relations: Vec::new(),
                coverage: 0.0,
            },
            ranges: RangeVector { unary, relations },
            coverage: Interval::Any,
            hit_rate: 0.0,
            false_alarm_rate: 0.0,
            provenance: Provenance::default(),
        }
    })
}
