//! Search for feature-class instances in simplified graphs, and scene,
//! single-digit and noisy-input classification built on it.

mod classify;

use serde::{Deserialize, Serialize};

use crate::features::{FeatureClass, Interval, MEMBERSHIP_TOLERANCE};
use crate::measurements::{relation_from_summaries, relation_vector, summarize, unary_values, Measure, Summary};
use crate::primitives::{EdgeSet, PrimitiveConfig, PrimitiveIndex, PrimitiveKind};
use crate::scalar::Real;
use crate::skeleton_graph::SimplifiedGraph;

pub use classify::{
    classify_graph, classify_scene, classify_single, recognize_noisy, CoverageScope, NoisyOutcome, Recognizer, SceneResult,
};

/// Search limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SearchBudget {
    pub primitives: PrimitiveConfig,
    /// Candidate trials per class per component.
    pub node_limit: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            primitives: PrimitiveConfig::default(),
            node_limit: 1_000_000,
        }
    }
}

/// One connected component with every candidate primitive and its
/// measurements computed once, shared by all class searches.
#[derive(Debug, Clone)]
pub struct PreparedGraph<T> {
    pub graph: SimplifiedGraph<T>,
    pub index: PrimitiveIndex<T>,
    pub summaries: Vec<Summary<T>>,
    pub unary: Vec<Vec<f64>>,
    /// Reference length for coverage and graph-normalized relations: the
    /// component's own length, or the whole image graph's for an image
    /// known to hold one object.
    pub length: T,
}

impl<T: Real> PreparedGraph<T> {
    pub fn new(graph: SimplifiedGraph<T>, cfg: &PrimitiveConfig) -> Self {
        let length = graph.total_length();
        Self::with_length(graph, cfg, length)
    }

    pub fn with_length(graph: SimplifiedGraph<T>, cfg: &PrimitiveConfig, length: T) -> Self {
        let index = PrimitiveIndex::build(&graph, cfg);
        let summaries = index.candidates.iter().map(|c| summarize(&graph, &c.primitive)).collect();
        let unary = index
            .candidates
            .iter()
            .map(|c| unary_values(&graph, &c.primitive).into_iter().map(T::to_f64_lossy).collect())
            .collect();
        PreparedGraph {
            graph,
            index,
            summaries,
            unary,
            length,
        }
    }

    /// Relation values of candidate `b` relative to candidate `a`.
    pub fn relation(&self, a: usize, b: usize) -> Vec<f64> {
        let (ca, cb) = (&self.index.candidates[a], &self.index.candidates[b]);
        let r = relation_from_summaries(
            &self.graph,
            (&ca.primitive, &self.summaries[a]),
            (&cb.primitive, &self.summaries[b]),
            self.length,
        );
        relation_vector(&r).into_iter().map(T::to_f64_lossy).collect()
    }

    /// Summed length of the candidates over the reference length.
    pub fn coverage(&self, assignment: &[usize]) -> f64 {
        let total = assignment
            .iter()
            .fold(T::zero(), |s, &c| s + self.index.candidates[c].primitive.length);
        (total / self.length).to_f64_lossy()
    }

    /// Bounding box `[xmin, ymin, xmax, ymax]` of the candidates' vertices.
    pub fn bbox(&self, assignment: &[usize]) -> [f64; 4] {
        let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        for &c in assignment {
            for &v in &self.index.candidates[c].primitive.walk.vertices {
                let p = self.graph.vertices()[v];
                let (x, y) = (p.x.to_f64_lossy(), p.y.to_f64_lossy());
                b = [b[0].min(x), b[1].min(y), b[2].max(x), b[3].max(y)];
            }
        }
        b
    }
}

/// A labeled image reduced to its prepared components.
#[derive(Debug, Clone)]
pub struct PreparedImage {
    pub label: u8,
    /// Position in the set it came from.
    pub index: usize,
    pub components: Vec<PreparedGraph<f64>>,
}

impl PreparedImage {
    /// Whether some component holds an instance of `cls`.
    pub fn fires(&self, cls: &FeatureClass, node_limit: usize) -> bool {
        self.components.iter().any(|pg| {
            let mut found = false;
            for_each_instance(pg, cls, node_limit, |_, _| {
                found = true;
                Visit::Stop
            });
            found
        })
    }
}

/// What a search visitor wants next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Visit {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchStats {
    pub nodes: usize,
    /// The node limit or the candidate enumeration cap was hit.
    pub exhausted: bool,
}

struct Plan {
    /// Class vertices in assignment order.
    order: Vec<usize>,
    /// Candidates passing the unary ranges, per class vertex, longest first.
    pools: Vec<Vec<usize>>,
    /// `edge_of[j][k]`: relation edge index between class vertices.
    edge_of: Vec<Vec<Option<usize>>>,
}

fn plan<T: Real>(pg: &PreparedGraph<T>, cls: &FeatureClass) -> Plan {
    let n = cls.graph.vertices.len();
    let mut edge_of = vec![vec![None; n]; n];
    for (e, &(j, k)) in cls.graph.edges.iter().enumerate() {
        edge_of[j][k] = Some(e);
        edge_of[k][j] = Some(e);
    }
    let count = |j: usize| {
        let rel: usize = cls
            .graph
            .edges
            .iter()
            .enumerate()
            .filter(|(_, &(a, b))| a == j || b == j)
            .map(|(e, _)| cls.ranges.relations[e].len())
            .sum();
        Measure::unary_names(cls.graph.vertices[j]).len() + rel
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&j| (std::cmp::Reverse(count(j)), j));
    let pools = (0..n)
        .map(|j| {
            pg.index
                .of_kind(cls.graph.vertices[j])
                .iter()
                .copied()
                .filter(|&c| cls.ranges.unary[j].iter().zip(&pg.unary[c]).all(|(i, &v)| i.contains(v)))
                .collect()
        })
        .collect();
    Plan { order, pools, edge_of }
}

struct Dfs<'a, T> {
    pg: &'a PreparedGraph<T>,
    cls: &'a FeatureClass,
    plan: Plan,
    assignment: Vec<usize>,
    used: EdgeSet,
    stats: SearchStats,
    limit: usize,
    /// Summed coverage of the longest pool entry of every vertex from a
    /// given depth on: an upper bound on what the rest can add.
    tail_max: Vec<f64>,
}

impl<'a, T: Real> Dfs<'a, T> {
    fn new(pg: &'a PreparedGraph<T>, cls: &'a FeatureClass, limit: usize) -> Self {
        let plan = plan(pg, cls);
        let n = plan.order.len();
        let mut tail_max = vec![0.0; n + 1];
        for d in (0..n).rev() {
            let longest = plan.pools[plan.order[d]]
                .first()
                .map_or(0.0, |&c| (pg.index.candidates[c].primitive.length / pg.length).to_f64_lossy());
            tail_max[d] = tail_max[d + 1] + longest;
        }
        Dfs {
            pg,
            cls,
            plan,
            assignment: vec![usize::MAX; n],
            used: EdgeSet::with_capacity(pg.index.edge_count),
            stats: SearchStats {
                nodes: 0,
                exhausted: pg.index.exhausted,
            },
            limit,
            tail_max,
        }
    }

    fn searchable(&self) -> bool {
        !self.plan.order.is_empty() && !self.pg.graph.edges().is_empty()
    }

    /// Relations between class vertex `j` (about to take candidate `c`)
    /// and every vertex assigned so far.
    fn relations_ok(&self, j: usize, c: usize) -> bool {
        (0..self.assignment.len()).all(|u| {
            let a = self.assignment[u];
            if u == j || a == usize::MAX {
                return true;
            }
            let Some(e) = self.plan.edge_of[u][j] else { return true };
            // relations run from the lower class vertex to the higher one
            let values = if u < j { self.pg.relation(a, c) } else { self.pg.relation(c, a) };
            self.cls.ranges.relations[e].iter().zip(&values).all(|(i, &v)| i.contains(v))
        })
    }

    /// Counts a node; false once the limit is passed.
    fn tick(&mut self) -> bool {
        self.stats.nodes += 1;
        if self.stats.nodes > self.limit {
            self.stats.exhausted = true;
            return false;
        }
        true
    }

    fn gain(&self, c: usize) -> f64 {
        (self.pg.index.candidates[c].primitive.length / self.pg.length).to_f64_lossy()
    }

    /// Tries `c` for `j`, recursing through `next`. Returns false to abort.
    fn descend(&mut self, j: usize, c: usize, next: impl FnOnce(&mut Self) -> bool) -> bool {
        let edges = self.pg.index.candidates[c].edges.clone();
        self.used.union_with(&edges);
        self.assignment[j] = c;
        let go_on = next(self);
        self.assignment[j] = usize::MAX;
        self.used.difference_with(&edges);
        go_on
    }

    /// Whether the remaining vertices can still lift coverage into range.
    fn coverage_reachable(&self, depth: usize, covered: f64) -> bool {
        match self.cls.coverage {
            Interval::Linear { lo, .. } => covered + self.tail_max[depth] >= lo - MEMBERSHIP_TOLERANCE * lo.abs().max(1.0),
            _ => true,
        }
    }

    fn fits(&self, j: usize, c: usize) -> bool {
        !self.pg.index.candidates[c].edges.intersects(&self.used) && self.relations_ok(j, c)
    }

    fn run_all(&mut self, depth: usize, covered: f64, visit: &mut dyn FnMut(&[usize], f64) -> Visit) -> bool {
        if depth == self.plan.order.len() {
            if !self.cls.coverage.contains(covered) {
                return true;
            }
            return visit(&self.assignment, covered) == Visit::Continue;
        }
        if !self.coverage_reachable(depth, covered) {
            return true;
        }
        let j = self.plan.order[depth];
        for k in 0..self.plan.pools[j].len() {
            let c = self.plan.pools[j][k];
            if !self.tick() {
                return false;
            }
            if self.fits(j, c) {
                let gain = self.gain(c);
                if !self.descend(j, c, |s| s.run_all(depth + 1, covered + gain, visit)) {
                    return false;
                }
            }
        }
        true
    }

    fn run_best(&mut self, depth: usize, covered: f64, best: &mut Option<(Vec<usize>, f64)>) -> bool {
        let bound = best.as_ref().map_or(f64::NEG_INFINITY, |b| b.1);
        if depth == self.plan.order.len() {
            if covered > bound && self.cls.coverage.contains(covered) {
                *best = Some((self.assignment.clone(), covered));
            }
            return true;
        }
        if covered + self.tail_max[depth] <= bound || !self.coverage_reachable(depth, covered) {
            return true;
        }
        let j = self.plan.order[depth];
        for k in 0..self.plan.pools[j].len() {
            let c = self.plan.pools[j][k];
            if !self.tick() {
                return false;
            }
            let gain = self.gain(c);
            let bound = best.as_ref().map_or(f64::NEG_INFINITY, |b| b.1);
            // pools are sorted by length, so no later entry can do better
            if covered + gain + self.tail_max[depth + 1] <= bound {
                break;
            }
            if self.fits(j, c) && !self.descend(j, c, |s| s.run_best(depth + 1, covered + gain, best)) {
                return false;
            }
        }
        true
    }
}

/// Calls `visit` with every member assignment (`assignment[j]` = candidate
/// index for class vertex `j`) and its coverage.
pub fn for_each_instance<T: Real>(
    pg: &PreparedGraph<T>,
    cls: &FeatureClass,
    node_limit: usize,
    mut visit: impl FnMut(&[usize], f64) -> Visit,
) -> SearchStats {
    let mut dfs = Dfs::new(pg, cls, node_limit);
    if dfs.searchable() {
        dfs.run_all(0, 0.0, &mut visit);
    }
    dfs.stats
}

/// The member assignment with the largest coverage (the first found among
/// equals).
pub fn best_instance<T: Real>(
    pg: &PreparedGraph<T>,
    cls: &FeatureClass,
    node_limit: usize,
) -> (Option<(Vec<usize>, f64)>, SearchStats) {
    let mut dfs = Dfs::new(pg, cls, node_limit);
    let mut best = None;
    if dfs.searchable() {
        dfs.run_best(0, 0.0, &mut best);
    }
    (best, dfs.stats)
}

/// A located instance of a class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Detection {
    pub label: u8,
    pub class_id: String,
    pub class_index: usize,
    pub coverage: f64,
    /// `[xmin, ymin, xmax, ymax]` in image pixels.
    pub bbox: [f64; 4],
    pub component: usize,
    /// Primitive per class vertex: kind and walk in component vertex indices.
    pub assignment: Vec<(PrimitiveKind, Vec<usize>)>,
}

impl Detection {
    pub fn new<T: Real>(pg: &PreparedGraph<T>, cls: &FeatureClass, class_index: usize, component: usize, assignment: &[usize], coverage: f64) -> Self {
        Detection {
            label: cls.label,
            class_id: cls.id.clone(),
            class_index,
            coverage,
            bbox: pg.bbox(assignment),
            component,
            assignment: assignment
                .iter()
                .map(|&c| {
                    let p = &pg.index.candidates[c].primitive;
                    (p.kind, p.walk.vertices.clone())
                })
                .collect(),
        }
    }
}

/// Every member assignment of `cls` in one component graph.
#[derive(Debug, Clone, PartialEq)]
pub struct FindResult {
    pub detections: Vec<Detection>,
    pub stats: SearchStats,
}

/// Enumerates all instances of `cls` in `g` (one component).
pub fn find_instances<T: Real>(g: &SimplifiedGraph<T>, cls: &FeatureClass, budget: &SearchBudget) -> FindResult {
    let pg = PreparedGraph::new(g.clone(), &budget.primitives);
    let mut detections = Vec::new();
    let stats = for_each_instance(&pg, cls, budget.node_limit, |a, cov| {
        detections.push(Detection::new(&pg, cls, 0, 0, a, cov));
        Visit::Continue
    });
    FindResult { detections, stats }
}

#[cfg(test)]
mod tests;
