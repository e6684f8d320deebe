//! Feature classes: a typed graph of primitives with a range for every
//! measurement of every primitive and every related pair.

mod interval;
mod learn;
mod model;
mod select;

use serde::{Deserialize, Serialize};

use crate::measurements::{relation_values, unary_values, Measure};
use crate::primitives::{Primitive, PrimitiveKind};
use crate::scalar::Real;
use crate::skeleton_graph::SimplifiedGraph;

pub use interval::{Interval, IntervalError, MEMBERSHIP_TOLERANCE};
pub use learn::{learn_class, slack_amount, LearnError, LearnOptions, WideCircular};
pub use model::{Model, ModelConfig, ModelError, MODEL_VERSION};
pub use select::{select_informative, validation_rates};

/// Primitive types as vertices, measured relations as edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DecompositionGraph {
    pub vertices: Vec<PrimitiveKind>,
    /// Unordered pairs stored as `(lo, hi)`, sorted; a relation is measured
    /// from the lower vertex to the higher one.
    pub edges: Vec<(usize, usize)>,
}

impl DecompositionGraph {
    /// Every pair related.
    pub fn complete(vertices: Vec<PrimitiveKind>) -> Self {
        let n = vertices.len();
        let edges = (0..n).flat_map(|j| (j + 1..n).map(move |k| (j, k))).collect();
        DecompositionGraph { vertices, edges }
    }

    pub fn new(vertices: Vec<PrimitiveKind>, edges: Vec<(usize, usize)>) -> Self {
        let mut edges: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .inspect(|&(a, b)| assert!(a != b && b < vertices.len(), "bad relation edge"))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        DecompositionGraph { vertices, edges }
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    /// Every type- and adjacency-preserving bijection `f` (as `f[j]`) from
    /// `self` onto `other`, in lexicographic order.
    pub fn bijections(&self, other: &DecompositionGraph) -> Vec<Vec<usize>> {
        let n = self.vertices.len();
        let mut out = Vec::new();
        if n != other.vertices.len() || self.edges.len() != other.edges.len() {
            return out;
        }
        let mut f = Vec::with_capacity(n);
        let mut used = vec![false; n];
        fn rec(
            a: &DecompositionGraph,
            b: &DecompositionGraph,
            f: &mut Vec<usize>,
            used: &mut [bool],
            out: &mut Vec<Vec<usize>>,
        ) {
            let j = f.len();
            if j == a.vertices.len() {
                out.push(f.clone());
                return;
            }
            for t in 0..b.vertices.len() {
                if used[t] || a.vertices[j] != b.vertices[t] {
                    continue;
                }
                let consistent = (0..j).all(|i| a.has_edge(i, j) == b.has_edge(f[i], t));
                if consistent {
                    used[t] = true;
                    f.push(t);
                    rec(a, b, f, used, out);
                    f.pop();
                    used[t] = false;
                }
            }
        }
        rec(self, other, &mut f, &mut used, &mut out);
        out
    }
}

/// A bijection if the graphs are equivalent.
pub fn graphs_equivalent(a: &DecompositionGraph, b: &DecompositionGraph) -> Option<Vec<usize>> {
    a.bijections(b).into_iter().next()
}

/// Measurements of a set of primitives: unary values per primitive and
/// relation values for every ordered pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasuredInstance {
    pub kinds: Vec<PrimitiveKind>,
    pub unary: Vec<Vec<f64>>,
    /// `relations[j][k]` measures `k` relative to `j` (empty when `j == k`).
    pub relations: Vec<Vec<Vec<f64>>>,
    /// Summed primitive length over the component length.
    pub coverage: f64,
}

impl MeasuredInstance {
    pub fn measure<T: Real>(g: &SimplifiedGraph<T>, prims: &[&Primitive<T>], graph_length: T) -> Self {
        let to64 = |v: Vec<T>| v.into_iter().map(T::to_f64_lossy).collect::<Vec<f64>>();
        let n = prims.len();
        let relations = (0..n)
            .map(|j| {
                (0..n)
                    .map(|k| {
                        if j == k {
                            Vec::new()
                        } else {
                            to64(relation_values(g, prims[j], prims[k], graph_length))
                        }
                    })
                    .collect()
            })
            .collect();
        let total = prims.iter().fold(T::zero(), |s, p| s + p.length);
        MeasuredInstance {
            kinds: prims.iter().map(|p| p.kind).collect(),
            unary: prims.iter().map(|p| to64(unary_values(g, p))).collect(),
            relations,
            coverage: (total / graph_length).to_f64_lossy(),
        }
    }

    /// The instance with its primitives reordered: new position `j` holds
    /// old primitive `f[j]`.
    pub fn permuted(&self, f: &[usize]) -> Self {
        MeasuredInstance {
            kinds: f.iter().map(|&i| self.kinds[i]).collect(),
            unary: f.iter().map(|&i| self.unary[i].clone()).collect(),
            relations: f
                .iter()
                .map(|&a| f.iter().map(|&b| self.relations[a][b].clone()).collect())
                .collect(),
            coverage: self.coverage,
        }
    }
}

/// Ranges per class vertex and per relation edge, aligned with
/// [`Measure::unary_names`] and [`Measure::relation_names`].
#[derive(Debug, Clone, PartialEq)]
pub struct RangeVector {
    pub unary: Vec<Vec<Interval>>,
    pub relations: Vec<Vec<Interval>>,
}

/// Where a class's source feature came from.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Provenance {
    /// Index of the source example in the training pool.
    pub dataset_index: usize,
    /// Walk of each primitive in the source graph.
    pub walks: Vec<Vec<usize>>,
    /// Widening fraction the ranges were built with.
    pub slack: f64,
    /// Number of examples the ranges were learned from.
    pub examples: usize,
}

/// A learned feature class.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureClass {
    pub id: String,
    pub label: u8,
    pub graph: DecompositionGraph,
    /// Measurements of the source feature, class vertex order.
    pub source: MeasuredInstance,
    pub ranges: RangeVector,
    /// Range of the summed primitive length over the component length.
    pub coverage: Interval,
    pub hit_rate: f64,
    pub false_alarm_rate: f64,
    pub provenance: Provenance,
}

impl FeatureClass {
    /// Membership of an instance whose primitive `j` is assigned to class
    /// vertex `j`.
    pub fn accepts_aligned(&self, inst: &MeasuredInstance) -> bool {
        if inst.kinds != self.graph.vertices || !self.coverage.contains(inst.coverage) {
            return false;
        }
        let unary_ok = self
            .ranges
            .unary
            .iter()
            .zip(&inst.unary)
            .all(|(r, v)| r.iter().zip(v).all(|(i, &x)| i.contains(x)));
        unary_ok
            && self
                .graph
                .edges
                .iter()
                .zip(&self.ranges.relations)
                .all(|(&(j, k), r)| r.iter().zip(&inst.relations[j][k]).all(|(i, &x)| i.contains(x)))
    }

    /// Names of the ranges of class vertex `j`.
    pub fn unary_names(&self, j: usize) -> &'static [Measure] {
        Measure::unary_names(self.graph.vertices[j])
    }

    /// Names of the ranges of relation edge `e`.
    pub fn relation_names(&self, e: usize) -> Vec<Measure> {
        let (j, k) = self.graph.edges[e];
        Measure::relation_names(self.graph.vertices[j], self.graph.vertices[k])
    }
}

/// Membership test: some bijection between the candidate's primitives and
/// the class vertices (types preserved, relations mapped onto relations)
/// puts every measurement inside its range. Returns that bijection as
/// `f[class vertex] = candidate primitive`.
pub fn class_membership(
    candidate: &DecompositionGraph,
    inst: &MeasuredInstance,
    cls: &FeatureClass,
) -> Option<Vec<usize>> {
    cls.graph
        .bijections(candidate)
        .into_iter()
        .find(|f| cls.accepts_aligned(&inst.permuted(f)))
}
