//! Automatic training: feature proposal, class generation over a slack
//! grid, and validation-based selection.

use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::{prepare_set, FrontEnd};
use super::PipelineError;
use crate::features::{
    learn_class, select_informative, DecompositionGraph, FeatureClass, Interval, LearnOptions, MeasuredInstance,
    Model, ModelConfig, Provenance, RangeVector, WideCircular,
};
use crate::measurements::{Measure, Scale};
use crate::primitives::{decompose, DecomposeConfig, Decomposition, PrimitiveConfig};
use crate::raster::GrayImage;
use crate::recognizer::{best_instance, PreparedGraph, PreparedImage};
use crate::skeleton_graph::{SimplifiedGraph, SkeletonConfig};

/// Proposal ranges around a source instance: angles within `angle`
/// degrees, ratios within a factor of `ratio`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub angle: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Training images used per digit (the first ones of each digit).
    pub examples_per_digit: usize,
    /// Smallest share of the graph length a proposed feature must cover.
    pub coverage_floor: f64,
    /// Source examples drawn per digit.
    pub features_per_digit: usize,
    /// Decompositions tried per proposed feature, fewest primitives first.
    pub decompositions_per_feature: usize,
    pub perturbations: Vec<Perturbation>,
    pub slack_grid: Vec<f64>,
    pub fa_ceiling: f64,
    pub seed: u64,
    pub front: FrontEnd,
    pub primitives: PrimitiveConfig,
    pub node_limit: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            examples_per_digit: 100,
            coverage_floor: 0.9,
            features_per_digit: 40,
            decompositions_per_feature: 3,
            perturbations: vec![
                Perturbation { angle: 10.0, ratio: 1.1 },
                Perturbation { angle: 20.0, ratio: 1.25 },
                Perturbation { angle: 35.0, ratio: 1.5 },
                Perturbation { angle: 60.0, ratio: 2.0 },
            ],
            slack_grid: vec![0.0, 0.05, 0.1, 0.2],
            fa_ceiling: 0.01,
            seed: 0,
            front: FrontEnd::default(),
            primitives: PrimitiveConfig::default(),
            node_limit: 1_000_000,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |what: &str| Err(PipelineError::Config(what.to_string()));
        if self.examples_per_digit == 0 {
            return bad("examples per digit must be at least 1");
        }
        if !(self.coverage_floor > 0.0 && self.coverage_floor <= 1.0) {
            return bad("coverage floor must lie in (0, 1]");
        }
        if self.slack_grid.is_empty() || self.slack_grid.iter().any(|s| !(*s >= 0.0)) {
            return bad("slack grid must be nonempty and nonnegative");
        }
        if self.perturbations.is_empty() {
            return bad("at least one perturbation level is needed");
        }
        Ok(())
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            line_threshold: self.primitives.line_threshold,
            binarize_threshold: f64::from(self.front.binarize_threshold),
            upscale_factor: self.front.upscale_factor,
            hole_factor: self.front.skeleton.hole_factor,
            spur_factor: self.front.skeleton.spur_factor,
            edge_budget: self.primitives.edge_budget,
            slack_grid: self.slack_grid.clone(),
            fa_ceiling: self.fa_ceiling,
            examples_per_digit: self.examples_per_digit,
            seed: self.seed,
        }
    }
}

/// Rebuilds the front end and primitive settings a model was trained with.
pub fn settings_of(cfg: &ModelConfig) -> (FrontEnd, PrimitiveConfig) {
    let front = FrontEnd {
        upscale_factor: cfg.upscale_factor,
        binarize_threshold: cfg.binarize_threshold as f32,
        skeleton: SkeletonConfig {
            hole_factor: cfg.hole_factor,
            spur_factor: cfg.spur_factor,
            ..SkeletonConfig::default()
        },
    };
    let primitives = PrimitiveConfig {
        line_threshold: cfg.line_threshold,
        edge_budget: cfg.edge_budget,
        ..PrimitiveConfig::default()
    };
    (front, primitives)
}

/// Per-digit training counts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct DigitTraining {
    pub digit: u8,
    pub features: usize,
    pub decompositions: usize,
    pub candidates: usize,
    pub survivors: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct TrainReport {
    pub digits: Vec<DigitTraining>,
    pub seconds: f64,
}

/// Proposed features of one graph: the whole graph, and the graph minus
/// each pendant chain (a path from a degree-1 vertex to the first vertex
/// of another degree), when they keep at least `floor` of `reference`
/// length. Edge lists are ascending and distinct.
pub fn propose_features(g: &SimplifiedGraph<f64>, floor: f64, reference: f64) -> Vec<Vec<usize>> {
    let all: Vec<usize> = (0..g.edges().len()).collect();
    if all.is_empty() || g.total_length() < floor * reference {
        return Vec::new();
    }
    let mut out = vec![all.clone()];
    let adj = g.adjacency();
    for start in (0..adj.len()).filter(|&v| adj[v].len() == 1) {
        let mut chain = Vec::new();
        let (mut prev, mut cur) = (start, adj[start][0]);
        chain.push(g.edge_index(prev, cur).expect("adjacent"));
        while adj[cur].len() == 2 {
            let next = if adj[cur][0] == prev { adj[cur][1] } else { adj[cur][0] };
            chain.push(g.edge_index(cur, next).expect("adjacent"));
            (prev, cur) = (cur, next);
        }
        let rest: Vec<usize> = all.iter().copied().filter(|e| !chain.contains(e)).collect();
        let kept: f64 = rest.iter().map(|&e| g.edge_length(e)).sum();
        if !rest.is_empty() && kept >= floor * reference && !out.contains(&rest) {
            out.push(rest);
        }
    }
    out
}

fn ratio_range(v: f64, r: f64) -> Interval {
    let (a, b) = (v / r, v * r);
    let pad = 0.02 * (r - 1.0);
    Interval::Linear {
        lo: a.min(b) - pad,
        hi: a.max(b) + pad,
    }
}

fn perturbed(m: Measure, v: f64, p: Perturbation) -> Interval {
    match m.scale() {
        Scale::Quarter => Interval::Quarters {
            mask: 1 << (v.round().clamp(0.0, 4.0) as u8),
        },
        Scale::Circular => Interval::Circular {
            start: crate::geometry::wrap_360(v - p.angle),
            width: 2.0 * p.angle,
        },
        Scale::Linear if m == Measure::OverallChange => Interval::Linear {
            lo: v - p.angle,
            hi: v + p.angle,
        },
        Scale::Linear => ratio_range(v, p.ratio),
    }
}

/// Class accepting instances near `source`: the "large perturbation"
/// neighbourhood used to collect training instances of a feature.
pub fn perturbation_class(label: u8, graph: &DecompositionGraph, source: &MeasuredInstance, p: Perturbation) -> FeatureClass {
    let unary = graph
        .vertices
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            Measure::unary_names(k)
                .iter()
                .zip(&source.unary[j])
                .map(|(&m, &v)| perturbed(m, v, p))
                .collect()
        })
        .collect();
    let relations = graph
        .edges
        .iter()
        .map(|&(j, k)| {
            Measure::relation_names(graph.vertices[j], graph.vertices[k])
                .iter()
                .zip(&source.relations[j][k])
                .map(|(&m, &v)| perturbed(m, v, p))
                .collect()
        })
        .collect();
    FeatureClass {
        id: "proposal".into(),
        label,
        graph: graph.clone(),
        source: source.clone(),
        ranges: RangeVector { unary, relations },
        coverage: Interval::Linear {
            lo: source.coverage / p.ratio,
            hi: f64::INFINITY,
        },
        hit_rate: 0.0,
        false_alarm_rate: 0.0,
        provenance: Provenance::default(),
    }
}

/// Measured best (highest-coverage) instance of `cls` in a prepared graph.
fn best_measured(pg: &PreparedGraph<f64>, cls: &FeatureClass, node_limit: usize) -> Option<MeasuredInstance> {
    let (best, _) = best_instance(pg, cls, node_limit);
    let (assignment, _) = best?;
    let prims: Vec<_> = assignment.iter().map(|&c| &pg.index.candidates[c].primitive).collect();
    Some(MeasuredInstance::measure(&pg.graph, &prims, pg.length))
}

/// The longest component of a prepared image.
fn main_of(img: &PreparedImage) -> Option<&PreparedGraph<f64>> {
    img.components
        .iter()
        .fold(None, |best: Option<&PreparedGraph<f64>>, c| match best {
            Some(b) if b.length >= c.length => Some(b),
            _ => Some(c),
        })
}

struct Source<'a> {
    dataset_index: usize,
    graph: &'a PreparedGraph<f64>,
    decomposition: Decomposition<f64>,
}

/// Candidate classes of one decomposition: every perturbation level times
/// every slack value.
fn candidates_for(src: &Source, label: u8, examples: &[&PreparedGraph<f64>], cfg: &TrainConfig) -> Vec<FeatureClass> {
    let d = &src.decomposition;
    let kinds = d.primitives.iter().map(|p| p.kind).collect();
    let graph = DecompositionGraph::complete(kinds);
    let prims: Vec<_> = d.primitives.iter().collect();
    let source = MeasuredInstance::measure(&src.graph.graph, &prims, src.graph.length);
    let walks: Vec<Vec<usize>> = d.primitives.iter().map(|p| p.walk.vertices.clone()).collect();
    let mut out = Vec::new();
    for (pi, &p) in cfg.perturbations.iter().enumerate() {
        let proposal = perturbation_class(label, &graph, &source, p);
        let gathered: Vec<MeasuredInstance> = examples
            .iter()
            .filter_map(|pg| best_measured(pg, &proposal, cfg.node_limit))
            .collect();
        for (si, &slack) in cfg.slack_grid.iter().enumerate() {
            let opts = LearnOptions {
                slack,
                wide_circular: WideCircular::Unconstrained,
                ..LearnOptions::default()
            };
            let provenance = Provenance {
                dataset_index: src.dataset_index,
                walks: walks.clone(),
                ..Provenance::default()
            };
            let id = format!("d{label}-s{}-{}-p{pi}-x{si}", src.dataset_index, kinds_tag(&graph));
            let examples = if gathered.is_empty() { std::slice::from_ref(&source) } else { &gathered[..] };
            if let Ok(cls) = learn_class(id, label, graph.clone(), source.clone(), examples, &opts, provenance) {
                out.push(cls);
            }
        }
    }
    out
}

fn kinds_tag(g: &DecompositionGraph) -> String {
    g.vertices.iter().map(|k| k.symbol()).collect()
}

/// Prepared main components of one digit's training images, with their
/// positions in the training set.
pub struct DigitExamples {
    pub digit: u8,
    pub images: Vec<PreparedImage>,
    /// Training-set index per prepared image.
    pub dataset_index: Vec<usize>,
}

impl DigitExamples {
    pub fn new(digit: u8, images: &[(usize, &GrayImage)], cfg: &TrainConfig) -> Self {
        let owned: Vec<GrayImage> = images.iter().map(|&(_, g)| g.clone()).collect();
        let prepared = prepare_set(&owned, &cfg.front, &cfg.primitives);
        let dataset_index = prepared.iter().map(|p| images[p.index].0).collect();
        DigitExamples {
            digit,
            images: prepared,
            dataset_index,
        }
    }

    fn mains(&self) -> Vec<(usize, &PreparedGraph<f64>)> {
        self.images
            .iter()
            .zip(&self.dataset_index)
            .filter_map(|(p, &i)| main_of(p).map(|m| (i, m)))
            .collect()
    }
}

/// Every candidate class of one digit before selection.
pub fn candidate_classes(ex: &DigitExamples, cfg: &TrainConfig) -> (Vec<FeatureClass>, DigitTraining) {
    let digit = ex.digit;
    let mains = ex.mains();
    let examples: Vec<&PreparedGraph<f64>> = mains.iter().map(|&(_, m)| m).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (u64::from(digit) + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut picks: Vec<usize> = sample(&mut rng, mains.len(), cfg.features_per_digit.min(mains.len())).into_vec();
    picks.sort_unstable();

    let dcfg = DecomposeConfig {
        primitives: cfg.primitives,
        max_decompositions: cfg.decompositions_per_feature,
        ..DecomposeConfig::default()
    };
    let mut sources = Vec::new();
    let mut features = 0;
    for &i in &picks {
        let (dataset_index, pg) = mains[i];
        for feature in propose_features(&pg.graph, cfg.coverage_floor, pg.length) {
            features += 1;
            for decomposition in decompose(&pg.graph, &feature, &dcfg).decompositions {
                sources.push(Source {
                    dataset_index,
                    graph: pg,
                    decomposition,
                });
            }
        }
    }
    let candidates: Vec<FeatureClass> = sources
        .par_iter()
        .flat_map_iter(|s| candidates_for(s, digit, &examples, cfg))
        .collect();
    let stats = DigitTraining {
        digit,
        features,
        decompositions: sources.len(),
        candidates: candidates.len(),
        survivors: 0,
    };
    (candidates, stats)
}

/// Splits a labeled training set by digit, keeping the first
/// `examples_per_digit` images of each with their training-set index.
pub fn by_digit<'a>(train_set: &'a [GrayImage], cfg: &TrainConfig) -> Result<Vec<Vec<(usize, &'a GrayImage)>>, PipelineError> {
    let mut per_digit: Vec<Vec<(usize, &GrayImage)>> = vec![Vec::new(); 10];
    for (i, img) in train_set.iter().enumerate() {
        let label = img.label.ok_or(PipelineError::Unlabeled)?;
        let slot = per_digit.get_mut(usize::from(label)).ok_or(PipelineError::BadLabel(label))?;
        if slot.len() < cfg.examples_per_digit {
            slot.push((i, img));
        }
    }
    if per_digit.iter().any(Vec::is_empty) {
        return Err(PipelineError::EmptySet);
    }
    Ok(per_digit)
}

/// Trains a model: per digit, draws source examples, proposes features,
/// decomposes them, learns candidate classes from the digit's training
/// examples and keeps the informative ones on the validation set.
pub fn train(train_set: &[GrayImage], validation_set: &[GrayImage], cfg: &TrainConfig) -> Result<(Model, TrainReport), PipelineError> {
    cfg.validate()?;
    let started = Instant::now();
    let per_digit = by_digit(train_set, cfg)?;
    if validation_set.is_empty() {
        return Err(PipelineError::EmptySet);
    }
    let validation = prepare_set(validation_set, &cfg.front, &cfg.primitives);
    let mut classes = Vec::new();
    let mut report = TrainReport::default();
    for (digit, images) in per_digit.iter().enumerate() {
        let ex = DigitExamples::new(digit as u8, images, cfg);
        let (candidates, mut stats) = candidate_classes(&ex, cfg);
        let survivors = select_informative(candidates, &validation, cfg.fa_ceiling, cfg.node_limit);
        stats.survivors = survivors.len();
        report.digits.push(stats);
        if survivors.is_empty() {
            return Err(PipelineError::NoClasses { digit: digit as u8 });
        }
        classes.extend(survivors);
    }
    report.seconds = started.elapsed().as_secs_f64();
    Ok((
        Model {
            config: cfg.model_config(),
            classes,
        },
        report,
    ))
}
