use rayon::prelude::*;

use super::{best_instance, Detection, PreparedGraph, SearchBudget};
use crate::features::FeatureClass;
use crate::raster::BinaryImage;
use crate::scalar::Real;
use crate::skeleton_graph::{skeletonize, split_components, SimplifiedGraph, SkeletonConfig};
use crate::thinning::{recurrent_filter, FilterConfig};

/// Classes plus the settings used to turn images into graphs and search them.
#[derive(Debug, Clone, Copy)]
pub struct Recognizer<'a> {
    pub classes: &'a [FeatureClass],
    pub skeleton: SkeletonConfig,
    pub budget: SearchBudget,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SceneResult {
    /// At most one detection per component: the highest-coverage one.
    pub detections: Vec<Detection>,
    pub components: usize,
    /// Class searches that hit a limit.
    pub exhausted: usize,
    /// Per class: whether it has an instance in some component.
    pub fired: Vec<bool>,
}

/// What coverage is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverageScope {
    /// Each component is its own object (multi-object scenes).
    Component,
    /// The image holds one object: the whole graph is the reference.
    Image,
}

/// Best detection of every class in every component; per component the
/// highest coverage wins (ties: lower class index).
pub fn classify_graph<T: Real>(rec: &Recognizer, g: &SimplifiedGraph<T>, scope: CoverageScope) -> SceneResult {
    let whole = g.total_length();
    let comps = split_components(g);
    let mut out = SceneResult {
        components: comps.len(),
        fired: vec![false; rec.classes.len()],
        ..SceneResult::default()
    };
    for (ci, comp) in comps.into_iter().enumerate() {
        if comp.edges().is_empty() {
            continue;
        }
        let pg = match scope {
            CoverageScope::Component => PreparedGraph::new(comp, &rec.budget.primitives),
            CoverageScope::Image => PreparedGraph::with_length(comp, &rec.budget.primitives, whole),
        };
        let results: Vec<_> = rec
            .classes
            .par_iter()
            .map(|cls| best_instance(&pg, cls, rec.budget.node_limit))
            .collect();
        let mut winner: Option<(usize, Vec<usize>, f64)> = None;
        for (k, (best, stats)) in results.into_iter().enumerate() {
            out.exhausted += usize::from(stats.exhausted);
            if let Some((a, cov)) = best {
                out.fired[k] = true;
                if winner.as_ref().is_none_or(|w| cov > w.2) {
                    winner = Some((k, a, cov));
                }
            }
        }
        if let Some((k, a, cov)) = winner {
            out.detections.push(Detection::new(&pg, &rec.classes[k], k, ci, &a, cov));
        }
    }
    out
}

/// Skeletonizes a binary scene and classifies every component.
pub fn classify_scene(rec: &Recognizer, img: &BinaryImage) -> SceneResult {
    let g: SimplifiedGraph<f64> = skeletonize(img, &rec.skeleton);
    classify_graph(rec, &g, CoverageScope::Component)
}

/// Label of the highest-coverage detection in an image holding one object,
/// with coverage measured against the whole image graph.
pub fn classify_single(rec: &Recognizer, img: &BinaryImage) -> (Option<u8>, SceneResult) {
    let g: SimplifiedGraph<f64> = skeletonize(img, &rec.skeleton);
    let r = classify_graph(rec, &g, CoverageScope::Image);
    let label = best_of(&r.detections).map(|d| d.label);
    (label, r)
}

fn best_of(ds: &[Detection]) -> Option<&Detection> {
    ds.iter().fold(None, |best: Option<&Detection>, d| match best {
        Some(b) if b.coverage >= d.coverage => Some(b),
        _ => Some(d),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisyOutcome {
    pub detection: Option<Detection>,
    /// Filter iteration of the detection; 0 is the raw input.
    pub iteration: Option<usize>,
    pub exhausted: usize,
}

/// Searches the raw image, then each recurrent-filter iteration in turn,
/// and stops at the first that yields a detection. The image is taken to
/// hold one object.
pub fn recognize_noisy(rec: &Recognizer, img: &BinaryImage, filter: FilterConfig) -> NoisyOutcome {
    let mut exhausted = 0;
    let stages = std::iter::once(img.clone()).chain(recurrent_filter(img, filter));
    for (it, stage) in stages.enumerate() {
        let (_, r) = classify_single(rec, &stage);
        exhausted += r.exhausted;
        if let Some(d) = best_of(&r.detections) {
            return NoisyOutcome {
                detection: Some(d.clone()),
                iteration: Some(it),
                exhausted,
            };
        }
    }
    NoisyOutcome {
        detection: None,
        iteration: None,
        exhausted,
    }
}
