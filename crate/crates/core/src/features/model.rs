//! Model file: configuration plus learned classes, as JSON.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{DecompositionGraph, FeatureClass, Interval, MeasuredInstance, Provenance, RangeVector};
use crate::measurements::Measure;

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("model json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported model version {0}")]
    Version(u32),
    #[error("class {id}: {reason}")]
    Invalid { id: String, reason: String },
}

/// Settings a model was trained with; recognition reuses them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ModelConfig {
    pub line_threshold: f64,
    pub binarize_threshold: f64,
    pub upscale_factor: usize,
    pub hole_factor: f64,
    pub spur_factor: f64,
    pub edge_budget: usize,
    pub slack_grid: Vec<f64>,
    pub fa_ceiling: f64,
    pub examples_per_digit: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub classes: Vec<FeatureClass>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
struct ModelJson {
    version: u32,
    config: ModelConfig,
    classes: Vec<ClassJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
struct ClassJson {
    id: String,
    label: u8,
    graph: DecompositionGraph,
    unary_ranges: Vec<BTreeMap<Measure, Interval>>,
    relation_ranges: Vec<BTreeMap<Measure, Interval>>,
    coverage: Interval,
    source: MeasuredInstance,
    hit_rate: f64,
    false_alarm_rate: f64,
    provenance: Provenance,
}

fn named(names: &[Measure], ranges: &[Interval]) -> BTreeMap<Measure, Interval> {
    names.iter().copied().zip(ranges.iter().copied()).collect()
}

fn unnamed(id: &str, names: &[Measure], map: &BTreeMap<Measure, Interval>) -> Result<Vec<Interval>, ModelError> {
    if map.len() != names.len() {
        return Err(ModelError::Invalid {
            id: id.to_string(),
            reason: format!("expected ranges {names:?}"),
        });
    }
    names
        .iter()
        .map(|m| {
            map.get(m).copied().ok_or_else(|| ModelError::Invalid {
                id: id.to_string(),
                reason: format!("missing range {m:?}"),
            })
        })
        .collect()
}

impl From<&FeatureClass> for ClassJson {
    fn from(c: &FeatureClass) -> Self {
        ClassJson {
            id: c.id.clone(),
            label: c.label,
            graph: c.graph.clone(),
            unary_ranges: (0..c.graph.vertices.len())
                .map(|j| named(c.unary_names(j), &c.ranges.unary[j]))
                .collect(),
            relation_ranges: (0..c.graph.edges.len())
                .map(|e| named(&c.relation_names(e), &c.ranges.relations[e]))
                .collect(),
            coverage: c.coverage,
            source: c.source.clone(),
            hit_rate: c.hit_rate,
            false_alarm_rate: c.false_alarm_rate,
            provenance: c.provenance.clone(),
        }
    }
}

impl TryFrom<ClassJson> for FeatureClass {
    type Error = ModelError;

    fn try_from(j: ClassJson) -> Result<Self, ModelError> {
        let g = &j.graph;
        let invalid = |reason: &str| ModelError::Invalid {
            id: j.id.clone(),
            reason: reason.to_string(),
        };
        if j.unary_ranges.len() != g.vertices.len() || j.relation_ranges.len() != g.edges.len() {
            return Err(invalid("range count does not match the graph"));
        }
        if g.edges.iter().any(|&(a, b)| a >= b || b >= g.vertices.len()) {
            return Err(invalid("bad relation edge"));
        }
        let unary = g
            .vertices
            .iter()
            .zip(&j.unary_ranges)
            .map(|(&k, m)| unnamed(&j.id, Measure::unary_names(k), m))
            .collect::<Result<_, _>>()?;
        let relations = g
            .edges
            .iter()
            .zip(&j.relation_ranges)
            .map(|(&(a, b), m)| unnamed(&j.id, &Measure::relation_names(g.vertices[a], g.vertices[b]), m))
            .collect::<Result<_, _>>()?;
        Ok(FeatureClass {
            id: j.id,
            label: j.label,
            graph: j.graph,
            source: j.source,
            ranges: RangeVector { unary, relations },
            coverage: j.coverage,
            hit_rate: j.hit_rate,
            false_alarm_rate: j.false_alarm_rate,
            provenance: j.provenance,
        })
    }
}

impl Model {
    pub fn to_json(&self) -> String {
        let doc = ModelJson {
            version: MODEL_VERSION,
            config: self.config.clone(),
            classes: self.classes.iter().map(ClassJson::from).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Model, ModelError> {
        let doc: ModelJson = serde_json::from_str(s)?;
        if doc.version != MODEL_VERSION {
            return Err(ModelError::Version(doc.version));
        }
        Ok(Model {
            config: doc.config,
            classes: doc.classes.into_iter().map(FeatureClass::try_from).collect::<Result<_, _>>()?,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Model, ModelError> {
        Model::from_json(&std::fs::read_to_string(path)?)
    }
}
