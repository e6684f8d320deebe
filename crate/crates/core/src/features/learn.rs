use thiserror::Error;

use super::{DecompositionGraph, FeatureClass, Interval, IntervalError, MeasuredInstance, Provenance, RangeVector};
use crate::measurements::{Measure, Scale};

/// What to do with a circular measurement whose samples spread over half
/// the circle or more.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WideCircular {
    Error,
    /// Leave the measurement unconstrained.
    Unconstrained,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnOptions {
    /// Widening as a fraction of the observed span, on both sides.
    pub slack: f64,
    /// Smallest widening, in degrees, of an angle when `slack > 0`.
    pub min_angle_slack: f64,
    pub wide_circular: WideCircular,
}

impl Default for LearnOptions {
    fn default() -> Self {
        LearnOptions {
            slack: 0.0,
            min_angle_slack: 5.0,
            wide_circular: WideCircular::Error,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum LearnError {
    #[error("no examples")]
    NoExamples,
    #[error("example primitive types do not match the class graph")]
    ShapeMismatch,
    #[error("range of {measure:?}: {source}")]
    Range {
        measure: Measure,
        #[source]
        source: IntervalError,
    },
}

fn is_angle(m: Measure) -> bool {
    m.scale() == Scale::Circular || m == Measure::OverallChange
}

/// Widening on each side for a fitted interval: `slack * span`, at least
/// `min_angle_slack` degrees for angles and at least `slack * |center|`
/// for ratios. Zero when `slack` is zero.
pub fn slack_amount(m: Measure, fitted: &Interval, opts: &LearnOptions) -> f64 {
    if opts.slack <= 0.0 {
        return 0.0;
    }
    let (Some(span), Some(center)) = (fitted.span(), fitted.center()) else {
        return 0.0;
    };
    let base = opts.slack * span;
    if is_angle(m) {
        base.max(opts.min_angle_slack)
    } else {
        base.max(opts.slack * center.abs())
    }
}

fn learn_range(m: Measure, samples: &[f64], opts: &LearnOptions) -> Result<Interval, LearnError> {
    let fitted = match Interval::fit(m.scale(), samples) {
        Ok(i) => i,
        Err(IntervalError::SpreadTooWide(_)) if opts.wide_circular == WideCircular::Unconstrained => {
            return Ok(Interval::Any)
        }
        Err(source) => return Err(LearnError::Range { measure: m, source }),
    };
    let a = slack_amount(m, &fitted, opts);
    Ok(fitted.widened(a, a))
}

/// Learns ranges from examples aligned to the class vertex order (example
/// primitive `j` plays class vertex `j`). The source instance is always
/// one of the samples, so it is a member of the result.
pub fn learn_class(
    id: String,
    label: u8,
    graph: DecompositionGraph,
    source: MeasuredInstance,
    examples: &[MeasuredInstance],
    opts: &LearnOptions,
    provenance: Provenance,
) -> Result<FeatureClass, LearnError> {
    if examples.is_empty() {
        return Err(LearnError::NoExamples);
    }
    let all: Vec<&MeasuredInstance> = std::iter::once(&source).chain(examples).collect();
    if all.iter().any(|e| e.kinds != graph.vertices) {
        return Err(LearnError::ShapeMismatch);
    }
    let unary = graph
        .vertices
        .iter()
        .enumerate()
        .map(|(j, &kind)| {
            Measure::unary_names(kind)
                .iter()
                .enumerate()
                .map(|(i, &m)| {
                    let samples: Vec<f64> = all.iter().map(|e| e.unary[j][i]).collect();
                    learn_range(m, &samples, opts)
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let relations = graph
        .edges
        .iter()
        .map(|&(j, k)| {
            Measure::relation_names(graph.vertices[j], graph.vertices[k])
                .iter()
                .enumerate()
                .map(|(i, &m)| {
                    let samples: Vec<f64> = all.iter().map(|e| e.relations[j][k][i]).collect();
                    learn_range(m, &samples, opts)
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let coverages: Vec<f64> = all.iter().map(|e| e.coverage).collect();
    let coverage = learn_range(Measure::LengthRatio, &coverages, opts)?;
    Ok(FeatureClass {
        id,
        label,
        graph,
        source,
        ranges: RangeVector { unary, relations },
        coverage,
        hit_rate: 0.0,
        false_alarm_rate: 0.0,
        provenance: Provenance {
            slack: opts.slack,
            examples: examples.len(),
            ..provenance
        },
    })
}
