//! Validation-based selection of highly informative classes.

use std::collections::HashMap;

use rayon::prelude::*;

use super::FeatureClass;
use crate::recognizer::PreparedImage;

/// Hit and false-alarm rates of `cls` on `validation`. With `fa_ceiling`,
/// other-label images are searched first and evaluation stops with `None`
/// as soon as the ceiling is certainly exceeded.
pub fn validation_rates(
    cls: &FeatureClass,
    validation: &[PreparedImage],
    node_limit: usize,
    fa_ceiling: Option<f64>,
) -> Option<(f64, f64)> {
    let (same, other): (Vec<&PreparedImage>, Vec<&PreparedImage>) =
        validation.iter().partition(|v| v.label == cls.label);
    let allowed = fa_ceiling.map_or(usize::MAX, |c| (c * other.len() as f64).floor() as usize);
    let mut alarms = 0;
    for v in &other {
        if v.fires(cls, node_limit) {
            alarms += 1;
            if alarms > allowed {
                return None;
            }
        }
    }
    let hits = same.iter().filter(|v| v.fires(cls, node_limit)).count();
    let rate = |k: usize, n: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    Some((rate(hits, same.len()), rate(alarms, other.len())))
}

/// Keeps the candidates with false-alarm rate at most `fa_ceiling` and a
/// nonzero hit rate, storing both rates in each survivor. Variants of one
/// source feature (same label, source example and primitive walks) compete:
/// only the highest hit rate survives, the earliest on ties. Input order is
/// preserved.
pub fn select_informative(
    candidates: Vec<FeatureClass>,
    validation: &[PreparedImage],
    fa_ceiling: f64,
    node_limit: usize,
) -> Vec<FeatureClass> {
    let rates: Vec<Option<(f64, f64)>> = candidates
        .par_iter()
        .map(|c| validation_rates(c, validation, node_limit, Some(fa_ceiling)))
        .collect();
    let mut best: HashMap<(u8, usize, Vec<Vec<usize>>), (usize, f64)> = HashMap::new();
    for (i, (c, r)) in candidates.iter().zip(&rates).enumerate() {
        let Some((hit, fa)) = *r else { continue };
        if hit <= 0.0 || fa > fa_ceiling {
            continue;
        }
        let key = (c.label, c.provenance.dataset_index, c.provenance.walks.clone());
        match best.get(&key) {
            Some(&(_, h)) if h >= hit => {}
            _ => {
                best.insert(key, (i, hit));
            }
        }
    }
    let mut keep: Vec<usize> = best.values().map(|&(i, _)| i).collect();
    keep.sort_unstable();
    keep.into_iter()
        .map(|i| {
            let (hit, fa) = rates[i].expect("survivor has rates");
            FeatureClass {
                hit_rate: hit,
                false_alarm_rate: fa,
                ..candidates[i].clone()
            }
        })
        .collect()
}
