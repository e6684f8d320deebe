//! Evaluation harnesses: single digits at random location and scale, and
//! multi-digit scenes compared against the same digits shown alone.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::FrontEnd;
use super::train::settings_of;
use super::PipelineError;
use crate::features::Model;
use crate::raster::{compose_scene, random_layout, resize_nearest, BinaryImage, GrayImage, ScenePlacement};
use crate::recognizer::{classify_scene, classify_single, Detection, Recognizer, SceneResult, SearchBudget};

/// Per-item random stream, independent of evaluation order.
pub(crate) fn item_rng(seed: u64, item: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(item as u64 + 1);
    rng
}

/// Front end and recognizer settings stored in a model.
pub fn recognizer_of(model: &Model, node_limit: usize) -> (FrontEnd, Recognizer<'_>) {
    let (front, primitives) = settings_of(&model.config);
    let rec = Recognizer {
        classes: &model.classes,
        skeleton: front.skeleton,
        budget: SearchBudget { primitives, node_limit },
    };
    (front, rec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SingleSceneConfig {
    pub canvas: usize,
    /// Inclusive range of the rescaled digit side.
    pub size_range: (usize, usize),
    /// Use the binarized digit as is instead of a random placement.
    pub centered: bool,
    pub seed: u64,
    pub node_limit: usize,
}

impl Default for SingleSceneConfig {
    fn default() -> Self {
        SingleSceneConfig {
            canvas: 1000,
            size_range: (84, 560),
            centered: false,
            seed: 0,
            node_limit: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct MultiSceneConfig {
    pub digits_per_scene: usize,
    pub canvas: usize,
    pub size_range: (usize, usize),
    pub seed: u64,
    pub node_limit: usize,
}

impl Default for MultiSceneConfig {
    fn default() -> Self {
        MultiSceneConfig {
            digits_per_scene: 3,
            canvas: 2000,
            size_range: (84, 560),
            seed: 0,
            node_limit: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct DigitAccuracy {
    pub digit: u8,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

/// Test-set detection rates of one class: among same-label images, and
/// among other-label images.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ClassRates {
    pub id: String,
    pub label: u8,
    pub hit_rate: f64,
    pub false_alarm_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct EvalReport {
    pub per_digit: Vec<DigitAccuracy>,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
    pub classes: Vec<ClassRates>,
    /// `confusion[true][predicted]`; column 10 counts unlabeled outcomes.
    pub confusion: Vec<Vec<usize>>,
    /// Class searches that hit a budget.
    pub exhausted: usize,
    /// Prediction per test image, in input order.
    pub predictions: Vec<Option<u8>>,
    pub seconds: f64,
}

fn rate(k: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        k as f64 / n as f64
    }
}

/// Builds a report from `(true label, prediction, fired classes, exhausted)`.
fn report(model: &Model, outcomes: &[(u8, Option<u8>, Vec<bool>, usize)], seconds: f64) -> EvalReport {
    let mut confusion = vec![vec![0; 11]; 10];
    for &(t, p, _, _) in outcomes {
        confusion[usize::from(t)][p.map_or(10, usize::from)] += 1;
    }
    let per_digit: Vec<DigitAccuracy> = (0..10u8)
        .map(|d| {
            let row = &confusion[usize::from(d)];
            let total: usize = row.iter().sum();
            let correct = row[usize::from(d)];
            DigitAccuracy {
                digit: d,
                correct,
                total,
                accuracy: rate(correct, total),
            }
        })
        .collect();
    let correct = per_digit.iter().map(|d| d.correct).sum();
    let total = outcomes.len();
    let classes = model
        .classes
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let (mut hit, mut same, mut alarm, mut other) = (0, 0, 0, 0);
            for (t, _, fired, _) in outcomes {
                let f = fired.get(k).copied().unwrap_or(false);
                if *t == c.label {
                    same += 1;
                    hit += usize::from(f);
                } else {
                    other += 1;
                    alarm += usize::from(f);
                }
            }
            ClassRates {
                id: c.id.clone(),
                label: c.label,
                hit_rate: rate(hit, same),
                false_alarm_rate: rate(alarm, other),
            }
        })
        .collect();
    EvalReport {
        per_digit,
        correct,
        total,
        accuracy: rate(correct, total),
        classes,
        confusion,
        exhausted: outcomes.iter().map(|o| o.3).sum(),
        predictions: outcomes.iter().map(|o| o.1).collect(),
        seconds,
    }
}

fn labels_of(test: &[GrayImage]) -> Result<Vec<u8>, PipelineError> {
    test.iter()
        .map(|g| match g.label {
            Some(l) if l < 10 => Ok(l),
            Some(l) => Err(PipelineError::BadLabel(l)),
            None => Err(PipelineError::Unlabeled),
        })
        .collect()
}

/// Places `mask` rescaled to `size` at a random position of a square canvas.
pub fn random_placement<R: Rng + ?Sized>(rng: &mut R, mask: &BinaryImage, size: usize, canvas: usize) -> Result<BinaryImage, PipelineError> {
    let layout = random_layout(rng, &[(0, size)], (canvas, canvas), true)?;
    Ok(compose_scene(&layout, std::slice::from_ref(mask), (canvas, canvas), true)?)
}

/// The test image as the single-digit harness shows it.
pub fn single_scene(front: &FrontEnd, img: &GrayImage, index: usize, cfg: &SingleSceneConfig) -> Result<BinaryImage, PipelineError> {
    let mask = front.binary(img);
    if cfg.centered {
        return Ok(mask);
    }
    let mut rng = item_rng(cfg.seed, index);
    let size = rng.gen_range(cfg.size_range.0..=cfg.size_range.1);
    random_placement(&mut rng, &mask, size, cfg.canvas)
}

/// Classifies every test digit on its own, rescaled and placed at random
/// (or centered, unscaled, with `cfg.centered`).
pub fn evaluate_single(model: &Model, test: &[GrayImage], cfg: &SingleSceneConfig) -> Result<EvalReport, PipelineError> {
    let started = Instant::now();
    let labels = labels_of(test)?;
    let (front, rec) = recognizer_of(model, cfg.node_limit);
    let outcomes = test
        .par_iter()
        .enumerate()
        .map(|(i, img)| {
            let scene = single_scene(&front, img, i, cfg)?;
            let (label, r) = classify_single(&rec, &scene);
            Ok((labels[i], label, r.fired, r.exhausted))
        })
        .collect::<Result<Vec<_>, PipelineError>>()?;
    Ok(report(model, &outcomes, started.elapsed().as_secs_f64()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct MultiReport {
    /// Per-digit outcomes inside the composed scenes. Class rates here
    /// count winning detections only, and budget hits are charged to the
    /// first digit of each scene.
    pub scenes: EvalReport,
    /// The same digit instances, each shown alone at the same size.
    pub alone: EvalReport,
    pub scene_count: usize,
}

/// The detection deciding a placed object: the highest-coverage detection
/// whose box centre lies in the object's square.
pub fn detection_in<'a>(detections: &'a [Detection], p: &ScenePlacement) -> Option<&'a Detection> {
    let (x0, y0, s) = (p.origin.0 as f64, p.origin.1 as f64, p.target_size as f64);
    detections
        .iter()
        .filter(|d| {
            let (cx, cy) = (0.5 * (d.bbox[0] + d.bbox[2]), 0.5 * (d.bbox[1] + d.bbox[3]));
            cx >= x0 && cx < x0 + s && cy >= y0 && cy < y0 + s
        })
        .fold(None, |best: Option<&Detection>, d| match best {
            Some(b) if b.coverage >= d.coverage => Some(b),
            _ => Some(d),
        })
}

/// Composes the test digits into non-overlapping scenes of
/// `digits_per_scene` and scores each digit by the detections inside its
/// square; every digit is also classified alone at the same size. A digit's
/// size depends only on the seed and its index, so runs with different
/// scene sizes see the same instances.
pub fn evaluate_multi(model: &Model, test: &[GrayImage], cfg: &MultiSceneConfig) -> Result<MultiReport, PipelineError> {
    if cfg.digits_per_scene == 0 {
        return Err(PipelineError::Config("digits per scene must be at least 1".into()));
    }
    let started = Instant::now();
    let labels = labels_of(test)?;
    let (front, rec) = recognizer_of(model, cfg.node_limit);
    let masks: Vec<BinaryImage> = test.par_iter().map(|g| front.binary(g)).collect();
    let sizes: Vec<usize> = (0..test.len())
        .map(|i| item_rng(cfg.seed, i).gen_range(cfg.size_range.0..=cfg.size_range.1))
        .collect();

    let alone: Vec<(u8, Option<u8>, Vec<bool>, usize)> = (0..test.len())
        .into_par_iter()
        .map(|i| {
            let scaled = resize_nearest(&masks[i], sizes[i]);
            let (label, r) = classify_single(&rec, &scaled);
            (labels[i], label, r.fired, r.exhausted)
        })
        .collect();
    let alone_secs = started.elapsed().as_secs_f64();

    let mut order: Vec<usize> = (0..test.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
    let scenes: Vec<&[usize]> = order.chunks(cfg.digits_per_scene).collect();
    let started = Instant::now();
    let per_scene = scenes
        .par_iter()
        .enumerate()
        .map(|(s, members)| {
            let requests: Vec<(usize, usize)> = members.iter().map(|&i| (i, sizes[i])).collect();
            let mut rng = item_rng(cfg.seed ^ 0x5ce4e, s);
            let layout = random_layout(&mut rng, &requests, (cfg.canvas, cfg.canvas), true)?;
            let scene = compose_scene(&layout, &masks, (cfg.canvas, cfg.canvas), true)?;
            let r: SceneResult = classify_scene(&rec, &scene);
            Ok(layout
                .iter()
                .enumerate()
                .map(|(k, p)| {
                    let det = detection_in(&r.detections, p);
                    let mut fired = vec![false; model.classes.len()];
                    for d in r.detections.iter().filter(|d| detection_in(std::slice::from_ref(*d), p).is_some()) {
                        fired[d.class_index] = true;
                    }
                    (p.source_index, (labels[p.source_index], det.map(|d| d.label), fired, if k == 0 { r.exhausted } else { 0 }))
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>, PipelineError>>()?;
    let mut in_scene: Vec<Option<(u8, Option<u8>, Vec<bool>, usize)>> = vec![None; test.len()];
    for (i, o) in per_scene.into_iter().flatten() {
        in_scene[i] = Some(o);
    }
    let in_scene: Vec<_> = in_scene.into_iter().map(|o| o.expect("every digit placed")).collect();
    Ok(MultiReport {
        scenes: report(model, &in_scene, started.elapsed().as_secs_f64()),
        alone: report(model, &alone, alone_secs),
        scene_count: scenes.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct DistractorConfig {
    pub canvas: usize,
    pub size_range: (usize, usize),
    /// Letter stroke width as a fraction of the letter's square side.
    pub stroke_fraction: f64,
    /// Share of the square the letter spans.
    pub box_fraction: f64,
    pub seed: u64,
    pub node_limit: usize,
}

impl Default for DistractorConfig {
    fn default() -> Self {
        DistractorConfig {
            canvas: 2000,
            size_range: (84, 560),
            stroke_fraction: 24.0 / 280.0,
            box_fraction: 0.72,
            seed: 0,
            node_limit: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct DistractorReport {
    pub scenes: usize,
    /// Digits whose deciding detection carries the right label.
    pub digits_correct: usize,
    /// Scenes with at least one detection centred on the letter.
    pub distractor_detections: usize,
    pub exhausted: usize,
    pub seconds: f64,
}

impl DistractorReport {
    pub fn digit_rate(&self) -> f64 {
        rate(self.digits_correct, self.scenes)
    }
}

/// Letter `c` drawn in a `side` x `side` square.
pub fn distractor_mask(side: usize, c: char, cfg: &DistractorConfig) -> Option<BinaryImage> {
    crate::pipeline::glyphs::render_glyph(c, side, cfg.box_fraction, cfg.stroke_fraction * side as f64)
}

/// One scene per test digit: the digit and a letter from
/// [`GLYPHS`](crate::pipeline::glyphs::GLYPHS), both rescaled and placed
/// without overlap.
pub fn distractor_scene(front: &FrontEnd, img: &GrayImage, index: usize, cfg: &DistractorConfig) -> Result<(BinaryImage, Vec<ScenePlacement>), PipelineError> {
    use crate::pipeline::glyphs::GLYPHS;
    let glyph = GLYPHS[index % GLYPHS.len()];
    let digit = front.binary(img);
    let letter = distractor_mask(digit.width().max(digit.height()), glyph, cfg).expect("known glyph");
    let sources = [digit, letter];
    let mut rng = item_rng(cfg.seed ^ 0xd157, index);
    let requests: Vec<(usize, usize)> = (0..2)
        .map(|k| (k, rng.gen_range(cfg.size_range.0..=cfg.size_range.1)))
        .collect();
    let layout = random_layout(&mut rng, &requests, (cfg.canvas, cfg.canvas), true)?;
    let scene = compose_scene(&layout, &sources, (cfg.canvas, cfg.canvas), true)?;
    Ok((scene, layout))
}

/// Classifies digit-plus-letter scenes.
pub fn evaluate_distractors(model: &Model, test: &[GrayImage], cfg: &DistractorConfig) -> Result<DistractorReport, PipelineError> {
    let started = Instant::now();
    let labels = labels_of(test)?;
    let (front, rec) = recognizer_of(model, cfg.node_limit);
    let outcomes = test
        .par_iter()
        .enumerate()
        .map(|(i, img)| {
            let (scene, layout) = distractor_scene(&front, img, i, cfg)?;
            let r = classify_scene(&rec, &scene);
            let digit = layout.iter().find(|p| p.source_index == 0).expect("digit placed");
            let letter = layout.iter().find(|p| p.source_index == 1).expect("letter placed");
            let correct = detection_in(&r.detections, digit).is_some_and(|d| d.label == labels[i]);
            let fooled = detection_in(&r.detections, letter).is_some();
            Ok((correct, fooled, r.exhausted))
        })
        .collect::<Result<Vec<_>, PipelineError>>()?;
    Ok(DistractorReport {
        scenes: outcomes.len(),
        digits_correct: outcomes.iter().filter(|o| o.0).count(),
        distractor_detections: outcomes.iter().filter(|o| o.1).count(),
        exhausted: outcomes.iter().map(|o| o.2).sum(),
        seconds: started.elapsed().as_secs_f64(),
    })
}
