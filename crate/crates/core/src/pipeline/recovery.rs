//! Recovery of damaged digits through the recurrent filter, and the matching
//! false-detection check on pure noise.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eval::{item_rng, recognizer_of};
use super::noise::{damage_near_skeleton, uniform_noise};
use super::PipelineError;
use crate::features::Model;
use crate::raster::GrayImage;
use crate::recognizer::recognize_noisy;
use crate::thinning::FilterConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RecoveryConfig {
    /// Share of ink pixels near the skeleton that are erased.
    pub damage: f64,
    /// Ink probability of a pure-noise pixel; `None` matches the mean ink
    /// fraction of the digit images.
    pub noise_ink: Option<f64>,
    pub kernel: usize,
    pub filter_threshold: f64,
    pub iterations: usize,
    pub seed: u64,
    pub node_limit: usize,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        let f = FilterConfig::default();
        RecoveryConfig {
            damage: 0.3,
            noise_ink: None,
            kernel: f.kernel,
            filter_threshold: f.threshold,
            iterations: f.iterations,
            seed: 0,
            node_limit: 1_000_000,
        }
    }
}

impl RecoveryConfig {
    pub fn filter(&self) -> FilterConfig {
        FilterConfig {
            kernel: self.kernel,
            threshold: self.filter_threshold,
            iterations: self.iterations,
        }
    }

    fn validate(&self) -> Result<(), PipelineError> {
        if !(0.0..=1.0).contains(&self.damage) || self.noise_ink.is_some_and(|p| !(0.0..=1.0).contains(&p)) {
            return Err(PipelineError::Config("damage and noise ink must lie in [0, 1]".into()));
        }
        if self.kernel < 3 || self.kernel % 2 == 0 || !(self.filter_threshold > 0.0 && self.filter_threshold < 1.0) || self.iterations == 0 {
            return Err(PipelineError::Config("filter needs an odd kernel >= 3, a threshold in (0, 1) and at least one iteration".into()));
        }
        Ok(())
    }
}

/// Outcome of one recovery trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Trial {
    pub label: Option<u8>,
    pub detected: Option<u8>,
    pub iteration: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RecoveryReport {
    pub trials: Vec<Trial>,
    /// Trials whose first detection has the true label (damaged digits) or
    /// any detection at all (pure noise).
    pub successes: usize,
    pub exhausted: usize,
    pub seconds: f64,
}

impl RecoveryReport {
    pub fn rate(&self) -> f64 {
        if self.trials.is_empty() {
            0.0
        } else {
            self.successes as f64 / self.trials.len() as f64
        }
    }
}

/// The damaged copy of test digit `index`.
pub fn damaged(img: &GrayImage, index: usize, model: &Model, cfg: &RecoveryConfig) -> GrayImage {
    let mut rng = item_rng(cfg.seed ^ 0xda4a, index);
    damage_near_skeleton(&mut rng, img, cfg.damage, model.config.binarize_threshold as f32)
}

/// Mean share of pixels above `threshold`.
pub fn ink_fraction(images: &[GrayImage], threshold: f32) -> f64 {
    let (ink, all) = images.iter().fold((0usize, 0usize), |(k, n), g| {
        (k + g.values.iter().filter(|&&v| v > threshold).count(), n + g.values.len())
    });
    if all == 0 {
        0.0
    } else {
        ink as f64 / all as f64
    }
}

/// Noise image number `index` of the given size. `ink` is the probability
/// that a pixel carries a uniformly random intensity.
pub fn noise_image(size: (usize, usize), index: usize, ink: f64, cfg: &RecoveryConfig) -> GrayImage {
    let mut rng = item_rng(cfg.seed ^ 0x4015e, index);
    uniform_noise(&mut rng, size.0, size.1, ink)
}

fn run(model: &Model, images: &[GrayImage], cfg: &RecoveryConfig, success: impl Fn(&Trial) -> bool + Sync) -> RecoveryReport {
    let started = Instant::now();
    let (front, rec) = recognizer_of(model, cfg.node_limit);
    let filter = cfg.filter();
    let outcomes: Vec<(Trial, usize)> = images
        .par_iter()
        .map(|img| {
            let o = recognize_noisy(&rec, &front.binary(img), filter);
            let trial = Trial {
                label: img.label,
                detected: o.detection.map(|d| d.label),
                iteration: o.iteration,
            };
            (trial, o.exhausted)
        })
        .collect();
    let successes = outcomes.iter().filter(|(t, _)| success(t)).count();
    RecoveryReport {
        successes,
        exhausted: outcomes.iter().map(|o| o.1).sum(),
        trials: outcomes.into_iter().map(|o| o.0).collect(),
        seconds: started.elapsed().as_secs_f64(),
    }
}

/// Damages every test digit and counts correct recoveries.
pub fn evaluate_damaged(model: &Model, test: &[GrayImage], cfg: &RecoveryConfig) -> Result<RecoveryReport, PipelineError> {
    cfg.validate()?;
    if test.iter().any(|g| g.label.is_none()) {
        return Err(PipelineError::Unlabeled);
    }
    let images: Vec<GrayImage> = test.iter().enumerate().map(|(i, g)| damaged(g, i, model, cfg)).collect();
    Ok(run(model, &images, cfg, |t| t.detected.is_some() && t.detected == t.label))
}

/// Ink probability of noise pixels: the configured one, or the value
/// giving the digits' mean share of pixels above the binarize threshold.
pub fn noise_ink(model: &Model, digits: &[GrayImage], cfg: &RecoveryConfig) -> f64 {
    let t = model.config.binarize_threshold;
    cfg.noise_ink
        .unwrap_or_else(|| (ink_fraction(digits, t as f32) / (1.0 - t)).clamp(0.0, 1.0))
}

/// Counts noise images on which anything fires, one per digit image and of
/// the same size.
pub fn evaluate_noise(model: &Model, digits: &[GrayImage], cfg: &RecoveryConfig) -> Result<RecoveryReport, PipelineError> {
    cfg.validate()?;
    let ink = noise_ink(model, digits, cfg);
    let images: Vec<GrayImage> = digits
        .iter()
        .enumerate()
        .map(|(i, g)| noise_image((g.width, g.height), i, ink, cfg))
        .collect();
    Ok(run(model, &images, cfg, |t| t.detected.is_some()))
}
