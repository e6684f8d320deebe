//! End-to-end orchestration: data slices, training, evaluation harnesses,
//! distractor glyphs and damaged inputs.

pub mod data;
mod eval;
pub mod glyphs;
pub mod noise;
mod recovery;
mod train;

use thiserror::Error;

use crate::raster::RasterError;

pub use eval::{
    detection_in, distractor_mask, distractor_scene, evaluate_distractors, evaluate_multi, evaluate_single, random_placement, recognizer_of, single_scene,
    ClassRates, DigitAccuracy, DistractorConfig, DistractorReport, EvalReport, MultiReport, MultiSceneConfig, SingleSceneConfig,
};
pub use recovery::{damaged, evaluate_damaged, evaluate_noise, ink_fraction, noise_image, noise_ink, RecoveryConfig, RecoveryReport, Trial};
pub use train::{
    by_digit, candidate_classes, perturbation_class, propose_features, settings_of, train, DigitExamples, DigitTraining, Perturbation, TrainConfig,
    TrainReport,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("image without a label")]
    Unlabeled,
    #[error("label {0} is not a digit")]
    BadLabel(u8),
    #[error("training or validation set is missing a digit")]
    EmptySet,
    #[error("no informative class survived for digit {digit}")]
    NoClasses { digit: u8 },
}
