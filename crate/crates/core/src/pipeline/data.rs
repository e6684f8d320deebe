//! Labeled image pools, per-digit slices, and the image-to-graph front end.

use std::ops::Range;
use std::path::Path;

use rayon::prelude::*;

use crate::raster::{binarize_upscale, load_idx, BinaryImage, GrayImage, RasterError};
use crate::recognizer::{PreparedGraph, PreparedImage};
use crate::primitives::PrimitiveConfig;
use crate::skeleton_graph::{skeletonize, split_components, SimplifiedGraph, SkeletonConfig};

/// Default image and label files of the bundled digit pool.
pub const DEFAULT_IMAGES: &str = "data/mnist-sample-images-idx3-ubyte.gz";
pub const DEFAULT_LABELS: &str = "data/mnist-sample-labels-idx1-ubyte.gz";

/// Loads a labeled IDX pool.
pub fn load_pool(images: &Path, labels: &Path) -> Result<Vec<GrayImage>, RasterError> {
    load_idx(images, Some(labels))
}

/// Images taken per digit at positions `range` among that digit's images
/// (pool order), digit by digit.
pub fn digit_slice(pool: &[GrayImage], range: Range<usize>) -> Vec<GrayImage> {
    let mut out = Vec::new();
    for d in 0..10u8 {
        out.extend(
            pool.iter()
                .filter(|g| g.label == Some(d))
                .skip(range.start)
                .take(range.end.saturating_sub(range.start))
                .cloned(),
        );
    }
    out
}

/// Disjoint per-digit slices of one pool.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Range<usize>,
    pub validation: Range<usize>,
    /// Test images start here; they run to the end of each digit's images.
    pub test_start: usize,
}

impl Default for Split {
    fn default() -> Self {
        Split {
            train: 0..100,
            validation: 100..200,
            test_start: 300,
        }
    }
}

impl Split {
    pub fn train(&self, pool: &[GrayImage]) -> Vec<GrayImage> {
        digit_slice(pool, self.train.clone())
    }

    pub fn validation(&self, pool: &[GrayImage]) -> Vec<GrayImage> {
        digit_slice(pool, self.validation.clone())
    }

    /// The first `per_digit` test images of every digit.
    pub fn test(&self, pool: &[GrayImage], per_digit: usize) -> Vec<GrayImage> {
        digit_slice(pool, self.test_start..self.test_start + per_digit)
    }
}

/// How gray images become binary masks and graphs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontEnd {
    pub upscale_factor: usize,
    pub binarize_threshold: f32,
    pub skeleton: SkeletonConfig,
}

impl Default for FrontEnd {
    fn default() -> Self {
        FrontEnd {
            upscale_factor: 10,
            binarize_threshold: 0.1,
            skeleton: SkeletonConfig::default(),
        }
    }
}

impl FrontEnd {
    pub fn binary(&self, img: &GrayImage) -> BinaryImage {
        binarize_upscale(img, self.upscale_factor, self.binarize_threshold)
    }

    pub fn graph(&self, mask: &BinaryImage) -> SimplifiedGraph<f64> {
        skeletonize(mask, &self.skeleton)
    }

    /// Components with at least one edge, prepared for search. The image
    /// holds one object, so the whole graph is the coverage reference.
    pub fn prepared(&self, mask: &BinaryImage, primitives: &PrimitiveConfig) -> Vec<PreparedGraph<f64>> {
        let g = self.graph(mask);
        let whole = g.total_length();
        split_components(&g)
            .into_iter()
            .filter(|c| !c.edges().is_empty())
            .map(|c| PreparedGraph::with_length(c, primitives, whole))
            .collect()
    }
}

/// The component with the largest total length, if any has an edge.
pub fn main_component(g: &SimplifiedGraph<f64>) -> Option<SimplifiedGraph<f64>> {
    split_components(g)
        .into_iter()
        .filter(|c| !c.edges().is_empty())
        .fold(None, |best: Option<SimplifiedGraph<f64>>, c| match best {
            Some(b) if b.total_length() >= c.total_length() => Some(b),
            _ => Some(c),
        })
}

/// Prepares every labeled image in parallel, keeping input order.
/// Unlabeled images are skipped.
pub fn prepare_set(images: &[GrayImage], front: &FrontEnd, primitives: &PrimitiveConfig) -> Vec<PreparedImage> {
    images
        .par_iter()
        .enumerate()
        .filter_map(|(index, img)| {
            Some(PreparedImage {
                label: img.label?,
                index,
                components: front.prepared(&front.binary(img), primitives),
            })
        })
        .collect()
}
