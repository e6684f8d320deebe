//! Graph-based recognition of handwritten digits.
//!
//! Binary images are thinned to skeletons, converted to minimal graph
//! representations, decomposed into arc, line and loop primitives, and
//! recognized by searching for learned feature classes: typed primitive
//! graphs whose angle and ratio measurements fall inside learned ranges.
//! Every stored measurement is an angle or a dimensionless ratio, so
//! recognition is unaffected by where a digit sits or how large it is.

pub mod features;
pub mod geometry;
pub mod measurements;
pub mod pipeline;
pub mod primitives;
pub mod raster;
pub mod recognizer;
pub mod scalar;
pub mod skeleton_graph;
pub mod synth;
pub mod thinning;

pub use scalar::Real;

/// `f64` instantiations of the generic geometry types.
pub type Point = geometry::Point<f64>;
pub type Graph = skeleton_graph::SimplifiedGraph<f64>;
pub type Primitive = primitives::Primitive<f64>;
pub type Candidate = primitives::Candidate<f64>;
pub type PrimitiveIndex = primitives::PrimitiveIndex<f64>;
pub type Decomposition = primitives::Decomposition<f64>;
pub type DecomposeResult = primitives::DecomposeResult<f64>;
pub type ArcMeasurements = measurements::ArcMeasurements<f64>;
pub type LineMeasurements = measurements::LineMeasurements<f64>;
pub type RelationMeasurements = measurements::RelationMeasurements<f64>;
pub type PreparedGraph = recognizer::PreparedGraph<f64>;
