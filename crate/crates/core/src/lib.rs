//! Floor-plan layouts: structured plans, raster rendering and cleanup,
//! room-instance tokenization, and the metrics used to score layout
//! understanding, generation and editing.
//!
//! Numeric kernels are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the common choices.

pub mod api;
pub mod geometry;
pub mod graph;
pub mod harness;
pub mod json;
pub mod mask;
pub mod metrics;
pub mod model;
pub mod postproc;
pub mod raster;
pub mod scalar;
pub mod synth;
pub mod tokenizer;

pub use json::{emit_canonical_json, parse_canonical_json};
pub use mask::Mask;
pub use model::{ColorClass, Edge, FloorPlan, Position, Room, RoomCategory};
pub use raster::{ColorLegend, LabelMap, LayoutRaster};
pub use scalar::Scalar;

/// Single-precision codebook, the on-disk default.
pub type Codebook32 = tokenizer::Codebook<f32>;
pub type Codebook64 = tokenizer::Codebook<f64>;
pub type FeatureGrid32 = tokenizer::FeatureGrid<f32>;
pub type FeatureGrid64 = tokenizer::FeatureGrid<f64>;
pub type Tokenizer32 = tokenizer::Tokenizer<f32>;
pub type Tokenizer64 = tokenizer::Tokenizer<f64>;
/// Feature statistics for the Fréchet distance, always in double precision.
pub type FeatureSet64 = metrics::FeatureSet<f64>;
