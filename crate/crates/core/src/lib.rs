//! Static checks for deep-learning training scripts.

pub mod engine;
pub mod frontend;
pub mod graph;
pub mod layer;
pub mod pipeline;
pub mod report;
pub mod rules;
pub mod shape;
pub mod tensor;

pub use pipeline::{analyze, Analysis, AnalysisOptions};
