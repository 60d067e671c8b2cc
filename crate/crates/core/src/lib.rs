//! Post-processing, decoding, key information extraction and evaluation for
//! OCR models, with the neural forward pass behind a pluggable backend.

pub mod backend;
pub mod detpost;
pub mod eval;
pub mod geometry;
pub mod kie;
pub mod pipeline;
pub mod recdecode;

pub use backend::{Backend, ModelSpec, RasterImage, Tensor};
pub use detpost::{DetParams, Detection};
pub use eval::{DetMetrics, GtInstance};
pub use geometry::{Point, Polygon};
pub use kie::{Entities, TextInstance};
pub use pipeline::{DocumentResult, Pipeline, PipelineConfig, PipelineError, Registry};
pub use recdecode::{Dictionary, Transcription};
