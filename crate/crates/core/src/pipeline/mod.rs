//! Config-driven assembly of detection, recognition and key information
//! extraction, with batch execution and result persistence.

mod bench;
mod config;
mod convert;
mod crop;
mod image_io;
mod overlay;
mod registry;
mod run;

pub use bench::{bench, synthetic_inputs, BenchReport, StageStats};
pub use config::{
    load_config, DetectorConfig, DictConfig, EvalConfig, IoConfig, KieConfig, OverlayConfig, OverlayFormat,
    PipelineConfig, RecognizerConfig, RuntimeConfig, StagesConfig, CONFIG_VERSION,
};
pub use convert::{convert_dataset, load_dataset, write_annotations, DatasetFormat};
pub use crop::crop_region;
pub use image_io::{decode_image, encode_png, load_image, save_image};
pub use overlay::{class_color, render_overlay, render_svg};
pub use registry::{DecodeOptions, DecoderAlgorithm, DetectorAlgorithm, KieConstructor, KieModel, Registry};
pub use run::{build_pipeline, collect_inputs, persist, result_line, write_results, DocumentResult, InputImage, Pipeline};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    /// `key` is the dotted path of the offending config entry, empty for
    /// document-level problems.
    #[error("{}", config_message(.key, .message))]
    Config { key: String, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Eval(#[from] crate::eval::EvalError),
}

fn config_message(key: &str, message: &str) -> String {
    if key.is_empty() {
        message.to_string()
    } else {
        format!("{key}: {message}")
    }
}
