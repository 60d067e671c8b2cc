use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::backend::ModelRef;
use crate::detpost::DetParams;
use crate::recdecode::{NormalizePolicy, SpecialTokens};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    pub algorithm: String,
    #[serde(default)]
    pub params: DetParams,
    pub model: ModelRef,
}

/// A dictionary given either as a file or inline.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DictConfig {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub characters: Option<Vec<String>>,
    /// Defaults to blank at index 0 when absent.
    #[serde(default)]
    pub specials: Option<SpecialTokens>,
}

fn default_beam_width() -> usize {
    5
}

fn default_max_len() -> usize {
    25
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecognizerConfig {
    pub decoder: String,
    #[serde(default = "default_beam_width")]
    pub beam_width: usize,
    #[serde(default = "default_max_len")]
    pub max_len: usize,
    pub dict: DictConfig,
    pub model: ModelRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KieConfig {
    pub algorithm: String,
    pub weights: PathBuf,
    pub class_names: Vec<String>,
    #[serde(default)]
    pub background: Option<String>,
    /// Defaults to the recognizer dictionary.
    #[serde(default)]
    pub dict: Option<DictConfig>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StagesConfig {
    #[serde(default)]
    pub detector: Option<DetectorConfig>,
    #[serde(default)]
    pub recognizer: Option<RecognizerConfig>,
    #[serde(default)]
    pub kie: Option<KieConfig>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlayFormat {
    #[default]
    Svg,
    Png,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverlayConfig {
    pub dir: PathBuf,
    #[serde(default)]
    pub format: OverlayFormat,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoConfig {
    /// Glob of input images.
    #[serde(default)]
    pub input: Option<String>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub overlay: Option<OverlayConfig>,
}

fn default_workers() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuntimeConfig {
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for RuntimeConfig {
    fn default() -> Self {
        Self { workers: default_workers(), seed: 0 }
    }
}

fn default_iou() -> f64 {
    crate::eval::DEFAULT_IOU_THRESH
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    #[serde(default = "default_iou")]
    pub iou_thresh: f64,
    #[serde(default)]
    pub normalize: NormalizePolicy,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { iou_thresh: default_iou(), normalize: NormalizePolicy::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub version: u32,
    pub stages: StagesConfig,
    #[serde(default)]
    pub io: IoConfig,
    #[serde(default)]
    pub runtime: RuntimeConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn invalid(key: &str, message: impl Into<String>) -> PipelineError {
    PipelineError::Config { key: key.to_string(), message: message.into() }
}

impl PipelineConfig {
    /// Parses and validates a JSON document. Errors carry the key path.
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self, PipelineError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let mut config: PipelineConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            let key = if key == "." { String::new() } else { key };
            PipelineError::Config { key, message: e.into_inner().to_string() }
        })?;
        config.base_dir = base_dir.to_path_buf();
        config.validate()?;
        Ok(config)
    }

    /// Structural checks that need no files.
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.version != CONFIG_VERSION {
            return Err(invalid("version", format!("unsupported version {}, expected {CONFIG_VERSION}", self.version)));
        }
        let s = &self.stages;
        if s.detector.is_none() && s.recognizer.is_none() && s.kie.is_none() {
            return Err(invalid("stages", "at least one stage is required"));
        }
        if s.kie.is_some() && s.recognizer.is_none() {
            return Err(invalid("stages.kie", "kie requires a recognizer stage"));
        }
        if let Some(d) = &s.detector {
            d.params.validate().map_err(|e| invalid("stages.detector.params", e.to_string()))?;
        }
        if let Some(r) = &s.recognizer {
            if r.beam_width < 1 {
                return Err(invalid("stages.recognizer.beam_width", "must be >= 1"));
            }
            if r.max_len < 1 {
                return Err(invalid("stages.recognizer.max_len", "must be >= 1"));
            }
            check_dict(&r.dict, "stages.recognizer.dict")?;
        }
        if let Some(k) = &s.kie {
            if k.class_names.is_empty() {
                return Err(invalid("stages.kie.class_names", "at least one class is required"));
            }
            if let Some(bg) = &k.background {
                if !k.class_names.contains(bg) {
                    return Err(invalid("stages.kie.background", format!("{bg:?} is not one of class_names")));
                }
            }
            if let Some(d) = &k.dict {
                check_dict(d, "stages.kie.dict")?;
            }
        }
        if self.runtime.workers < 1 {
            return Err(invalid("runtime.workers", "must be >= 1"));
        }
        if !(self.eval.iou_thresh > 0.0 && self.eval.iou_thresh <= 1.0) {
            return Err(invalid("eval.iou_thresh", "must be in (0, 1]"));
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.base_dir.join(p)
    }
}

fn check_dict(d: &DictConfig, key: &str) -> Result<(), PipelineError> {
    match (&d.path, &d.characters) {
        (Some(_), Some(_)) => Err(invalid(key, "give either path or characters, not both")),
        (None, None) => Err(invalid(key, "missing dictionary: give path or characters")),
        _ => Ok(()),
    }
}

/// Reads and validates a config file; relative paths resolve against its
/// directory.
pub fn load_config(path: &Path) -> Result<PipelineConfig, PipelineError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PipelineError::Io { path: path.display().to_string(), message: e.to_string() })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    PipelineConfig::from_json(&text, &base)
}
