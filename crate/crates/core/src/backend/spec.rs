use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::BackendError;
use crate::recdecode::ScoreConvention;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResizePolicy {
    /// Scale each axis independently to the target size. A missing target
    /// dimension keeps the aspect ratio.
    Stretch,
    /// Uniform scale to fit inside the target, padded at the bottom and right.
    FitPad,
    /// Feed the image at its own size.
    #[default]
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputRole {
    /// `[1, 1, H, W]` text probability.
    ProbMap,
    /// `[1, n, H, W]` binary kernels, smallest first.
    KernelStack,
    /// `[1, D, H, W]` per-pixel embedding.
    Similarity,
    /// `[1, T, C]` class scores.
    Logits,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    #[serde(default = "default_input_name")]
    pub name: String,
    #[serde(default)]
    pub height: Option<usize>,
    #[serde(default)]
    pub width: Option<usize>,
    #[serde(default = "default_channels")]
    pub channels: usize,
    /// Per-channel mean on the [0,1] scale; empty means zeros.
    #[serde(default)]
    pub mean: Vec<f32>,
    /// Per-channel std on the [0,1] scale; empty means ones.
    #[serde(default)]
    pub std: Vec<f32>,
    #[serde(default)]
    pub resize: ResizePolicy,
}

fn default_input_name() -> String {
    "input".into()
}

fn default_channels() -> usize {
    3
}

impl Default for InputSpec {
    fn default() -> Self {
        Self {
            name: default_input_name(),
            height: None,
            width: None,
            channels: default_channels(),
            mean: Vec::new(),
            std: Vec::new(),
            resize: ResizePolicy::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub name: String,
    pub role: OutputRole,
}

/// What an exported model consumes and produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default)]
    pub input: InputSpec,
    pub outputs: Vec<OutputSpec>,
    #[serde(default)]
    pub score_convention: ScoreConvention,
}

impl ModelSpec {
    /// Default input settings with one output per role, named after the role.
    pub fn with_roles(roles: &[OutputRole]) -> Self {
        let outputs = roles
            .iter()
            .map(|&role| {
                let name = serde_json::to_value(role).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
                OutputSpec { name, role }
            })
            .collect();
        Self { input: InputSpec::default(), outputs, score_convention: ScoreConvention::default() }
    }

    pub fn from_file(path: &Path) -> Result<Self, BackendError> {
        let load_err = |message: String| BackendError::Load { path: path.display().to_string(), message };
        let text = std::fs::read_to_string(path).map_err(|e| load_err(e.to_string()))?;
        let spec: ModelSpec = serde_json::from_str(&text).map_err(|e| load_err(e.to_string()))?;
        spec.validated().map_err(|e| load_err(e.to_string()))
    }

    /// Checks invariants and fills empty mean/std.
    pub fn validated(mut self) -> Result<Self, BackendError> {
        let c = self.input.channels;
        if c != 1 && c != 3 {
            return Err(BackendError::UnsupportedChannels(c));
        }
        if self.input.mean.is_empty() {
            self.input.mean = vec![0.0; c];
        }
        if self.input.std.is_empty() {
            self.input.std = vec![1.0; c];
        }
        if self.input.mean.len() != c || self.input.std.len() != c {
            return Err(BackendError::Spec(format!("mean and std need {c} values")));
        }
        if self.input.std.iter().any(|&s| !(s.is_finite() && s != 0.0)) || self.input.mean.iter().any(|m| !m.is_finite()) {
            return Err(BackendError::Spec("mean must be finite and std finite and nonzero".into()));
        }
        if self.input.height == Some(0) || self.input.width == Some(0) {
            return Err(BackendError::Spec("input height and width must be positive".into()));
        }
        if self.input.resize == ResizePolicy::FitPad && (self.input.height.is_none() || self.input.width.is_none()) {
            return Err(BackendError::Spec("fit_pad needs both input height and width".into()));
        }
        if self.outputs.is_empty() {
            return Err(BackendError::Spec("at least one output is required".into()));
        }
        let mut names = HashSet::new();
        let mut roles = HashSet::new();
        for o in &self.outputs {
            if !names.insert(o.name.as_str()) {
                return Err(BackendError::Spec(format!("duplicate output name {:?}", o.name)));
            }
            if !roles.insert(o.role) {
                return Err(BackendError::Spec(format!("duplicate output role {:?}", o.role)));
            }
        }
        Ok(self)
    }

    pub fn output(&self, role: OutputRole) -> Option<&OutputSpec> {
        self.outputs.iter().find(|o| o.role == role)
    }

    /// Errors naming the first role in `roles` the spec does not provide.
    pub fn require_roles(&self, roles: &[OutputRole]) -> Result<(), BackendError> {
        match roles.iter().find(|&&r| self.output(r).is_none()) {
            Some(r) => Err(BackendError::Spec(format!("model has no output with role {r:?}"))),
            None => Ok(()),
        }
    }
}
