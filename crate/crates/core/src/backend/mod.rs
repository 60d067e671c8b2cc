//! The model-inference boundary. Networks stay inside exported models; the
//! engine only sees named tensors with declared roles.

mod mock;
#[cfg(feature = "onnx")]
mod onnx;
mod preprocess;
mod spec;

pub use mock::{MockBackend, MockScene, SceneRect, TextLayout, TextScript};
#[cfg(feature = "onnx")]
pub use onnx::OnnxBackend;
pub use preprocess::{map_coords, map_polygon, preprocess, PreprocessRecord, RasterImage};
pub use spec::{InputSpec, ModelSpec, OutputRole, OutputSpec, ResizePolicy};

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::recdecode::Dictionary;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BackendError {
    #[error("model spec: {0}")]
    Spec(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("unsupported channel count {0} (expected 1 or 3)")]
    UnsupportedChannels(usize),
    #[error("cannot load model {path}: {message}")]
    Load { path: String, message: String },
    #[error("model {path} failed: {message}")]
    Runtime { path: String, message: String },
    #[error("mock scene: {0}")]
    Scene(String),
}

/// Dense row-major `f32` tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f32>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f32>) -> Result<Self, BackendError> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(BackendError::Shape(format!("shape {shape:?} needs {n} values, got {}", data.len())));
        }
        Ok(Self { shape, data })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }
}

/// Named model outputs.
pub type Outputs = BTreeMap<String, Tensor>;

/// A loaded model. Implementations are shareable across worker threads.
pub trait Backend: Send + Sync {
    fn spec(&self) -> &ModelSpec;

    fn forward(&self, input: &Tensor) -> Result<Outputs, BackendError>;

    /// The output tensor carrying `role`.
    fn output<'a>(&self, outputs: &'a Outputs, role: OutputRole) -> Result<&'a Tensor, BackendError> {
        let spec = self.spec().output(role).ok_or_else(|| BackendError::Spec(format!("no output with role {role:?}")))?;
        outputs.get(&spec.name).ok_or_else(|| BackendError::Shape(format!("model did not produce {:?}", spec.name)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockModel {
    /// Defaults to the stage's standard roles with identity preprocessing.
    #[serde(default)]
    pub spec: Option<ModelSpec>,
    pub scene: MockScene,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OnnxModel {
    pub path: PathBuf,
    /// Sidecar spec; defaults to the model path with a `.json` extension.
    #[serde(default)]
    pub spec: Option<PathBuf>,
}

/// Where a stage's model comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelRef {
    Mock(MockModel),
    Onnx(OnnxModel),
}

impl ModelRef {
    /// Resolves relative file references against `base`.
    pub fn rebased(&self, base: &Path) -> Self {
        match self {
            ModelRef::Mock(m) => ModelRef::Mock(m.clone()),
            ModelRef::Onnx(o) => ModelRef::Onnx(OnnxModel {
                path: base.join(&o.path),
                spec: o.spec.as_ref().map(|s| base.join(s)),
            }),
        }
    }
}

/// Loads a model and checks that it provides `roles`.
pub fn load_backend(
    model: &ModelRef,
    default_roles: &[OutputRole],
    dict: Option<&Dictionary>,
) -> Result<Arc<dyn Backend>, BackendError> {
    let backend: Arc<dyn Backend> = match model {
        ModelRef::Mock(m) => {
            let spec = m.spec.clone().unwrap_or_else(|| ModelSpec::with_roles(default_roles));
            Arc::new(MockBackend::new(spec, &m.scene, dict)?)
        }
        ModelRef::Onnx(o) => load_onnx(o)?,
    };
    backend.spec().require_roles(default_roles)?;
    Ok(backend)
}

#[cfg(feature = "onnx")]
fn load_onnx(o: &OnnxModel) -> Result<Arc<dyn Backend>, BackendError> {
    let sidecar = o.spec.clone().unwrap_or_else(|| o.path.with_extension("json"));
    let spec = ModelSpec::from_file(&sidecar)?;
    Ok(Arc::new(OnnxBackend::load(&o.path, spec)?))
}

#[cfg(not(feature = "onnx"))]
fn load_onnx(o: &OnnxModel) -> Result<Arc<dyn Backend>, BackendError> {
    Err(BackendError::Load { path: o.path.display().to_string(), message: "built without onnx support".into() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_shape_checked() {
        assert!(Tensor::new(vec![2, 3], vec![0.0; 6]).is_ok());
        assert!(Tensor::new(vec![2, 3], vec![0.0; 5]).is_err());
    }

    #[test]
    fn model_ref_json() {
        let m: ModelRef = serde_json::from_str(
            r#"{"mock": {"scene": {"kind": "detection", "shapes": ["rect(1,1,4,4)"]}}}"#,
        )
        .unwrap();
        let b = load_backend(&m, &[OutputRole::ProbMap], None).unwrap();
        assert_eq!(b.spec().outputs.len(), 1);
        let o: ModelRef = serde_json::from_str(r#"{"onnx": {"path": "m.onnx"}}"#).unwrap();
        assert_eq!(o.rebased(Path::new("/x")), ModelRef::Onnx(OnnxModel { path: "/x/m.onnx".into(), spec: None }));
    }

    #[test]
    fn missing_role_fails_at_load() {
        let m: ModelRef = serde_json::from_str(
            r#"{"mock": {"spec": {"outputs": [{"name": "p", "role": "prob_map"}]},
                         "scene": {"kind": "detection", "shapes": []}}}"#,
        )
        .unwrap();
        assert!(load_backend(&m, &[OutputRole::ProbMap, OutputRole::KernelStack], None).is_err());
    }

    #[test]
    fn missing_model_file_names_path() {
        let o = ModelRef::Onnx(OnnxModel { path: "/nonexistent/model.onnx".into(), spec: None });
        let err = load_backend(&o, &[OutputRole::ProbMap], None).err().unwrap();
        assert!(err.to_string().contains("/nonexistent/model"));
    }
}
