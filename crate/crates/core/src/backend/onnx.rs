use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use tract_onnx::prelude::*;

use super::{Backend, BackendError, ModelSpec, Outputs, Tensor};

type Plan = Arc<TypedRunnableModel>;

/// Exported `.onnx` model run through tract. Plans are optimized once per
/// input shape and cached; a plan is shared by all callers.
pub struct OnnxBackend {
    path: PathBuf,
    spec: ModelSpec,
    model: InferenceModel,
    /// Model output index for each spec output, in spec order.
    output_index: Vec<usize>,
    plans: Mutex<HashMap<Vec<usize>, Plan>>,
}

impl OnnxBackend {
    pub fn load(path: &Path, spec: ModelSpec) -> Result<Self, BackendError> {
        let spec = spec.validated()?;
        let load_err = |message: String| BackendError::Load { path: path.display().to_string(), message };
        let model = tract_onnx::onnx().model_for_path(path).map_err(|e| load_err(format!("{e:#}")))?;

        let inputs = model.input_outlets().map_err(|e| load_err(e.to_string()))?;
        if inputs.len() != 1 {
            return Err(load_err(format!("expected one model input, found {}", inputs.len())));
        }
        let input_name = &model.node(inputs[0].node).name;
        if *input_name != spec.input.name {
            return Err(load_err(format!("model input is {input_name:?}, spec declares {:?}", spec.input.name)));
        }

        let outlets = model.output_outlets().map_err(|e| load_err(e.to_string()))?;
        let names: Vec<String> = outlets
            .iter()
            .map(|&o| model.outlet_label(o).map(String::from).unwrap_or_else(|| model.node(o.node).name.clone()))
            .collect();
        let mut output_index = Vec::with_capacity(spec.outputs.len());
        for o in &spec.outputs {
            let i = names
                .iter()
                .position(|n| *n == o.name)
                .ok_or_else(|| load_err(format!("model has no output {:?} (outputs: {names:?})", o.name)))?;
            output_index.push(i);
        }
        Ok(Self { path: path.to_path_buf(), spec, model, output_index, plans: Mutex::new(HashMap::new()) })
    }

    fn runtime_err(&self, message: String) -> BackendError {
        BackendError::Runtime { path: self.path.display().to_string(), message }
    }

    fn plan(&self, shape: &[usize]) -> Result<Plan, BackendError> {
        if let Some(p) = self.plans.lock().expect("plan cache poisoned").get(shape) {
            return Ok(p.clone());
        }
        let plan = self
            .model
            .clone()
            .with_input_fact(0, f32::fact(shape).into())
            .and_then(|m| m.into_optimized())
            .and_then(|m| m.into_runnable())
            .map_err(|e| self.runtime_err(format!("cannot build plan for input {shape:?}: {e:#}")))?;
        let mut cache = self.plans.lock().expect("plan cache poisoned");
        Ok(cache.entry(shape.to_vec()).or_insert(plan).clone())
    }
}

impl Backend for OnnxBackend {
    fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    fn forward(&self, input: &Tensor) -> Result<Outputs, BackendError> {
        let c = self.spec.input.channels;
        if !matches!(input.shape(), &[1, ch, _, _] if ch == c) {
            return Err(BackendError::Shape(format!(
                "{}: expected a [1, {c}, H, W] input, got {:?}",
                self.path.display(),
                input.shape()
            )));
        }
        let plan = self.plan(input.shape())?;
        let array = tract_ndarray::ArrayD::from_shape_vec(input.shape(), input.data().to_vec())
            .map_err(|e| BackendError::Shape(e.to_string()))?;
        let result = plan
            .run(tvec!(tract_onnx::prelude::Tensor::from(array).into()))
            .map_err(|e| self.runtime_err(format!("{e:#}")))?;
        let mut out = Outputs::new();
        for (o, &i) in self.spec.outputs.iter().zip(&self.output_index) {
            let value = result.get(i).ok_or_else(|| self.runtime_err(format!("missing output {}", o.name)))?;
            let view = value.to_plain_array_view::<f32>().map_err(|e| self.runtime_err(format!("{}: {e}", o.name)))?;
            out.insert(o.name.clone(), Tensor::new(view.shape().to_vec(), view.iter().copied().collect())?);
        }
        Ok(out)
    }
}
