use std::collections::BTreeMap;
use std::sync::Arc;

use super::config::KieConfig;
use super::PipelineError;
use crate::backend::{Backend, OutputRole, Outputs, Tensor};
use crate::detpost::{
    db_postprocess, pan_postprocess, psenet_postprocess, DetParams, Detection, KernelStack, SimilarityMap,
};
use crate::geometry::{BinaryMap, ScoreMap};
use crate::kie::{build_graph, extract_entities, kie_infer, Entities, KieWeights, TextInstance};
use crate::recdecode::{
    attention_decode, ctc_beam_decode, ctc_greedy_decode, DecodeError, Dictionary, LogitsSeq, RowSteps, Transcription,
};

/// Turns detector outputs into polygons in tensor coordinates.
pub trait DetectorAlgorithm: Send + Sync {
    fn required_roles(&self) -> &'static [OutputRole];

    fn postprocess(
        &self,
        outputs: &Outputs,
        backend: &dyn Backend,
        params: &DetParams,
    ) -> Result<Vec<Detection>, String>;
}

/// Decoder settings shared by all recognizers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeOptions {
    pub beam_width: usize,
    pub max_len: usize,
}

pub trait DecoderAlgorithm: Send + Sync {
    /// Checks the dictionary has the special tokens this decoder needs.
    fn check(&self, dict: &Dictionary) -> Result<(), String>;

    fn decode(&self, logits: &LogitsSeq, dict: &Dictionary, opts: DecodeOptions) -> Result<Transcription, DecodeError>;
}

/// A loaded key-information model.
pub trait KieModel: Send + Sync {
    /// Per-instance class index plus grouped entities.
    fn extract(&self, instances: &[TextInstance]) -> Result<(Vec<usize>, Entities), String>;
}

pub type KieConstructor =
    Box<dyn Fn(&KieConfig, KieWeights, Dictionary) -> Result<Arc<dyn KieModel>, PipelineError> + Send + Sync>;

/// Named stage implementations. Unknown names fail when a pipeline is built.
pub struct Registry {
    detectors: BTreeMap<String, Arc<dyn DetectorAlgorithm>>,
    decoders: BTreeMap<String, Arc<dyn DecoderAlgorithm>>,
    kie: BTreeMap<String, KieConstructor>,
}

impl Registry {
    pub fn empty() -> Self {
        Self { detectors: BTreeMap::new(), decoders: BTreeMap::new(), kie: BTreeMap::new() }
    }

    pub fn register_detector(&mut self, name: &str, algo: Arc<dyn DetectorAlgorithm>) -> Result<(), PipelineError> {
        insert_unique(&mut self.detectors, name, algo, "detector")
    }

    pub fn register_decoder(&mut self, name: &str, algo: Arc<dyn DecoderAlgorithm>) -> Result<(), PipelineError> {
        insert_unique(&mut self.decoders, name, algo, "decoder")
    }

    pub fn register_kie(&mut self, name: &str, ctor: KieConstructor) -> Result<(), PipelineError> {
        insert_unique(&mut self.kie, name, ctor, "kie algorithm")
    }

    pub fn detector(&self, name: &str) -> Option<Arc<dyn DetectorAlgorithm>> {
        self.detectors.get(name).cloned()
    }

    pub fn decoder(&self, name: &str) -> Option<Arc<dyn DecoderAlgorithm>> {
        self.decoders.get(name).cloned()
    }

    pub fn kie(&self, name: &str) -> Option<&KieConstructor> {
        self.kie.get(name)
    }

    pub fn detector_names(&self) -> Vec<&str> {
        self.detectors.keys().map(String::as_str).collect()
    }

    pub fn decoder_names(&self) -> Vec<&str> {
        self.decoders.keys().map(String::as_str).collect()
    }

    pub fn kie_names(&self) -> Vec<&str> {
        self.kie.keys().map(String::as_str).collect()
    }
}

fn insert_unique<T>(map: &mut BTreeMap<String, T>, name: &str, value: T, what: &str) -> Result<(), PipelineError> {
    if map.contains_key(name) {
        return Err(PipelineError::Config { key: String::new(), message: format!("{what} {name:?} registered twice") });
    }
    map.insert(name.to_string(), value);
    Ok(())
}

impl Default for Registry {
    /// Detectors `db`, `psenet`, `pan`; decoders `ctc_greedy`, `ctc_beam`,
    /// `attention`; kie `sdmgr`.
    fn default() -> Self {
        let mut r = Self::empty();
        r.detectors.insert("db".into(), Arc::new(Db));
        r.detectors.insert("psenet".into(), Arc::new(Pse));
        r.detectors.insert("pan".into(), Arc::new(Pan));
        r.decoders.insert("ctc_greedy".into(), Arc::new(CtcGreedy));
        r.decoders.insert("ctc_beam".into(), Arc::new(CtcBeam));
        r.decoders.insert("attention".into(), Arc::new(Attention));
        r.kie.insert("sdmgr".into(), Box::new(Sdmgr::build));
        r
    }
}

fn planes(t: &Tensor, what: &str) -> Result<(usize, usize, usize), String> {
    match *t.shape() {
        [1, n, h, w] if n >= 1 && h >= 1 && w >= 1 => Ok((n, h, w)),
        _ => Err(format!("{what} must be [1, n, H, W], got {:?}", t.shape())),
    }
}

/// Probability plane, clamped to [0,1] with NaN read as 0.
fn score_map(t: &Tensor) -> Result<ScoreMap, String> {
    let (n, h, w) = planes(t, "probability map")?;
    if n != 1 {
        return Err(format!("probability map must have one channel, got {n}"));
    }
    let data = t.data().iter().map(|&v| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) }).collect();
    ScoreMap::new(h, w, data).map_err(|e| e.to_string())
}

fn kernel_planes(t: &Tensor, thresh: f32) -> Result<Vec<BinaryMap>, String> {
    let (n, h, w) = planes(t, "kernel stack")?;
    (0..n)
        .map(|k| {
            let plane = t.data()[k * h * w..(k + 1) * h * w].iter().map(|&v| v > thresh).collect();
            BinaryMap::new(h, w, plane).map_err(|e| e.to_string())
        })
        .collect()
}

struct Db;

impl DetectorAlgorithm for Db {
    fn required_roles(&self) -> &'static [OutputRole] {
        &[OutputRole::ProbMap]
    }

    fn postprocess(&self, outputs: &Outputs, backend: &dyn Backend, params: &DetParams) -> Result<Vec<Detection>, String> {
        let prob = score_map(backend.output(outputs, OutputRole::ProbMap).map_err(|e| e.to_string())?)?;
        db_postprocess(&prob, params).map_err(|e| e.to_string())
    }
}

struct Pse;

impl DetectorAlgorithm for Pse {
    fn required_roles(&self) -> &'static [OutputRole] {
        &[OutputRole::ProbMap, OutputRole::KernelStack]
    }

    fn postprocess(&self, outputs: &Outputs, backend: &dyn Backend, params: &DetParams) -> Result<Vec<Detection>, String> {
        let out = |role| backend.output(outputs, role).map_err(|e| e.to_string());
        let prob = score_map(out(OutputRole::ProbMap)?)?;
        let stack = KernelStack::new(kernel_planes(out(OutputRole::KernelStack)?, params.bin_thresh)?)
            .map_err(|e| e.to_string())?;
        psenet_postprocess(&stack, &prob, params).map_err(|e| e.to_string())
    }
}

struct Pan;

impl DetectorAlgorithm for Pan {
    fn required_roles(&self) -> &'static [OutputRole] {
        &[OutputRole::ProbMap, OutputRole::KernelStack, OutputRole::Similarity]
    }

    fn postprocess(&self, outputs: &Outputs, backend: &dyn Backend, params: &DetParams) -> Result<Vec<Detection>, String> {
        let out = |role| backend.output(outputs, role).map_err(|e| e.to_string());
        let prob = score_map(out(OutputRole::ProbMap)?)?;
        let text = prob.binarize(params.bin_thresh);
        let kernel = kernel_planes(out(OutputRole::KernelStack)?, params.bin_thresh)?.swap_remove(0);
        let sim_t = out(OutputRole::Similarity)?;
        let (d, h, w) = planes(sim_t, "similarity map")?;
        let sim = SimilarityMap::from_channels(h, w, d, sim_t.data()).map_err(|e| e.to_string())?;
        pan_postprocess(&text, &kernel, &sim, &prob, params).map_err(|e| e.to_string())
    }
}

struct CtcGreedy;

impl DecoderAlgorithm for CtcGreedy {
    fn check(&self, dict: &Dictionary) -> Result<(), String> {
        dict.specials().blank.map(|_| ()).ok_or_else(|| "ctc decoding needs a blank token".into())
    }

    fn decode(&self, logits: &LogitsSeq, dict: &Dictionary, _: DecodeOptions) -> Result<Transcription, DecodeError> {
        ctc_greedy_decode(logits, dict)
    }
}

struct CtcBeam;

impl DecoderAlgorithm for CtcBeam {
    fn check(&self, dict: &Dictionary) -> Result<(), String> {
        CtcGreedy.check(dict)
    }

    fn decode(&self, logits: &LogitsSeq, dict: &Dictionary, opts: DecodeOptions) -> Result<Transcription, DecodeError> {
        let mut hyps = ctc_beam_decode(logits, dict, opts.beam_width)?;
        Ok(hyps.swap_remove(0).transcription)
    }
}

struct Attention;

impl DecoderAlgorithm for Attention {
    fn check(&self, dict: &Dictionary) -> Result<(), String> {
        let sp = dict.specials();
        if sp.start.is_none() || sp.end.is_none() {
            return Err("attention decoding needs start and end tokens".into());
        }
        Ok(())
    }

    fn decode(&self, logits: &LogitsSeq, dict: &Dictionary, opts: DecodeOptions) -> Result<Transcription, DecodeError> {
        attention_decode(&mut RowSteps::new(logits), dict, opts.max_len.min(logits.steps()))
    }
}

struct Sdmgr {
    weights: KieWeights,
    dict: Dictionary,
    class_names: Vec<String>,
    background: Option<usize>,
}

impl Sdmgr {
    fn build(cfg: &KieConfig, weights: KieWeights, dict: Dictionary) -> Result<Arc<dyn KieModel>, PipelineError> {
        let dims = weights.dims();
        if dims.vocab != dict.len() {
            return Err(PipelineError::Config {
                key: "stages.kie.weights".into(),
                message: format!("embedding has {} rows but the dictionary has {} classes", dims.vocab, dict.len()),
            });
        }
        if dims.classes != cfg.class_names.len() {
            return Err(PipelineError::Config {
                key: "stages.kie.class_names".into(),
                message: format!("{} names for {} weight classes", cfg.class_names.len(), dims.classes),
            });
        }
        let background = cfg.background.as_ref().and_then(|b| cfg.class_names.iter().position(|c| c == b));
        Ok(Arc::new(Sdmgr { weights, dict, class_names: cfg.class_names.clone(), background }))
    }
}

impl KieModel for Sdmgr {
    fn extract(&self, instances: &[TextInstance]) -> Result<(Vec<usize>, Entities), String> {
        if instances.is_empty() {
            return Ok((Vec::new(), Vec::new()));
        }
        let graph = build_graph(instances, &self.dict).map_err(|e| e.to_string())?;
        let scores = kie_infer(&graph, &self.weights).map_err(|e| e.to_string())?;
        let classes = scores
            .iter()
            .map(|row| row.iter().enumerate().fold(0, |best, (k, &v)| if v > row[best] { k } else { best }))
            .collect();
        Ok((classes, extract_entities(&graph, &scores, &self.class_names, self.background)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_names() {
        let r = Registry::default();
        assert_eq!(r.detector_names(), vec!["db", "pan", "psenet"]);
        assert_eq!(r.decoder_names(), vec!["attention", "ctc_beam", "ctc_greedy"]);
        assert_eq!(r.kie_names(), vec!["sdmgr"]);
    }

    #[test]
    fn duplicate_registration_rejected() {
        let mut r = Registry::default();
        assert!(r.register_detector("db", Arc::new(Db)).is_err());
        assert!(r.register_detector("db2", Arc::new(Db)).is_ok());
    }
}
