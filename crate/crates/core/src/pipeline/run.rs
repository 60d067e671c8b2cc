use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{DictConfig, OverlayFormat, PipelineConfig};
use super::registry::{DecodeOptions, DecoderAlgorithm, DetectorAlgorithm, KieModel, Registry};
use super::{crop_region, load_image, render_overlay, PipelineError};
use crate::backend::{load_backend, map_coords, preprocess, Backend, OutputRole, RasterImage};
use crate::detpost::{DetParams, Detection};
use crate::geometry::Polygon;
use crate::kie::{Entities, KieWeights, TextInstance};
use crate::recdecode::{Dictionary, LogitsSeq, SpecialTokens, Transcription};

struct DetectorStage {
    algo: Arc<dyn DetectorAlgorithm>,
    backend: Arc<dyn Backend>,
    params: DetParams,
}

struct RecognizerStage {
    decoder: Arc<dyn DecoderAlgorithm>,
    backend: Arc<dyn Backend>,
    dict: Dictionary,
    opts: DecodeOptions,
}

/// An assembled, immutable pipeline. Stages are shared by all workers.
pub struct Pipeline {
    detector: Option<DetectorStage>,
    recognizer: Option<RecognizerStage>,
    kie: Option<Arc<dyn KieModel>>,
    workers: usize,
}

/// Everything produced for one input image.
#[derive(Debug, Clone, PartialEq)]
pub struct DocumentResult {
    pub image: String,
    /// In reading order, original image coordinates.
    pub detections: Vec<Detection>,
    /// Index-aligned with `detections`; empty without a recognizer.
    pub transcriptions: Vec<Transcription>,
    /// Index-aligned class per detection; empty without a kie stage.
    pub kie_classes: Vec<usize>,
    pub entities: Option<Entities>,
    /// Wall time per stage in milliseconds.
    pub timings_ms: BTreeMap<String, f64>,
    pub error: Option<String>,
}

impl DocumentResult {
    fn failed(image: String, error: String, timings_ms: BTreeMap<String, f64>) -> Self {
        Self {
            image,
            detections: Vec::new(),
            transcriptions: Vec::new(),
            kie_classes: Vec::new(),
            entities: None,
            timings_ms,
            error: Some(error),
        }
    }
}

fn config_err(key: &str, message: impl ToString) -> PipelineError {
    PipelineError::Config { key: key.to_string(), message: message.to_string() }
}

fn load_dict(d: &DictConfig, config: &PipelineConfig, key: &str) -> Result<Dictionary, PipelineError> {
    let specials = d.specials.unwrap_or_else(SpecialTokens::ctc);
    match (&d.path, &d.characters) {
        (Some(p), None) => {
            let path = config.resolve(p);
            Dictionary::from_file(&path, specials).map_err(|e| config_err(&format!("{key}.path"), e))
        }
        (None, Some(chars)) => {
            Dictionary::new(chars.iter().cloned(), specials).map_err(|e| config_err(&format!("{key}.characters"), e))
        }
        _ => Err(config_err(key, "give exactly one of path or characters")),
    }
}

/// Loads every model, dictionary and weight file the config names. Nothing
/// is read from the inputs and nothing is written.
pub fn build_pipeline(config: &PipelineConfig, registry: &Registry) -> Result<Pipeline, PipelineError> {
    config.validate()?;
    let base = &config.base_dir;

    let detector = match &config.stages.detector {
        None => None,
        Some(d) => {
            let algo = registry.detector(&d.algorithm).ok_or_else(|| {
                config_err(
                    "stages.detector.algorithm",
                    format!("unknown detector {:?} (known: {})", d.algorithm, registry.detector_names().join(", ")),
                )
            })?;
            let backend = load_backend(&d.model.rebased(base), algo.required_roles(), None)
                .map_err(|e| config_err("stages.detector.model", e))?;
            Some(DetectorStage { algo, backend, params: d.params })
        }
    };

    let recognizer = match &config.stages.recognizer {
        None => None,
        Some(r) => {
            let decoder = registry.decoder(&r.decoder).ok_or_else(|| {
                config_err(
                    "stages.recognizer.decoder",
                    format!("unknown decoder {:?} (known: {})", r.decoder, registry.decoder_names().join(", ")),
                )
            })?;
            let dict = load_dict(&r.dict, config, "stages.recognizer.dict")?;
            decoder.check(&dict).map_err(|e| config_err("stages.recognizer.dict.specials", e))?;
            let backend = load_backend(&r.model.rebased(base), &[OutputRole::Logits], Some(&dict))
                .map_err(|e| config_err("stages.recognizer.model", e))?;
            let opts = DecodeOptions { beam_width: r.beam_width, max_len: r.max_len };
            Some(RecognizerStage { decoder, backend, dict, opts })
        }
    };

    let kie = match &config.stages.kie {
        None => None,
        Some(k) => {
            let ctor = registry.kie(&k.algorithm).ok_or_else(|| {
                config_err(
                    "stages.kie.algorithm",
                    format!("unknown kie algorithm {:?} (known: {})", k.algorithm, registry.kie_names().join(", ")),
                )
            })?;
            let weights = KieWeights::load(&config.resolve(&k.weights)).map_err(|e| config_err("stages.kie.weights", e))?;
            let dict = match (&k.dict, &recognizer) {
                (Some(d), _) => load_dict(d, config, "stages.kie.dict")?,
                (None, Some(r)) => r.dict.clone(),
                (None, None) => return Err(config_err("stages.kie", "kie requires a recognizer stage")),
            };
            Some(ctor(k, weights, dict)?)
        }
    };

    Ok(Pipeline { detector, recognizer, kie, workers: config.runtime.workers })
}

/// Reading order: box center top to bottom, then left to right.
fn reading_order(dets: &mut [Detection]) {
    let center = |d: &Detection| {
        let (lo, hi) = d.polygon.bounds();
        ((lo.y + hi.y) / 2.0, (lo.x + hi.x) / 2.0)
    };
    dets.sort_by(|a, b| {
        let (ya, xa) = center(a);
        let (yb, xb) = center(b);
        ya.total_cmp(&yb).then(xa.total_cmp(&xb))
    });
}

fn full_image(img: &RasterImage) -> Detection {
    let polygon = Polygon::rect(0.0, 0.0, img.width() as f64, img.height() as f64).expect("image is non-empty");
    Detection { polygon, score: 1.0 }
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// A named input: id plus either a file to decode or an in-memory image.
#[derive(Debug, Clone)]
pub enum InputImage {
    File(PathBuf),
    Memory { id: String, image: RasterImage },
}

impl InputImage {
    pub fn id(&self) -> String {
        match self {
            InputImage::File(p) => p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
            InputImage::Memory { id, .. } => id.clone(),
        }
    }
}

impl Pipeline {
    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn has_detector(&self) -> bool {
        self.detector.is_some()
    }

    pub fn has_recognizer(&self) -> bool {
        self.recognizer.is_some()
    }

    pub fn has_kie(&self) -> bool {
        self.kie.is_some()
    }

    /// Polygons in original image coordinates, in reading order.
    pub fn detect(&self, image: &RasterImage) -> Result<Vec<Detection>, String> {
        let Some(d) = &self.detector else {
            return Ok(vec![full_image(image)]);
        };
        let (input, record) = preprocess(image, d.backend.spec()).map_err(|e| e.to_string())?;
        let outputs = d.backend.forward(&input).map_err(|e| e.to_string())?;
        let dets = d.algo.postprocess(&outputs, d.backend.as_ref(), &d.params)?;
        let mut dets = map_coords(&dets, &record);
        reading_order(&mut dets);
        Ok(dets)
    }

    /// Recognizes one already-cropped text line.
    pub fn recognize(&self, crop: &RasterImage) -> Result<Transcription, String> {
        let r = self.recognizer.as_ref().ok_or("pipeline has no recognizer")?;
        let (input, _) = preprocess(crop, r.backend.spec()).map_err(|e| e.to_string())?;
        let outputs = r.backend.forward(&input).map_err(|e| e.to_string())?;
        let t = r.backend.output(&outputs, OutputRole::Logits).map_err(|e| e.to_string())?;
        let classes = *t.shape().last().unwrap_or(&0);
        if classes == 0 || t.shape().iter().rev().skip(1).filter(|&&d| d != 1).count() > 1 {
            return Err(format!("logits must be [.., T, C] with unit batch, got {:?}", t.shape()));
        }
        let steps = t.data().len() / classes;
        let logits = LogitsSeq::with_convention(steps, classes, t.data().to_vec(), r.backend.spec().score_convention)
            .map_err(|e| e.to_string())?;
        r.decoder.decode(&logits, &r.dict, r.opts).map_err(|e| e.to_string())
    }

    fn process_image(&self, id: String, image: &RasterImage, timings: &mut BTreeMap<String, f64>) -> Result<DocumentResult, String> {
        let t = Instant::now();
        let detections = self.detect(image)?;
        if self.detector.is_some() {
            timings.insert("detect".into(), elapsed_ms(t));
        }

        let mut transcriptions = Vec::new();
        if self.recognizer.is_some() {
            let t = Instant::now();
            for d in &detections {
                let crop = crop_region(image, &d.polygon)?;
                transcriptions.push(self.recognize(&crop)?);
            }
            timings.insert("recognize".into(), elapsed_ms(t));
        }

        let (mut kie_classes, mut entities) = (Vec::new(), None);
        if let Some(k) = &self.kie {
            let t = Instant::now();
            let instances: Vec<TextInstance> = detections
                .iter()
                .zip(&transcriptions)
                .map(|(d, tr)| TextInstance {
                    polygon: d.polygon.clone(),
                    text: tr.text.clone(),
                    det_score: d.score,
                    rec_score: tr.score,
                })
                .collect();
            let (classes, ents) = k.extract(&instances)?;
            kie_classes = classes;
            entities = Some(ents);
            timings.insert("kie".into(), elapsed_ms(t));
        }

        Ok(DocumentResult {
            image: id,
            detections,
            transcriptions,
            kie_classes,
            entities,
            timings_ms: timings.clone(),
            error: None,
        })
    }

    /// Runs one input; failures are recorded in the result.
    pub fn run_one(&self, input: &InputImage) -> DocumentResult {
        let id = input.id();
        let mut timings = BTreeMap::new();
        let t = Instant::now();
        let loaded = match input {
            InputImage::File(p) => load_image(p).map(std::borrow::Cow::Owned),
            InputImage::Memory { image, .. } => Ok(std::borrow::Cow::Borrowed(image)),
        };
        timings.insert("load".into(), elapsed_ms(t));
        let image = match loaded {
            Ok(img) => img,
            Err(e) => return DocumentResult::failed(id, e, timings),
        };
        match self.process_image(id.clone(), &image, &mut timings) {
            Ok(r) => r,
            Err(e) => DocumentResult::failed(id, e, timings),
        }
    }

    /// Processes inputs on a pool of `workers` threads; output order follows
    /// input order.
    pub fn run(&self, inputs: &[InputImage]) -> Vec<DocumentResult> {
        if self.workers <= 1 {
            return inputs.iter().map(|i| self.run_one(i)).collect();
        }
        match rayon::ThreadPoolBuilder::new().num_threads(self.workers).build() {
            Ok(pool) => pool.install(|| inputs.par_iter().map(|i| self.run_one(i)).collect()),
            Err(_) => inputs.iter().map(|i| self.run_one(i)).collect(),
        }
    }
}

/// Sorted paths matching `pattern`.
pub fn collect_inputs(pattern: &str) -> Result<Vec<InputImage>, PipelineError> {
    let bad = |message: String| PipelineError::Config { key: "io.input".into(), message };
    let mut paths = Vec::new();
    for entry in glob::glob(pattern).map_err(|e| bad(e.to_string()))? {
        let path = entry.map_err(|e| bad(e.to_string()))?;
        if path.is_file() {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths.into_iter().map(InputImage::File).collect())
}

fn round3(v: f64) -> f64 {
    let r = (v * 1000.0).round() / 1000.0;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

#[derive(Serialize)]
struct DetectionRecord<'a> {
    polygon: Vec<f64>,
    score: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    text: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    text_score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    class: Option<&'a str>,
}

#[derive(Serialize)]
struct EntityRecord<'a> {
    class: &'a str,
    texts: &'a [String],
}

#[derive(Serialize)]
struct ResultRecord<'a> {
    image: &'a str,
    detections: Vec<DetectionRecord<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    entities: Option<Vec<EntityRecord<'a>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
}

/// One JSON line per result: coordinates and scores rounded to 3
/// decimals, keys in a fixed order, timings left out so output depends
/// only on inputs.
pub fn result_line(r: &DocumentResult, class_names: &[String]) -> String {
    let detections = r
        .detections
        .iter()
        .enumerate()
        .map(|(i, d)| DetectionRecord {
            polygon: d.polygon.to_flat().into_iter().map(round3).collect(),
            score: round3(d.score),
            text: r.transcriptions.get(i).map(|t| t.text.as_str()),
            text_score: r.transcriptions.get(i).map(|t| round3(t.score)),
            class: r.kie_classes.get(i).and_then(|&k| class_names.get(k)).map(String::as_str),
        })
        .collect();
    let entities = r
        .entities
        .as_ref()
        .map(|e| e.iter().map(|(class, texts)| EntityRecord { class, texts }).collect());
    let record = ResultRecord { image: &r.image, detections, entities, error: r.error.as_deref() };
    serde_json::to_string(&record).expect("result records serialize")
}

pub fn write_results(results: &[DocumentResult], class_names: &[String], out: &mut dyn Write) -> std::io::Result<()> {
    for r in results {
        writeln!(out, "{}", result_line(r, class_names))?;
    }
    Ok(())
}

/// Writes the results file, and overlays when configured.
pub fn persist(
    results: &[DocumentResult],
    inputs: &[InputImage],
    config: &PipelineConfig,
    output: Option<&Path>,
) -> Result<(), PipelineError> {
    let class_names: Vec<String> = config.stages.kie.as_ref().map(|k| k.class_names.clone()).unwrap_or_default();
    let io_err = |p: &Path, e: std::io::Error| PipelineError::Io { path: p.display().to_string(), message: e.to_string() };
    match output {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
            }
            let mut buf = Vec::new();
            write_results(results, &class_names, &mut buf).map_err(|e| io_err(path, e))?;
            std::fs::write(path, buf).map_err(|e| io_err(path, e))?;
        }
        None => {
            let stdout = std::io::stdout();
            write_results(results, &class_names, &mut stdout.lock()).map_err(|e| io_err(Path::new("<stdout>"), e))?;
        }
    }
    if let Some(ov) = &config.io.overlay {
        let dir = config.resolve(&ov.dir);
        std::fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        for (r, input) in results.iter().zip(inputs) {
            if r.error.is_some() {
                continue;
            }
            let image = match input {
                InputImage::File(p) => load_image(p).map_err(|e| PipelineError::Io { path: p.display().to_string(), message: e })?,
                InputImage::Memory { image, .. } => image.clone(),
            };
            let ext = match ov.format {
                OverlayFormat::Svg => "svg",
                OverlayFormat::Png => "png",
            };
            let path = dir.join(format!("{}.{ext}", r.image));
            render_overlay(&image, r, &class_names, &path)?;
        }
    }
    Ok(())
}
