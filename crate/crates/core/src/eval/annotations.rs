use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{EvalError, GtInstance};
use crate::geometry::Polygon;

/// Ground-truth region in the unified annotation format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceRecord {
    /// Flat `x1, y1, x2, y2, ...`.
    pub polygon: Vec<f64>,
    pub text: String,
    #[serde(default)]
    pub ignore: bool,
}

/// One image of ground truth; one JSON Lines record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationRecord {
    pub image: String,
    pub instances: Vec<InstanceRecord>,
}

impl AnnotationRecord {
    pub fn from_gt(image: impl Into<String>, gts: &[GtInstance]) -> Self {
        let instances = gts
            .iter()
            .map(|g| InstanceRecord { polygon: g.polygon.to_flat(), text: g.transcription.clone(), ignore: g.ignore })
            .collect();
        Self { image: image.into(), instances }
    }

    pub fn gt_instances(&self) -> Result<Vec<GtInstance>, EvalError> {
        self.instances
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let polygon = Polygon::from_flat(&r.polygon).map_err(|e| {
                    EvalError::Argument(format!("image {:?} instance {i}: {e}", self.image))
                })?;
                Ok(GtInstance { polygon, transcription: r.text.clone(), ignore: r.ignore })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct PredictedRegion {
    pub polygon: Vec<f64>,
    #[serde(default)]
    pub score: f64,
    #[serde(default)]
    pub text: Option<String>,
}

/// The parts of a results record evaluation reads; other keys are ignored.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct PredictionRecord {
    pub image: String,
    #[serde(default)]
    pub detections: Vec<PredictedRegion>,
    /// Set when the producing run failed on this image.
    #[serde(default)]
    pub error: Option<String>,
}

impl PredictionRecord {
    /// Polygons with their texts (empty when not recognized).
    pub fn instances(&self) -> Result<Vec<(Polygon, String)>, EvalError> {
        self.detections
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let p = Polygon::from_flat(&d.polygon)
                    .map_err(|e| EvalError::Argument(format!("image {:?} detection {i}: {e}", self.image)))?;
                Ok((p, d.text.clone().unwrap_or_default()))
            })
            .collect()
    }
}

/// Parses ICDAR text ground truth: `x1,y1,...,x4,y4,transcription` per
/// line. The transcription may itself contain commas; `###` marks a
/// don't-care region. Blank lines are skipped.
pub fn parse_icdar_gt(text: &str, source_name: &str) -> Result<Vec<GtInstance>, EvalError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| EvalError::Parse { source_name: source_name.to_string(), line: i + 1, message };
        let fields: Vec<&str> = line.splitn(9, ',').collect();
        if fields.len() != 9 {
            return Err(err(format!("expected 8 coordinates and a transcription, got {} fields", fields.len())));
        }
        let mut coords = [0.0; 8];
        for (c, f) in coords.iter_mut().zip(&fields[..8]) {
            *c = f.trim().parse().map_err(|_| err(format!("bad coordinate {f:?}")))?;
        }
        let polygon = Polygon::from_flat(&coords).map_err(|e| err(e.to_string()))?;
        let transcription = fields[8].to_string();
        let ignore = transcription == "###";
        out.push(GtInstance { polygon, transcription, ignore });
    }
    Ok(out)
}

fn read_text(path: &Path) -> Result<String, EvalError> {
    std::fs::read_to_string(path).map_err(|e| EvalError::Io { path: path.display().to_string(), message: e.to_string() })
}

pub fn read_icdar_gt(path: &Path) -> Result<Vec<GtInstance>, EvalError> {
    parse_icdar_gt(&read_text(path)?, &path.display().to_string())
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, EvalError> {
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(line).map_err(|e| EvalError::Parse {
            source_name: path.display().to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

pub fn read_annotations(path: &Path) -> Result<Vec<AnnotationRecord>, EvalError> {
    read_jsonl(path)
}

pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRecord>, EvalError> {
    read_jsonl(path)
}
