//! ICDAR-style detection scoring, recognition accuracy and end-to-end
//! scoring, plus the text formats ground truth and results travel in.

mod annotations;
mod matching;
mod recog;
mod report;

pub use annotations::{
    parse_icdar_gt, read_annotations, read_icdar_gt, read_predictions, AnnotationRecord, InstanceRecord, PredictedRegion,
    PredictionRecord,
};
pub use matching::{e2e_metrics, evaluate_dataset, match_detections, MatchResult};
pub use recog::{levenshtein, recog_metrics, RecogMetrics};
pub use report::{render_report, ReportRow};

use serde::Serialize;
use thiserror::Error;

use crate::geometry::Polygon;

/// Default IoU threshold for a detection to count as a match.
pub const DEFAULT_IOU_THRESH: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("{source_name}:{line}: {message}")]
    Parse { source_name: String, line: usize, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

/// One ground-truth region. Ignored regions are "don't care".
#[derive(Debug, Clone, PartialEq)]
pub struct GtInstance {
    pub polygon: Polygon,
    pub transcription: String,
    pub ignore: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetMetrics {
    pub recall: f64,
    pub precision: f64,
    pub hmean: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn hmean(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

/// Rates from global counts. With nothing to detect and nothing detected
/// all three rates are 1.
pub fn det_metrics(tp: usize, fp: usize, fn_: usize) -> DetMetrics {
    let recall = if tp + fn_ == 0 { 1.0 } else { tp as f64 / (tp + fn_) as f64 };
    let precision = match (tp + fp, fn_) {
        (0, 0) => 1.0,
        (0, _) => 0.0,
        (n, _) => tp as f64 / n as f64,
    };
    DetMetrics { recall, precision, hmean: hmean(precision, recall), tp, fp, fn_ }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_conventions() {
        let m = det_metrics(0, 0, 0);
        assert_eq!((m.precision, m.recall, m.hmean), (1.0, 1.0, 1.0));
        let m = det_metrics(0, 0, 3);
        assert_eq!((m.precision, m.recall, m.hmean), (0.0, 0.0, 0.0));
        let m = det_metrics(0, 2, 0);
        assert_eq!((m.precision, m.recall, m.hmean), (0.0, 1.0, 0.0));
    }

    #[test]
    fn table_rows() {
        assert!((hmean(0.871, 0.731) - 0.795).abs() < 1e-3);
        assert!((hmean(0.831, 0.784) - 0.807).abs() < 1e-3);
    }
}
