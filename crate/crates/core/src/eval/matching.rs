use std::collections::HashMap;

use super::{det_metrics, AnnotationRecord, DetMetrics, EvalError, GtInstance, PredictionRecord};
use crate::geometry::{polygon_iou, Polygon};
use crate::recdecode::{normalize_text, NormalizePolicy};

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// `(pred index, gt index, iou)` in assignment order.
    pub matches: Vec<(usize, usize, f64)>,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

fn iou(a: &Polygon, b: &Polygon) -> f64 {
    polygon_iou(a, b).unwrap_or(0.0)
}

fn check_thresh(t: f64) -> Result<(), EvalError> {
    if t > 0.0 && t <= 1.0 {
        Ok(())
    } else {
        Err(EvalError::Argument(format!("iou threshold {t} outside (0, 1]")))
    }
}

/// Greedy one-to-one matching by descending IoU against non-ignored ground
/// truth. Ties go to the lower gt index, then the lower prediction index.
///
/// An unmatched prediction is not a false positive when the ground truth it
/// overlaps most (lowest index on ties) is ignored and reaches the threshold.
pub fn match_detections(preds: &[&Polygon], gts: &[GtInstance], iou_thresh: f64) -> Result<MatchResult, EvalError> {
    check_thresh(iou_thresh)?;
    let ious: Vec<Vec<f64>> = preds.iter().map(|p| gts.iter().map(|g| iou(p, &g.polygon)).collect()).collect();

    let mut candidates = Vec::new();
    for (pi, row) in ious.iter().enumerate() {
        for (gi, &v) in row.iter().enumerate() {
            if !gts[gi].ignore && v >= iou_thresh {
                candidates.push((v, gi, pi));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut pred_used = vec![false; preds.len()];
    let mut gt_used = vec![false; gts.len()];
    let mut matches = Vec::new();
    for (v, gi, pi) in candidates {
        if !pred_used[pi] && !gt_used[gi] {
            pred_used[pi] = true;
            gt_used[gi] = true;
            matches.push((pi, gi, v));
        }
    }

    let mut fp = 0;
    for (pi, row) in ious.iter().enumerate() {
        if pred_used[pi] {
            continue;
        }
        let mut best: Option<usize> = None;
        for (gi, &v) in row.iter().enumerate() {
            if best.is_none_or(|b| v > row[b]) {
                best = Some(gi);
            }
        }
        let dont_care = best.is_some_and(|b| gts[b].ignore && row[b] >= iou_thresh);
        if !dont_care {
            fp += 1;
        }
    }
    let fn_ = gts.iter().zip(&gt_used).filter(|(g, &used)| !g.ignore && !used).count();
    Ok(MatchResult { tp: matches.len(), matches, fp, fn_ })
}

/// Geometry matching first; a matched pair whose normalized texts differ
/// counts as both a false positive and a false negative.
pub fn e2e_metrics(
    preds: &[(&Polygon, &str)],
    gts: &[GtInstance],
    iou_thresh: f64,
    policy: NormalizePolicy,
) -> Result<DetMetrics, EvalError> {
    let (tp, fp, fn_) = e2e_counts(preds, gts, iou_thresh, policy)?;
    Ok(det_metrics(tp, fp, fn_))
}

fn e2e_counts(
    preds: &[(&Polygon, &str)],
    gts: &[GtInstance],
    iou_thresh: f64,
    policy: NormalizePolicy,
) -> Result<(usize, usize, usize), EvalError> {
    let polys: Vec<&Polygon> = preds.iter().map(|p| p.0).collect();
    let m = match_detections(&polys, gts, iou_thresh)?;
    let wrong = m
        .matches
        .iter()
        .filter(|&&(pi, gi, _)| normalize_text(preds[pi].1, policy) != normalize_text(&gts[gi].transcription, policy))
        .count();
    Ok((m.tp - wrong, m.fp + wrong, m.fn_ + wrong))
}

/// Dataset-level scores from global counts. Images without predictions
/// contribute only misses; predictions for unknown images are an error.
pub fn evaluate_dataset(
    preds: &[PredictionRecord],
    gts: &[AnnotationRecord],
    iou_thresh: f64,
    end_to_end: Option<NormalizePolicy>,
) -> Result<DetMetrics, EvalError> {
    let by_image: HashMap<&str, &PredictionRecord> = preds.iter().map(|p| (p.image.as_str(), p)).collect();
    let known: HashMap<&str, ()> = gts.iter().map(|g| (g.image.as_str(), ())).collect();
    if let Some(p) = preds.iter().find(|p| !known.contains_key(p.image.as_str())) {
        return Err(EvalError::Argument(format!("no ground truth for image {:?}", p.image)));
    }
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for g in gts {
        let gt = g.gt_instances()?;
        let pred = match by_image.get(g.image.as_str()) {
            Some(p) => p.instances()?,
            None => Vec::new(),
        };
        let (t, f, n) = match end_to_end {
            Some(policy) => {
                let pairs: Vec<(&Polygon, &str)> = pred.iter().map(|(p, t)| (p, t.as_str())).collect();
                e2e_counts(&pairs, &gt, iou_thresh, policy)?
            }
            None => {
                let polys: Vec<&Polygon> = pred.iter().map(|(p, _)| p).collect();
                let m = match_detections(&polys, &gt, iou_thresh)?;
                (m.tp, m.fp, m.fn_)
            }
        };
        tp += t;
        fp += f;
        fn_ += n;
    }
    Ok(det_metrics(tp, fp, fn_))
}
