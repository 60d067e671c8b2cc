use serde::Serialize;

use super::EvalError;
use crate::recdecode::{normalize_text, NormalizePolicy};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecogMetrics {
    pub word_accuracy: f64,
    /// Mean over pairs of `levenshtein / max(len)`.
    pub mean_ned: f64,
    pub count: usize,
}

/// Edit distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn recog_metrics<S: AsRef<str>, T: AsRef<str>>(
    preds: &[S],
    gts: &[T],
    policy: NormalizePolicy,
) -> Result<RecogMetrics, EvalError> {
    if preds.len() != gts.len() {
        return Err(EvalError::Argument(format!("{} predictions for {} ground truths", preds.len(), gts.len())));
    }
    if preds.is_empty() {
        return Ok(RecogMetrics { word_accuracy: 1.0, mean_ned: 0.0, count: 0 });
    }
    let (mut correct, mut ned) = (0usize, 0.0);
    for (p, g) in preds.iter().zip(gts) {
        let (p, g) = (normalize_text(p.as_ref(), policy), normalize_text(g.as_ref(), policy));
        correct += usize::from(p == g);
        let longest = p.chars().count().max(g.chars().count());
        if longest > 0 {
            ned += levenshtein(&p, &g) as f64 / longest as f64;
        }
    }
    let n = preds.len() as f64;
    Ok(RecogMetrics { word_accuracy: correct as f64 / n, mean_ned: ned / n, count: preds.len() })
}
