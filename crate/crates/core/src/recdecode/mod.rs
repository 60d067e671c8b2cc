//! Recognizer head outputs to text: CTC greedy and prefix-beam decoding, a
//! generic step-wise attention loop, and evaluation-time text normalization.

mod attention;
mod ctc;
mod dictionary;
mod normalize;

pub use attention::{attention_decode, AttentionStep, RowSteps};
pub use ctc::{ctc_beam_decode, ctc_greedy_decode, BeamHypothesis};
pub use dictionary::{Dictionary, SpecialTokens};
pub use normalize::{normalize_text, NormalizePolicy};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecodeError {
    #[error("dictionary error: {0}")]
    Dictionary(String),
    #[error("dictionary has no {0} token")]
    MissingSpecial(&'static str),
    #[error("class count mismatch: dictionary has {expected} classes, scores have {got}")]
    ClassMismatch { expected: usize, got: usize },
    #[error("symbol {0:?} not in dictionary and no unknown token configured")]
    UnknownSymbol(String),
    #[error("invalid logits: {0}")]
    Logits(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("decode step failed: {0}")]
    Step(String),
}

/// How raw score rows are to be read.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreConvention {
    Probabilities,
    #[default]
    Logits,
    LogProbabilities,
}

/// `T x C` per-timestep class scores, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitsSeq {
    steps: usize,
    classes: usize,
    data: Vec<f32>,
    convention: ScoreConvention,
}

impl LogitsSeq {
    pub fn new(steps: usize, classes: usize, data: Vec<f32>) -> Result<Self, DecodeError> {
        Self::with_convention(steps, classes, data, ScoreConvention::Logits)
    }

    pub fn with_convention(
        steps: usize,
        classes: usize,
        data: Vec<f32>,
        convention: ScoreConvention,
    ) -> Result<Self, DecodeError> {
        if steps < 1 || classes < 2 {
            return Err(DecodeError::Logits(format!("need T >= 1 and C >= 2, got {steps}x{classes}")));
        }
        if data.len() != steps * classes {
            return Err(DecodeError::Logits(format!(
                "{steps}x{classes} scores need {} values, got {}",
                steps * classes,
                data.len()
            )));
        }
        if data.iter().any(|v| v.is_nan()) {
            return Err(DecodeError::Logits("NaN score".into()));
        }
        Ok(Self { steps, classes, data, convention })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn convention(&self) -> ScoreConvention {
        self.convention
    }

    pub fn row(&self, t: usize) -> &[f32] {
        &self.data[t * self.classes..(t + 1) * self.classes]
    }

    /// Row-normalized probabilities as `f64`.
    pub fn probabilities(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.data.len());
        for t in 0..self.steps {
            out.extend(row_probabilities(self.row(t), self.convention));
        }
        out
    }

    pub(crate) fn check_classes(&self, dict: &Dictionary) -> Result<(), DecodeError> {
        if self.classes != dict.len() {
            return Err(DecodeError::ClassMismatch { expected: dict.len(), got: self.classes });
        }
        Ok(())
    }
}

pub(crate) fn row_probabilities(row: &[f32], convention: ScoreConvention) -> Vec<f64> {
    match convention {
        ScoreConvention::Probabilities => {
            let sum: f64 = row.iter().map(|&v| f64::from(v).max(0.0)).sum();
            if sum > 0.0 {
                row.iter().map(|&v| f64::from(v).max(0.0) / sum).collect()
            } else {
                vec![1.0 / row.len() as f64; row.len()]
            }
        }
        ScoreConvention::Logits | ScoreConvention::LogProbabilities => {
            let max = row.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(f64::from(v)));
            let exps: Vec<f64> = row.iter().map(|&v| (f64::from(v) - max).exp()).collect();
            let sum: f64 = exps.iter().sum();
            exps.into_iter().map(|e| e / sum).collect()
        }
    }
}

/// Lowest index among the maxima.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Decoded text with confidences.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcription {
    pub text: String,
    /// Class index per emitted symbol.
    pub symbols: Vec<usize>,
    /// Geometric mean of `per_char_scores`; 1 for empty text.
    pub score: f64,
    pub per_char_scores: Vec<f64>,
}

impl Transcription {
    pub(crate) fn from_symbols(dict: &Dictionary, symbols: Vec<usize>, per_char_scores: Vec<f64>) -> Self {
        debug_assert_eq!(symbols.len(), per_char_scores.len());
        let score = geometric_mean(&per_char_scores);
        Self { text: dict.decode(&symbols), symbols, score, per_char_scores }
    }

    pub fn empty() -> Self {
        Self { text: String::new(), symbols: Vec::new(), score: 1.0, per_char_scores: Vec::new() }
    }
}

pub(crate) fn geometric_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 1.0;
    }
    let log_sum: f64 = values.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).sum();
    (log_sum / values.len() as f64).exp().clamp(0.0, 1.0)
}
