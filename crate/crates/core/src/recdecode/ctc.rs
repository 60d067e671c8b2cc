use std::collections::HashMap;

use super::{argmax, DecodeError, Dictionary, LogitsSeq, Transcription};

/// Best-path decoding: argmax per step, collapse repeats, drop blanks.
///
/// Each emitted symbol is scored by its probability at the first step of
/// its run.
pub fn ctc_greedy_decode(logits: &LogitsSeq, dict: &Dictionary) -> Result<Transcription, DecodeError> {
    logits.check_classes(dict)?;
    let blank = dict.require("blank", dict.specials().blank)?;
    let probs = logits.probabilities();
    let c = logits.classes();
    let mut symbols = Vec::new();
    let mut scores = Vec::new();
    let mut prev = None;
    for t in 0..logits.steps() {
        let row = &probs[t * c..(t + 1) * c];
        let k = argmax(row);
        if k != blank && prev != Some(k) {
            symbols.push(k);
            scores.push(row[k]);
        }
        prev = Some(k);
    }
    Ok(Transcription::from_symbols(dict, symbols, scores))
}

/// One beam-search result.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamHypothesis {
    /// Per-symbol scores come from the best alignment of this label sequence.
    pub transcription: Transcription,
    /// Sum over all alignments (kept by the beam) of this label sequence.
    pub probability: f64,
}

/// Prefix trie: each distinct label prefix is one node.
struct Trie {
    parent: Vec<u32>,
    symbol: Vec<u32>,
    children: HashMap<(u32, u32), u32>,
}

impl Trie {
    const ROOT: u32 = 0;

    fn new() -> Self {
        Self { parent: vec![u32::MAX], symbol: vec![u32::MAX], children: HashMap::new() }
    }

    fn child(&mut self, node: u32, sym: usize) -> u32 {
        let next_id = self.parent.len() as u32;
        let id = *self.children.entry((node, sym as u32)).or_insert(next_id);
        if id == next_id {
            self.parent.push(node);
            self.symbol.push(sym as u32);
        }
        id
    }

    fn last(&self, node: u32) -> Option<usize> {
        (node != Self::ROOT).then(|| self.symbol[node as usize] as usize)
    }

    fn labels(&self, mut node: u32) -> Vec<usize> {
        let mut out = Vec::new();
        while node != Self::ROOT {
            out.push(self.symbol[node as usize] as usize);
            node = self.parent[node as usize];
        }
        out.reverse();
        out
    }
}

#[derive(Clone, Copy)]
struct Beam {
    node: u32,
    blank: f64,
    non_blank: f64,
}

impl Beam {
    fn total(&self) -> f64 {
        self.blank + self.non_blank
    }
}

/// CTC prefix beam search in probability space.
///
/// Each prefix tracks the mass of alignments ending in blank and in a
/// non-blank symbol so that alignments of the same label sequence merge.
/// Beams are ranked by total probability, ties broken by lexicographic
/// label order. Returns at most `beam_width` hypotheses, best first.
pub fn ctc_beam_decode(
    logits: &LogitsSeq,
    dict: &Dictionary,
    beam_width: usize,
) -> Result<Vec<BeamHypothesis>, DecodeError> {
    if beam_width < 1 {
        return Err(DecodeError::Argument("beam_width must be >= 1".into()));
    }
    logits.check_classes(dict)?;
    let blank = dict.require("blank", dict.specials().blank)?;
    let probs = logits.probabilities();
    let c = logits.classes();

    let mut trie = Trie::new();
    let mut beams = vec![Beam { node: Trie::ROOT, blank: 1.0, non_blank: 0.0 }];
    let mut slot: HashMap<u32, usize> = HashMap::new();
    let mut next: Vec<Beam> = Vec::new();

    for t in 0..logits.steps() {
        let row = &probs[t * c..(t + 1) * c];
        slot.clear();
        next.clear();
        let mut add = |next: &mut Vec<Beam>, node: u32, blank_mass: f64, non_blank_mass: f64| {
            let i = *slot.entry(node).or_insert_with(|| {
                next.push(Beam { node, blank: 0.0, non_blank: 0.0 });
                next.len() - 1
            });
            next[i].blank += blank_mass;
            next[i].non_blank += non_blank_mass;
        };
        for beam in &beams {
            let total = beam.total();
            add(&mut next, beam.node, total * row[blank], 0.0);
            let last = trie.last(beam.node);
            for (k, &p) in row.iter().enumerate() {
                if k == blank || p == 0.0 {
                    continue;
                }
                if last == Some(k) {
                    add(&mut next, beam.node, 0.0, beam.non_blank * p);
                    let ext = trie.child(beam.node, k);
                    add(&mut next, ext, 0.0, beam.blank * p);
                } else {
                    let ext = trie.child(beam.node, k);
                    add(&mut next, ext, 0.0, total * p);
                }
            }
        }
        rank(&mut next, &trie);
        next.truncate(beam_width);
        std::mem::swap(&mut beams, &mut next);
    }

    Ok(beams
        .iter()
        .map(|b| {
            let labels = trie.labels(b.node);
            let scores = best_alignment_scores(&probs, c, blank, &labels);
            BeamHypothesis {
                transcription: Transcription::from_symbols(dict, labels, scores),
                probability: b.total(),
            }
        })
        .collect())
}

fn rank(beams: &mut [Beam], trie: &Trie) {
    beams.sort_by(|a, b| {
        b.total().total_cmp(&a.total()).then_with(|| trie.labels(a.node).cmp(&trie.labels(b.node)))
    });
}

/// Viterbi forced alignment of `labels`; returns, per label, its
/// probability at the first step the best alignment emits it.
fn best_alignment_scores(probs: &[f64], c: usize, blank: usize, labels: &[usize]) -> Vec<f64> {
    if labels.is_empty() {
        return Vec::new();
    }
    let steps = probs.len() / c;
    let ext: Vec<usize> =
        std::iter::once(blank).chain(labels.iter().flat_map(|&l| [l, blank])).collect();
    let s = ext.len();
    let ln = |p: f64| if p > 0.0 { p.ln() } else { f64::NEG_INFINITY };
    let mut score = vec![f64::NEG_INFINITY; s];
    let mut back = vec![0u8; steps * s];
    score[0] = ln(probs[ext[0]]);
    score[1] = ln(probs[ext[1]]);
    for t in 1..steps {
        let row = &probs[t * c..(t + 1) * c];
        let mut cur = vec![f64::NEG_INFINITY; s];
        for j in 0..s {
            let mut best = (score[j], 0u8);
            if j >= 1 && score[j - 1] > best.0 {
                best = (score[j - 1], 1);
            }
            if j >= 2 && ext[j] != blank && ext[j] != ext[j - 2] && score[j - 2] > best.0 {
                best = (score[j - 2], 2);
            }
            cur[j] = best.0 + ln(row[ext[j]]);
            back[t * s + j] = best.1;
        }
        score = cur;
    }
    let mut state = if s >= 2 && score[s - 2] > score[s - 1] { s - 2 } else { s - 1 };
    let mut path = vec![0usize; steps];
    for t in (0..steps).rev() {
        path[t] = state;
        if t > 0 {
            state -= back[t * s + state] as usize;
        }
    }
    let mut out = vec![0.0; labels.len()];
    let mut seen = vec![false; labels.len()];
    for (t, &st) in path.iter().enumerate() {
        if st % 2 == 1 {
            let k = st / 2;
            if !seen[k] {
                seen[k] = true;
                out[k] = probs[t * c + ext[st]];
            }
        }
    }
    out
}
