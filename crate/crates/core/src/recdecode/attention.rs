use super::{row_probabilities, DecodeError, Dictionary, LogitsSeq, ScoreConvention, Transcription};

/// One step of an autoregressive decoder.
///
/// Implementations must not share mutable state across decode calls.
pub trait AttentionStep {
    type State;

    fn init(&mut self) -> Result<Self::State, DecodeError>;

    /// Consumes the previous symbol and returns the next state together with
    /// raw class scores for the next symbol.
    fn step(&mut self, state: Self::State, prev_symbol: usize) -> Result<(Self::State, Vec<f32>), DecodeError>;

    fn convention(&self) -> ScoreConvention {
        ScoreConvention::Logits
    }
}

/// Greedy attention decoding from the start token until the end token or
/// `max_len` symbols. Start, padding and blank classes are never emitted.
pub fn attention_decode<S: AttentionStep>(
    step: &mut S,
    dict: &Dictionary,
    max_len: usize,
) -> Result<Transcription, DecodeError> {
    let sp = *dict.specials();
    let start = dict.require("start", sp.start)?;
    let end = dict.require("end", sp.end)?;
    if max_len < 1 {
        return Err(DecodeError::Argument("max_len must be >= 1".into()));
    }
    let banned = [Some(start), sp.padding, sp.blank];
    let convention = step.convention();

    let mut state = step.init()?;
    let mut prev = start;
    let mut symbols = Vec::new();
    let mut scores = Vec::new();
    while symbols.len() < max_len {
        let (next, raw) = step.step(state, prev)?;
        state = next;
        if raw.len() != dict.len() {
            return Err(DecodeError::ClassMismatch { expected: dict.len(), got: raw.len() });
        }
        let probs = row_probabilities(&raw, convention);
        let mut best: Option<usize> = None;
        for (k, &p) in probs.iter().enumerate() {
            if banned.contains(&Some(k)) {
                continue;
            }
            if best.is_none_or(|b| p > probs[b]) {
                best = Some(k);
            }
        }
        let k = best.ok_or_else(|| DecodeError::Step("no emittable class".into()))?;
        if k == end {
            break;
        }
        symbols.push(k);
        scores.push(probs[k]);
        prev = k;
    }
    Ok(Transcription::from_symbols(dict, symbols, scores))
}

/// Replays precomputed score rows, one per step, ignoring the previous
/// symbol. This is how exported attention models that decode internally
/// are driven.
pub struct RowSteps<'a> {
    logits: &'a LogitsSeq,
}

impl<'a> RowSteps<'a> {
    pub fn new(logits: &'a LogitsSeq) -> Self {
        Self { logits }
    }
}

impl AttentionStep for RowSteps<'_> {
    type State = usize;

    fn init(&mut self) -> Result<usize, DecodeError> {
        Ok(0)
    }

    fn step(&mut self, t: usize, _prev: usize) -> Result<(usize, Vec<f32>), DecodeError> {
        if t >= self.logits.steps() {
            return Err(DecodeError::Step(format!("no score row for step {t}")));
        }
        Ok((t + 1, self.logits.row(t).to_vec()))
    }

    fn convention(&self) -> ScoreConvention {
        self.logits.convention()
    }
}

#[cfg(test)]
mod tests {
    use super::super::SpecialTokens;
    use super::*;

    /// Emits a fixed script, then END forever.
    struct Script {
        dict: Dictionary,
        script: Vec<&'static str>,
    }

    impl AttentionStep for Script {
        type State = usize;
        fn init(&mut self) -> Result<usize, DecodeError> {
            Ok(0)
        }
        fn step(&mut self, i: usize, _prev: usize) -> Result<(usize, Vec<f32>), DecodeError> {
            let mut row = vec![0.0; self.dict.len()];
            let target = match self.script.get(i) {
                Some(s) => self.dict.index_of(s).unwrap(),
                None => self.dict.specials().end.unwrap(),
            };
            row[target] = 10.0;
            Ok((i + 1, row))
        }
    }

    fn dict() -> Dictionary {
        let sp = SpecialTokens { start: Some(0), end: Some(1), padding: Some(2), ..Default::default() };
        Dictionary::new(["h", "i"], sp).unwrap()
    }

    #[test]
    fn scripted_hi() {
        let mut s = Script { dict: dict(), script: vec!["h", "i"] };
        assert_eq!(attention_decode(&mut s, &dict(), 25).unwrap().text, "hi");
    }

    #[test]
    fn cutoff_at_max_len() {
        let mut s = Script { dict: dict(), script: vec!["h"; 100] };
        let out = attention_decode(&mut s, &dict(), 7).unwrap();
        assert_eq!(out.symbols.len(), 7);
    }

    #[test]
    fn end_first_is_empty() {
        let mut s = Script { dict: dict(), script: vec![] };
        assert_eq!(attention_decode(&mut s, &dict(), 5).unwrap().text, "");
    }

    #[test]
    fn never_emits_start_or_padding() {
        let d = dict();
        // Row maxima on start and padding; the runner-up is "i".
        let rows = vec![9.0, 0.0, 8.0, 0.0, 1.0];
        let l = LogitsSeq::new(1, 5, rows).unwrap();
        let out = attention_decode(&mut RowSteps::new(&l), &d, 1).unwrap();
        assert_eq!(out.text, "i");
    }

    #[test]
    fn step_fault_propagates() {
        let l = LogitsSeq::new(1, 5, vec![0.0, 0.0, 0.0, 9.0, 0.0]).unwrap();
        let err = attention_decode(&mut RowSteps::new(&l), &dict(), 3).unwrap_err();
        assert!(matches!(err, DecodeError::Step(_)));
    }

    #[test]
    fn missing_specials() {
        let d = Dictionary::new(["a"], SpecialTokens::ctc()).unwrap();
        let l = LogitsSeq::new(1, 2, vec![0.0, 0.0]).unwrap();
        assert_eq!(attention_decode(&mut RowSteps::new(&l), &d, 1).unwrap_err(), DecodeError::MissingSpecial("start"));
    }
}
