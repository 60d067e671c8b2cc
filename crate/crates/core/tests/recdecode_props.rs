use ocrflow_core::recdecode::{
    attention_decode, ctc_beam_decode, ctc_greedy_decode, Dictionary, LogitsSeq, RowSteps, SpecialTokens,
};
use proptest::prelude::*;

const CHARS: [&str; 5] = ["a", "b", "c", "d", "e"];

fn ctc_dict() -> Dictionary {
    Dictionary::new(CHARS, SpecialTokens::ctc()).unwrap()
}

/// Logits on a 0.01 grid so affine maps cannot merge distinct values.
fn logits(max_steps: usize, classes: usize) -> impl Strategy<Value = (usize, Vec<f32>)> {
    (1..=max_steps).prop_flat_map(move |t| {
        prop::collection::vec((-300i32..300).prop_map(|v| v as f32 / 100.0), t * classes).prop_map(move |d| (t, d))
    })
}

proptest! {
    #[test]
    fn greedy_ignores_monotone_rescaling(
        (t, data) in logits(10, 6),
        scales in prop::collection::vec((0.5..4.0f32, -10.0..10.0f32), 10),
    ) {
        let dict = ctc_dict();
        let base = ctc_greedy_decode(&LogitsSeq::new(t, 6, data.clone()).unwrap(), &dict).unwrap();
        let scaled: Vec<f32> = data
            .chunks(6)
            .zip(&scales)
            .flat_map(|(row, &(a, b))| row.iter().map(move |&x| a * x + b).collect::<Vec<_>>())
            .collect();
        let moved = ctc_greedy_decode(&LogitsSeq::new(t, 6, scaled).unwrap(), &dict).unwrap();
        prop_assert_eq!(base.symbols, moved.symbols);
    }

    #[test]
    fn clean_paths_decode_verbatim(path in prop::collection::vec(1usize..6, 1..12)) {
        let mut clean = path.clone();
        clean.dedup();
        let mut data = vec![0.0f32; clean.len() * 6];
        for (t, &c) in clean.iter().enumerate() {
            data[t * 6 + c] = 8.0;
        }
        let dict = ctc_dict();
        let out = ctc_greedy_decode(&LogitsSeq::new(clean.len(), 6, data).unwrap(), &dict).unwrap();
        prop_assert_eq!(&out.symbols, &clean);
        prop_assert_eq!(out.per_char_scores.len(), out.text.chars().count());
    }

    #[test]
    fn beam_probabilities_descend_and_sum_below_one((t, data) in logits(6, 4), width in 1usize..12) {
        let dict = Dictionary::new(["a", "b", "c"], SpecialTokens::ctc()).unwrap();
        let hyps = ctc_beam_decode(&LogitsSeq::new(t, 4, data).unwrap(), &dict, width).unwrap();
        prop_assert!(!hyps.is_empty() && hyps.len() <= width);
        prop_assert!(hyps.windows(2).all(|w| w[0].probability >= w[1].probability));
        prop_assert!(hyps.iter().map(|h| h.probability).sum::<f64>() <= 1.0 + 1e-9);
    }

    #[test]
    fn attention_never_emits_specials((t, data) in logits(10, 8), max_len in 1usize..12) {
        let specials = SpecialTokens { start: Some(0), end: Some(1), padding: Some(2), ..Default::default() };
        let dict = Dictionary::new(CHARS, specials).unwrap();
        let seq = LogitsSeq::new(t, 8, data).unwrap();
        let out = attention_decode(&mut RowSteps::new(&seq), &dict, max_len.min(t)).unwrap();
        prop_assert!(out.symbols.iter().all(|&s| s > 2));
        prop_assert!(out.symbols.len() <= max_len.min(t));
        prop_assert_eq!(out.per_char_scores.len(), out.symbols.len());
    }
}
