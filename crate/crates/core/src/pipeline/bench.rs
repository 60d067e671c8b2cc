use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{InputImage, Pipeline, PipelineError};
use crate::backend::RasterImage;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageStats {
    pub samples: usize,
    pub median_ms: f64,
    pub p90_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub images: usize,
    pub repeats: usize,
    /// Keyed by stage name (`load`, `detect`, `recognize`, `kie`) plus `total`
    /// for whole-batch wall time.
    pub stages: BTreeMap<String, StageStats>,
    pub images_per_sec: f64,
    pub failures: usize,
}

/// Nearest-rank percentile of sorted samples.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

fn stats(mut samples: Vec<f64>) -> StageStats {
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    let median = if n % 2 == 1 { samples[n / 2] } else { (samples[n / 2 - 1] + samples[n / 2]) / 2.0 };
    StageStats { samples: n, median_ms: median, p90_ms: percentile(&samples, 0.9) }
}

/// Runs the batch once to warm up, then `repeats` timed times.
pub fn bench(pipeline: &Pipeline, inputs: &[InputImage], repeats: usize) -> Result<BenchReport, PipelineError> {
    if repeats < 1 {
        return Err(PipelineError::Config { key: "repeats".into(), message: "must be >= 1".into() });
    }
    pipeline.run(inputs);
    let mut per_stage: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut totals = Vec::with_capacity(repeats);
    let mut failures = 0;
    for _ in 0..repeats {
        let t = Instant::now();
        let results = pipeline.run(inputs);
        totals.push(t.elapsed().as_secs_f64() * 1e3);
        for r in &results {
            failures += r.error.is_some() as usize;
            for (stage, ms) in &r.timings_ms {
                per_stage.entry(stage.clone()).or_default().push(*ms);
            }
        }
    }
    let total_s: f64 = totals.iter().sum::<f64>() / 1e3;
    let images_per_sec = if total_s > 0.0 { (inputs.len() * repeats) as f64 / total_s } else { 0.0 };
    let mut stages: BTreeMap<String, StageStats> = per_stage.into_iter().map(|(k, v)| (k, stats(v))).collect();
    stages.insert("total".into(), stats(totals));
    Ok(BenchReport { images: inputs.len(), repeats, stages, images_per_sec, failures })
}

/// Seeded noise images for benchmarking without an input set.
pub fn synthetic_inputs(count: usize, height: usize, width: usize, seed: u64) -> Vec<InputImage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let data = (0..height * width * 3).map(|_| rng.random::<u8>()).collect();
            let image = RasterImage::new(height, width, 3, data).expect("sizes match");
            InputImage::Memory { id: format!("synthetic_{i:04}"), image }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentiles() {
        let s = stats(vec![5.0, 1.0, 3.0, 2.0, 4.0, 6.0, 7.0, 8.0, 9.0, 10.0]);
        assert_eq!(s.median_ms, 5.5);
        assert_eq!(s.p90_ms, 9.0);
        let one = stats(vec![2.5]);
        assert_eq!((one.samples, one.median_ms, one.p90_ms), (1, 2.5, 2.5));
    }

    #[test]
    fn synthetic_is_seeded() {
        let a = synthetic_inputs(2, 4, 5, 7);
        let b = synthetic_inputs(2, 4, 5, 7);
        let c = synthetic_inputs(2, 4, 5, 8);
        let img = |v: &[InputImage], i: usize| match &v[i] {
            InputImage::Memory { image, .. } => image.clone(),
            InputImage::File(_) => unreachable!(),
        };
        assert_eq!(img(&a, 1), img(&b, 1));
        assert_ne!(img(&a, 0), img(&c, 0));
    }
}
