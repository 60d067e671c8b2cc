//! Seeded inputs shared by the benchmarks.

use ocrflow_core::detpost::KernelStack;
use ocrflow_core::geometry::{BinaryMap, ScoreMap};
use ocrflow_core::recdecode::LogitsSeq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Probability map with `lines` axis-aligned text bars on a noisy background.
pub fn text_scene(height: usize, width: usize, lines: usize, seed: u64) -> ScoreMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data: Vec<f32> = (0..height * width).map(|_| rng.random_range(0.0..0.2)).collect();
    for _ in 0..lines {
        let h = rng.random_range(6..height.max(7) / 4 + 7).min(height);
        let w = rng.random_range(8..width.max(9) / 2 + 9).min(width);
        let (y0, x0) = (rng.random_range(0..=height - h), rng.random_range(0..=width - w));
        for r in y0..y0 + h {
            for c in x0..x0 + w {
                data[r * width + c] = rng.random_range(0.7..1.0);
            }
        }
    }
    ScoreMap::new(height, width, data).expect("sized to fit")
}

/// Nested kernels obtained by thresholding `scene` at rising levels.
pub fn kernel_stack(scene: &ScoreMap, levels: &[f32]) -> KernelStack {
    let mut kernels: Vec<BinaryMap> = levels.iter().map(|&t| scene.binarize(t)).collect();
    kernels.reverse();
    KernelStack::new(kernels).expect("thresholds nest")
}

/// Logits with one dominant class per step.
pub fn peaked_logits(steps: usize, classes: usize, seed: u64) -> LogitsSeq {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(steps * classes);
    for _ in 0..steps {
        let peak = rng.random_range(0..classes);
        data.extend((0..classes).map(|c| if c == peak { 4.0 } else { rng.random_range(-1.0..1.0) }));
    }
    LogitsSeq::new(steps, classes, data).expect("sized to fit")
}
