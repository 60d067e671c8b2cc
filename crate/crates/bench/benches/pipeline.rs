use std::path::Path;

use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use ocrflow_core::pipeline::{build_pipeline, synthetic_inputs, PipelineConfig, Registry};

const CONFIG: &str = r#"{
  "version": 1,
  "stages": {
    "detector": {
      "algorithm": "db",
      "model": {"mock": {"scene": {"kind": "detection",
        "shapes": ["rect(16,20,120,24,p=0.9)", "rect(16,70,180,28,p=0.9)", "rect(40,140,90,20,p=0.9)"]}}}
    },
    "recognizer": {
      "decoder": "ctc_beam",
      "beam_width": 5,
      "dict": {"characters": ["a", "b", "c", "d", "e"]},
      "model": {"mock": {"scene": {"kind": "text", "steps": 16,
        "scripts": [{"width": 100, "text": "abc"}, {"width": 160, "text": "dead"}, {"width": 400, "text": "bead"}]}}}
    }
  }
}"#;

fn end_to_end(c: &mut Criterion) {
    let config = PipelineConfig::from_json(CONFIG, Path::new(".")).unwrap();
    let inputs = synthetic_inputs(8, 256, 256, 3);
    let mut group = c.benchmark_group("pipeline");
    group.throughput(Throughput::Elements(inputs.len() as u64));
    for workers in [1usize, 4] {
        let pipeline = build_pipeline(&config, &Registry::default()).unwrap().with_workers(workers);
        group.bench_function(format!("db_ctc_beam_workers_{workers}"), |b| {
            b.iter(|| {
                let results = pipeline.run(&inputs);
                assert!(results.iter().all(|r| r.error.is_none()));
                results
            })
        });
    }
    group.finish();
}

criterion_group!(benches, end_to_end);
criterion_main!(benches);
