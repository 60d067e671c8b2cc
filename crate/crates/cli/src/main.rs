use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ocrflow_core::eval::{evaluate_dataset, read_annotations, read_predictions, render_report, ReportRow};
use ocrflow_core::pipeline::{
    bench, build_pipeline, collect_inputs, load_config, load_dataset, load_image, persist, render_overlay,
    synthetic_inputs, DatasetFormat, InputImage, PipelineConfig, Registry,
};

#[derive(Parser)]
#[command(name = "ocrflow", version, about = "Config-driven OCR inference and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Pipeline config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Glob of input images; overrides io.input.
    #[arg(long)]
    input: Option<String>,
    /// Results file (JSON Lines); overrides io.output. Stdout when unset.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Overrides runtime.workers.
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides runtime.seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OverlayKind {
    Svg,
    Png,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    IcdarTxt,
}

#[derive(Subcommand)]
enum Command {
    /// Text detection only.
    Detect(Common),
    /// Recognition only; each input is one text line.
    Recognize(Common),
    /// Every configured stage.
    E2e(Common),
    /// Scores predictions against ground truth and prints a metrics table.
    Eval {
        /// Ground truth: unified JSON Lines, an ICDAR .txt file or a directory of them.
        #[arg(long)]
        gt: PathBuf,
        /// Predictions (JSON Lines results).
        #[arg(long)]
        pred: PathBuf,
        /// Supplies eval.iou_thresh and eval.normalize.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        iou: Option<f64>,
        /// Also require matching transcriptions.
        #[arg(long)]
        e2e: bool,
        /// Adds a leading method column.
        #[arg(long)]
        label: Option<String>,
    },
    /// Per-stage timing statistics.
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        /// Number of seeded noise images when no input is given.
        #[arg(long, default_value_t = 8)]
        synthetic: usize,
        /// Synthetic image side length.
        #[arg(long, default_value_t = 256)]
        size: usize,
        #[arg(long)]
        json: bool,
    },
    /// Converts a dataset to unified JSON Lines annotations.
    Convert {
        #[arg(long, value_enum, default_value = "icdar-txt")]
        format: Format,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Runs the pipeline and draws results over each input into a directory.
    Overlay {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "svg")]
        format: OverlayKind,
    },
}

#[derive(Clone, Copy)]
enum Stages {
    Detect,
    Recognize,
    All,
}

fn prepare(common: &Common, stages: Stages) -> Result<PipelineConfig> {
    let mut config = load_config(&common.config)?;
    match stages {
        Stages::Detect => {
            if config.stages.detector.is_none() {
                bail!("stages.detector: detect needs a detector stage");
            }
            config.stages.recognizer = None;
            config.stages.kie = None;
        }
        Stages::Recognize => {
            if config.stages.recognizer.is_none() {
                bail!("stages.recognizer: recognize needs a recognizer stage");
            }
            config.stages.detector = None;
            config.stages.kie = None;
        }
        Stages::All => {}
    }
    if let Some(w) = common.workers {
        config.runtime.workers = w;
    }
    if let Some(s) = common.seed {
        config.runtime.seed = s;
    }
    config.validate()?;
    Ok(config)
}

fn inputs(common: &Common, config: &PipelineConfig) -> Result<Vec<InputImage>> {
    let pattern = match (&common.input, &config.io.input) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => config.resolve(Path::new(p)).display().to_string(),
        (None, None) => bail!("io.input: no input given (use --input or io.input)"),
    };
    Ok(collect_inputs(&pattern)?)
}

fn report_failures(results: &[ocrflow_core::DocumentResult]) -> u8 {
    let failed: Vec<_> = results.iter().filter(|r| r.error.is_some()).collect();
    for r in &failed {
        eprintln!("error: {}: {}", r.image, r.error.as_deref().unwrap_or_default());
    }
    eprintln!("{} images, {} failed", results.len(), failed.len());
    u8::from(!failed.is_empty())
}

fn run_stages(common: &Common, stages: Stages) -> Result<u8> {
    let config = prepare(common, stages)?;
    let pipeline = build_pipeline(&config, &Registry::default())?;
    let inputs = inputs(common, &config)?;
    let results = pipeline.run(&inputs);
    let output = common.output.clone().or_else(|| config.io.output.as_ref().map(|p| config.resolve(p)));
    persist(&results, &inputs, &config, output.as_deref())?;
    Ok(report_failures(&results))
}

fn run_overlay(common: &Common, format: OverlayKind) -> Result<u8> {
    let config = prepare(common, Stages::All)?;
    let dir = common.output.clone().context("--output: overlay needs an output directory")?;
    let pipeline = build_pipeline(&config, &Registry::default())?;
    let inputs = inputs(common, &config)?;
    let results = pipeline.run(&inputs);
    std::fs::create_dir_all(&dir).with_context(|| dir.display().to_string())?;
    let class_names = config.stages.kie.as_ref().map(|k| k.class_names.clone()).unwrap_or_default();
    let ext = match format {
        OverlayKind::Svg => "svg",
        OverlayKind::Png => "png",
    };
    for (r, input) in results.iter().zip(&inputs) {
        if r.error.is_some() {
            continue;
        }
        let InputImage::File(path) = input else { continue };
        let image = load_image(path).map_err(anyhow::Error::msg)?;
        render_overlay(&image, r, &class_names, &dir.join(format!("{}.{ext}", r.image)))?;
    }
    Ok(report_failures(&results))
}

fn run_eval(
    gt: &Path,
    pred: &Path,
    config: Option<&Path>,
    iou: Option<f64>,
    e2e: bool,
    label: Option<String>,
) -> Result<u8> {
    let eval_cfg = match config {
        Some(p) => load_config(p)?.eval,
        None => Default::default(),
    };
    let iou = iou.unwrap_or(eval_cfg.iou_thresh);
    if !(iou > 0.0 && iou <= 1.0) {
        bail!("--iou: must be in (0, 1]");
    }
    let gts = if gt.extension().is_some_and(|e| e == "jsonl") {
        read_annotations(gt)?
    } else {
        load_dataset(DatasetFormat::IcdarTxt, gt)?
    };
    let preds = read_predictions(pred)?;
    let metrics = evaluate_dataset(&preds, &gts, iou, e2e.then_some(eval_cfg.normalize))?;
    let row = ReportRow::new(label.as_deref(), &metrics);
    print!("{}", render_report(&[row])?);
    let failed: Vec<_> = preds.iter().filter(|p| p.error.is_some()).collect();
    for p in &failed {
        eprintln!("error: {}: {}", p.image, p.error.as_deref().unwrap_or_default());
    }
    Ok(u8::from(!failed.is_empty()))
}

fn run_bench(common: &Common, repeats: usize, synthetic: usize, size: usize, json: bool) -> Result<u8> {
    let config = prepare(common, Stages::All)?;
    let pipeline = build_pipeline(&config, &Registry::default())?;
    let inputs = if common.input.is_some() || config.io.input.is_some() {
        inputs(common, &config)?
    } else {
        synthetic_inputs(synthetic, size, size, config.runtime.seed)
    };
    let report = bench(&pipeline, &inputs, repeats)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("stage | median ms | p90 ms");
        for (stage, s) in &report.stages {
            println!("{stage} | {:.3} | {:.3}", s.median_ms, s.p90_ms);
        }
        println!("images/sec: {:.2}", report.images_per_sec);
    }
    Ok(u8::from(report.failures > 0))
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Detect(c) => run_stages(&c, Stages::Detect),
        Command::Recognize(c) => run_stages(&c, Stages::Recognize),
        Command::E2e(c) => run_stages(&c, Stages::All),
        Command::Eval { gt, pred, config, iou, e2e, label } => run_eval(&gt, &pred, config.as_deref(), iou, e2e, label),
        Command::Bench { common, repeats, synthetic, size, json } => run_bench(&common, repeats, synthetic, size, json),
        Command::Convert { format, input, output } => {
            let format = match format {
                Format::IcdarTxt => DatasetFormat::IcdarTxt,
            };
            let records = ocrflow_core::pipeline::convert_dataset(format, &input, &output)?;
            eprintln!("wrote {} records to {}", records.len(), output.display());
            Ok(0)
        }
        Command::Overlay { common, format } => run_overlay(&common, format),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
