use serde::{Deserialize, Serialize};

use super::{Backend, BackendError, ModelSpec, OutputRole, Outputs, Tensor};
use crate::recdecode::{Dictionary, ScoreConvention};

/// Axis-aligned rectangle in tensor pixel coordinates with a fill probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneRect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub p: f32,
}

impl SceneRect {
    /// Parses `rect(x,y,w,h)` or `rect(x,y,w,h,p=0.9)`.
    pub fn parse(s: &str) -> Result<Self, BackendError> {
        let bad = |why: &str| BackendError::Scene(format!("{s:?}: {why}"));
        let body = s
            .trim()
            .strip_prefix("rect(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| bad("expected rect(x,y,w,h[,p=..])"))?;
        let parts: Vec<&str> = body.split(',').map(str::trim).collect();
        if parts.len() != 4 && parts.len() != 5 {
            return Err(bad("expected 4 coordinates and an optional p"));
        }
        let num = |t: &str| t.parse::<f64>().map_err(|_| bad(&format!("bad number {t:?}")));
        let mut p = 1.0f32;
        if let Some(&extra) = parts.get(4) {
            let v = extra.strip_prefix("p=").ok_or_else(|| bad("fifth field must be p=<prob>"))?;
            p = num(v)? as f32;
        }
        let rect = Self { x: num(parts[0])?, y: num(parts[1])?, w: num(parts[2])?, h: num(parts[3])?, p };
        if !(rect.w > 0.0 && rect.h > 0.0) {
            return Err(bad("width and height must be positive"));
        }
        if !(0.0..=1.0).contains(&rect.p) {
            return Err(bad("p must be in [0,1]"));
        }
        Ok(rect)
    }

    fn shrunk(&self, by: f64) -> Self {
        Self { x: self.x + by, y: self.y + by, w: self.w - 2.0 * by, h: self.h - 2.0 * by, p: self.p }
    }

    /// Pixels whose centers fall inside, as row and column ranges.
    fn pixel_span(&self, height: usize, width: usize) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let span = |lo: f64, len: f64, n: usize| {
            if len <= 0.0 {
                return 0..0;
            }
            let a = (lo - 0.5).ceil().max(0.0) as usize;
            let b = ((lo + len - 0.5).ceil().max(0.0) as usize).min(n);
            a.min(b)..b
        };
        (span(self.y, self.h, height), span(self.x, self.w, width))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextLayout {
    /// Symbol `k` peaks at step `2k`, blank elsewhere.
    #[default]
    Ctc,
    /// Symbol `k` peaks at step `k`, then the end token.
    Attention,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TextScript {
    /// Input width this script answers to; the nearest one is used.
    pub width: usize,
    pub text: String,
}

fn default_kernels() -> usize {
    3
}

fn default_shrink() -> f64 {
    2.0
}

fn default_sim_dim() -> usize {
    4
}

fn default_steps() -> usize {
    16
}

fn default_peak() -> f32 {
    0.9
}

/// Declarative description of what a mock model "sees".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MockScene {
    Detection {
        shapes: Vec<String>,
        #[serde(default = "default_kernels")]
        kernels: usize,
        #[serde(default = "default_shrink")]
        kernel_shrink: f64,
        #[serde(default = "default_sim_dim")]
        similarity_dim: usize,
    },
    Text {
        #[serde(default)]
        layout: TextLayout,
        #[serde(default = "default_steps")]
        steps: usize,
        #[serde(default = "default_peak")]
        peak: f32,
        scripts: Vec<TextScript>,
    },
}

enum Scene {
    Detection { rects: Vec<SceneRect>, kernels: usize, shrink: f64, sim_dim: usize },
    Text { layout: TextLayout, steps: usize, peak: f32, scripts: Vec<(usize, Vec<usize>)>, classes: usize, blank: usize, end: usize },
}

/// Deterministic stand-in for a network: outputs are a pure function of the
/// scene and the input shape.
pub struct MockBackend {
    spec: ModelSpec,
    scene: Scene,
}

impl MockBackend {
    /// Text scenes need the recognizer dictionary to place symbols.
    pub fn new(spec: ModelSpec, scene: &MockScene, dict: Option<&Dictionary>) -> Result<Self, BackendError> {
        let spec = spec.validated()?;
        let scene = match scene {
            MockScene::Detection { shapes, kernels, kernel_shrink, similarity_dim } => {
                if *kernels < 1 || *similarity_dim < 1 || !(*kernel_shrink >= 0.0) {
                    return Err(BackendError::Scene("kernels and similarity_dim must be >= 1, kernel_shrink >= 0".into()));
                }
                let rects = shapes.iter().map(|s| SceneRect::parse(s)).collect::<Result<_, _>>()?;
                Scene::Detection { rects, kernels: *kernels, shrink: *kernel_shrink, sim_dim: *similarity_dim }
            }
            MockScene::Text { layout, steps, peak, scripts } => {
                let dict = dict.ok_or_else(|| BackendError::Scene("text scene needs a dictionary".into()))?;
                let classes = dict.len();
                let sp = dict.specials();
                let (blank, end) = match layout {
                    TextLayout::Ctc => (sp.blank, Some(usize::MAX)),
                    TextLayout::Attention => (Some(usize::MAX), sp.end),
                };
                let missing = |what| BackendError::Scene(format!("dictionary has no {what} token"));
                let blank = blank.ok_or_else(|| missing("blank"))?;
                let end = end.ok_or_else(|| missing("end"))?;
                if scripts.is_empty() {
                    return Err(BackendError::Scene("text scene needs at least one script".into()));
                }
                let other = (1.0 - peak) / (classes as f32 - 1.0);
                if !(*peak <= 1.0 && *peak > other) {
                    return Err(BackendError::Scene(format!("peak {peak} does not dominate {classes} classes")));
                }
                let mut encoded = Vec::with_capacity(scripts.len());
                for s in scripts {
                    let symbols = dict.encode(&s.text).map_err(|e| BackendError::Scene(e.to_string()))?;
                    let need = match layout {
                        TextLayout::Ctc => (2 * symbols.len()).saturating_sub(1),
                        TextLayout::Attention => symbols.len() + 1,
                    };
                    if need > *steps {
                        return Err(BackendError::Scene(format!("{:?} needs {need} steps, scene has {steps}", s.text)));
                    }
                    encoded.push((s.width, symbols));
                }
                Scene::Text { layout: *layout, steps: *steps, peak: *peak, scripts: encoded, classes, blank, end }
            }
        };
        Ok(Self { spec, scene })
    }

    fn detection_outputs(
        &self,
        rects: &[SceneRect],
        kernels: usize,
        shrink: f64,
        sim_dim: usize,
        h: usize,
        w: usize,
    ) -> Outputs {
        let mut out = Outputs::new();
        for o in &self.spec.outputs {
            let tensor = match o.role {
                OutputRole::ProbMap => {
                    let mut data = vec![0.0f32; h * w];
                    for r in rects {
                        let (rows, cols) = r.pixel_span(h, w);
                        for row in rows {
                            data[row * w + cols.start..row * w + cols.end].fill(r.p);
                        }
                    }
                    Tensor::new(vec![1, 1, h, w], data)
                }
                OutputRole::KernelStack => {
                    let mut data = vec![0.0f32; kernels * h * w];
                    for k in 0..kernels {
                        let plane = &mut data[k * h * w..(k + 1) * h * w];
                        for r in rects {
                            let (rows, cols) = r.shrunk(shrink * (kernels - 1 - k) as f64).pixel_span(h, w);
                            for row in rows {
                                plane[row * w + cols.start..row * w + cols.end].fill(1.0);
                            }
                        }
                    }
                    Tensor::new(vec![1, kernels, h, w], data)
                }
                OutputRole::Similarity => {
                    let mut data = vec![0.0f32; sim_dim * h * w];
                    for (i, r) in rects.iter().enumerate() {
                        let (rows, cols) = r.pixel_span(h, w);
                        for row in rows {
                            data[row * w + cols.start..row * w + cols.end].fill(10.0 * (i + 1) as f32);
                        }
                    }
                    Tensor::new(vec![1, sim_dim, h, w], data)
                }
                OutputRole::Logits => Tensor::new(vec![1, 1, 2], vec![0.0, 0.0]),
            };
            out.insert(o.name.clone(), tensor.expect("mock shapes are consistent"));
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn text_outputs(
        &self,
        layout: TextLayout,
        steps: usize,
        peak: f32,
        scripts: &[(usize, Vec<usize>)],
        classes: usize,
        blank: usize,
        end: usize,
        w: usize,
    ) -> Outputs {
        let (_, symbols) = scripts
            .iter()
            .min_by_key(|(sw, _)| sw.abs_diff(w))
            .expect("scene has scripts");
        let other = (1.0 - peak) / (classes as f32 - 1.0);
        let mut probs = vec![other; steps * classes];
        for t in 0..steps {
            let target = match layout {
                TextLayout::Ctc if t % 2 == 0 && t / 2 < symbols.len() => symbols[t / 2],
                TextLayout::Ctc => blank,
                TextLayout::Attention => symbols.get(t).copied().unwrap_or(end),
            };
            probs[t * classes + target] = peak;
        }
        let data = match self.spec.score_convention {
            ScoreConvention::Probabilities => probs,
            ScoreConvention::Logits | ScoreConvention::LogProbabilities => {
                probs.iter().map(|&p| p.max(1e-12).ln()).collect()
            }
        };
        let mut out = Outputs::new();
        for o in &self.spec.outputs {
            if o.role == OutputRole::Logits {
                out.insert(o.name.clone(), Tensor::new(vec![1, steps, classes], data.clone()).expect("consistent"));
            }
        }
        out
    }
}

impl Backend for MockBackend {
    fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    fn forward(&self, input: &Tensor) -> Result<Outputs, BackendError> {
        let &[_, _, h, w] = input.shape() else {
            return Err(BackendError::Shape(format!("expected a [1, C, H, W] input, got {:?}", input.shape())));
        };
        Ok(match &self.scene {
            Scene::Detection { rects, kernels, shrink, sim_dim } => {
                self.detection_outputs(rects, *kernels, *shrink, *sim_dim, h, w)
            }
            Scene::Text { layout, steps, peak, scripts, classes, blank, end } => {
                self.text_outputs(*layout, *steps, *peak, scripts, *classes, *blank, *end, w)
            }
        })
    }
}
