use crate::geometry::{BinaryMap, LabelMap, ScoreMap};

use super::{check_dims, connected_components, score_labels, Connectivity, DetError, DetParams, Detection};

/// Per-pixel embedding vectors, stored pixel-major (`[row][col][dim]`).
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMap {
    height: usize,
    width: usize,
    dim: usize,
    data: Vec<f32>,
}

impl SimilarityMap {
    pub fn new(height: usize, width: usize, dim: usize, data: Vec<f32>) -> Result<Self, DetError> {
        if height == 0 || width == 0 || dim == 0 {
            return Err(DetError::Shape(format!("empty similarity map {height}x{width}x{dim}")));
        }
        if data.len() != height * width * dim {
            return Err(DetError::Shape(format!(
                "similarity map {height}x{width}x{dim} needs {} values, got {}",
                height * width * dim,
                data.len()
            )));
        }
        Ok(Self { height, width, dim, data })
    }

    /// Builds from channel-major data (`[dim][row][col]`), the layout
    /// networks emit.
    pub fn from_channels(height: usize, width: usize, dim: usize, channels: &[f32]) -> Result<Self, DetError> {
        if channels.len() != height * width * dim {
            return Err(DetError::Shape(format!(
                "similarity channels {dim}x{height}x{width} need {} values, got {}",
                height * width * dim,
                channels.len()
            )));
        }
        let plane = height * width;
        let mut data = vec![0.0; channels.len()];
        for k in 0..dim {
            for p in 0..plane {
                data[p * dim + k] = channels[k * plane + p];
            }
        }
        Self::new(height, width, dim, data)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vector(&self, row: usize, col: usize) -> &[f32] {
        let start = (row * self.width + col) * self.dim;
        &self.data[start..start + self.dim]
    }
}

/// Pixel aggregation.
///
/// Kernel pixels keep their 4-connected component label. Every other text
/// pixel joins the kernel whose mean similarity vector is nearest in
/// Euclidean distance (ties to the lower label), provided that distance is
/// below `dist_thresh`. Means are computed once, before any assignment.
pub fn pan_aggregate(
    text: &BinaryMap,
    kernel: &BinaryMap,
    similarity: &SimilarityMap,
    dist_thresh: f32,
) -> Result<LabelMap, DetError> {
    check_dims(text, kernel, "text map vs kernel map")?;
    if similarity.dims() != text.dims() {
        return Err(DetError::Shape(format!(
            "similarity map {:?} vs text map {:?}",
            similarity.dims(),
            text.dims()
        )));
    }
    let (h, w) = text.dims();
    let d = similarity.dim();
    let (mut labels, n) = connected_components(kernel, Connectivity::Four);
    let n = n as usize;

    let mut sums = vec![0.0f64; n * d];
    let mut counts = vec![0usize; n];
    for (idx, &l) in labels.data().iter().enumerate() {
        if l == 0 {
            continue;
        }
        let k = (l - 1) as usize;
        counts[k] += 1;
        let v = similarity.vector(idx / w, idx % w);
        for (s, &x) in sums[k * d..(k + 1) * d].iter_mut().zip(v) {
            *s += f64::from(x);
        }
    }
    let means: Vec<f64> = sums
        .chunks_exact(d.max(1))
        .zip(&counts)
        .flat_map(|(s, &c)| s.iter().map(move |&x| x / c as f64))
        .collect();

    let thresh = f64::from(dist_thresh);
    let labels_data = labels.data_mut();
    for r in 0..h {
        for c in 0..w {
            let idx = r * w + c;
            if labels_data[idx] != 0 || !*text.get(r, c) {
                continue;
            }
            let v = similarity.vector(r, c);
            let mut best = (0usize, f64::INFINITY);
            for k in 0..n {
                let dist = means[k * d..(k + 1) * d]
                    .iter()
                    .zip(v)
                    .map(|(&m, &x)| (f64::from(x) - m).powi(2))
                    .sum::<f64>()
                    .sqrt();
                if dist < best.1 {
                    best = (k + 1, dist);
                }
            }
            if best.0 != 0 && best.1 < thresh {
                labels_data[idx] = best.0 as u32;
            }
        }
    }
    Ok(labels)
}

/// PAN post-processing: aggregation, then contour and mean-probability
/// filtering per instance.
pub fn pan_postprocess(
    text: &BinaryMap,
    kernel: &BinaryMap,
    similarity: &SimilarityMap,
    prob: &ScoreMap,
    params: &DetParams,
) -> Result<Vec<Detection>, DetError> {
    params.validate()?;
    check_dims(text, prob, "text map vs probability map")?;
    let labels = pan_aggregate(text, kernel, similarity, params.pan_dist_thresh)?;
    let count = labels.max_label();
    Ok(score_labels(&labels, count, prob, params)
        .into_iter()
        .map(|(polygon, score)| Detection { polygon, score })
        .collect())
}
