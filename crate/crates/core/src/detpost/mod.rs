//! Detector head outputs to instance polygons: the post-processing stages of
//! DB, PSENet and PAN.

mod components;
mod contour;
mod db;
mod pan;
mod pse;

pub use components::{connected_components, Connectivity};
pub use contour::{extract_contour, extract_contours};
pub use db::db_postprocess;
pub use pan::{pan_aggregate, pan_postprocess, SimilarityMap};
pub use pse::{pse_expand, psenet_postprocess, KernelStack};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{for_each_pixel_inside, GeometryError, LabelMap, Polygon, ScoreMap};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("label {0} not present in label map")]
    LabelNotFound(u32),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Thresholds shared by the three detectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetParams {
    pub bin_thresh: f32,
    pub box_score_thresh: f64,
    pub unclip_ratio: f64,
    pub min_kernel_area: usize,
    pub max_candidates: usize,
    pub pan_dist_thresh: f32,
}

impl Default for DetParams {
    fn default() -> Self {
        Self {
            bin_thresh: 0.3,
            box_score_thresh: 0.5,
            unclip_ratio: 1.5,
            min_kernel_area: 4,
            max_candidates: 1000,
            pan_dist_thresh: 3.0,
        }
    }
}

impl DetParams {
    /// Checks ranges. Returns the offending field name with the message.
    pub fn validate(&self) -> Result<(), DetError> {
        let bad = |field: &str, why: &str| Err(DetError::InvalidParams(format!("{field}: {why}")));
        if !(self.bin_thresh > 0.0 && self.bin_thresh < 1.0) {
            return bad("bin_thresh", "must lie in (0, 1)");
        }
        if !(self.box_score_thresh > 0.0 && self.box_score_thresh < 1.0) {
            return bad("box_score_thresh", "must lie in (0, 1)");
        }
        if !(self.unclip_ratio >= 0.0 && self.unclip_ratio.is_finite()) {
            return bad("unclip_ratio", "must be finite and >= 0");
        }
        if self.min_kernel_area < 1 {
            return bad("min_kernel_area", "must be >= 1");
        }
        if self.max_candidates < 1 {
            return bad("max_candidates", "must be >= 1");
        }
        if !(self.pan_dist_thresh >= 0.0 && self.pan_dist_thresh.is_finite()) {
            return bad("pan_dist_thresh", "must be finite and >= 0");
        }
        Ok(())
    }
}

/// One detected text region.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub polygon: Polygon,
    /// Mean probability inside the pre-unclip contour, in `[0, 1]`.
    pub score: f64,
}

/// Mean of `prob` over pixels whose centers fall inside `contour`.
pub(crate) fn mean_score(prob: &ScoreMap, contour: &Polygon) -> f64 {
    let (mut sum, mut n) = (0.0f64, 0usize);
    for_each_pixel_inside(contour, prob.height(), prob.width(), |r, c| {
        sum += f64::from(*prob.get(r, c));
        n += 1;
    });
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).clamp(0.0, 1.0)
    }
}

/// Contour, score and threshold every label; results sorted by descending
/// score (stable in label order) and truncated to `max_candidates`.
pub(crate) fn score_labels(
    labels: &LabelMap,
    count: u32,
    prob: &ScoreMap,
    params: &DetParams,
) -> Vec<(Polygon, f64)> {
    let mut out: Vec<(Polygon, f64)> = extract_contours(labels, count)
        .into_iter()
        .flatten()
        .filter_map(|contour| {
            let score = mean_score(prob, &contour);
            (score >= params.box_score_thresh).then_some((contour, score))
        })
        .collect();
    sort_and_truncate(&mut out, params.max_candidates);
    out
}

pub(crate) fn sort_and_truncate<T>(items: &mut Vec<(T, f64)>, max: usize) {
    items.sort_by(|a, b| b.1.total_cmp(&a.1));
    items.truncate(max);
}

pub(crate) fn check_dims<A, B>(a: &crate::geometry::Grid<A>, b: &crate::geometry::Grid<B>, what: &str) -> Result<(), DetError> {
    if a.same_dims(b) {
        Ok(())
    } else {
        Err(DetError::Shape(format!("{what}: {:?} vs {:?}", a.dims(), b.dims())))
    }
}
