use crate::geometry::{clip_to_bounds, convex_hull, polygon_offset, simplify_closed, Polygon, ScoreMap};

use super::{connected_components, mean_score, sort_and_truncate, Connectivity, DetError, DetParams, Detection};

/// DB post-processing.
///
/// Binarize at `bin_thresh`, label 4-connected components, score each
/// component by its mean probability, drop those under `box_score_thresh`,
/// then unclip the survivors by `d = area * unclip_ratio / perimeter` and
/// clip them to the map bounds.
pub fn db_postprocess(prob: &ScoreMap, params: &DetParams) -> Result<Vec<Detection>, DetError> {
    params.validate()?;
    let binary = prob.binarize(params.bin_thresh);
    let (labels, count) = connected_components(&binary, Connectivity::Four);
    let (h, w) = (prob.height() as f64, prob.width() as f64);

    let mut scored: Vec<(Polygon, f64)> = Vec::new();
    for contour in super::extract_contours(&labels, count).into_iter().flatten() {
        let score = mean_score(prob, &contour);
        if score < params.box_score_thresh {
            continue;
        }
        let distance = contour.area() * params.unclip_ratio / contour.perimeter();
        let Some(expanded) = unclip(&contour, distance) else {
            continue;
        };
        if let Some(clipped) = clip_to_bounds(&expanded, w, h) {
            scored.push((clipped, score));
        }
    }
    sort_and_truncate(&mut scored, params.max_candidates);
    Ok(scored.into_iter().map(|(polygon, score)| Detection { polygon, score }).collect())
}

/// Offsets a pixel contour outward. Staircase contours are simplified first
/// (tolerance 1% of the perimeter); when the simplified ring cannot be
/// offset cleanly its convex hull is used instead.
fn unclip(contour: &Polygon, distance: f64) -> Option<Polygon> {
    if distance <= 0.0 {
        return Some(contour.clone());
    }
    let simplified = simplify_closed(contour.vertices(), 0.01 * contour.perimeter());
    if let Ok(poly) = Polygon::new(simplified) {
        if let Ok(off) = polygon_offset(&poly, distance) {
            return Some(off);
        }
    }
    let hull = convex_hull(contour.vertices()).ok()?;
    polygon_offset(&hull, distance).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::polygon_iou;

    fn scene(h: usize, w: usize, rects: &[(usize, usize, usize, usize)], p: f32) -> ScoreMap {
        ScoreMap::from_fn(h, w, |r, c| {
            if rects.iter().any(|&(x, y, rw, rh)| c >= x && c < x + rw && r >= y && r < y + rh) {
                p
            } else {
                0.0
            }
        })
        .unwrap()
    }

    #[test]
    fn two_rectangles() {
        let rects = [(5, 5, 20, 8), (10, 30, 30, 10)];
        let prob = scene(64, 64, &rects, 0.9);
        let dets = db_postprocess(&prob, &DetParams::default()).unwrap();
        assert_eq!(dets.len(), 2);
        for det in &dets {
            assert!((det.score - 0.9).abs() < 1e-6);
            let matched = rects.iter().any(|&(x, y, w, h)| {
                let (x, y, w, h) = (x as f64, y as f64, w as f64, h as f64);
                let d = w * h * 1.5 / (2.0 * (w + h));
                let want = Polygon::rect(x - d, y - d, w + 2.0 * d, h + 2.0 * d).unwrap();
                polygon_iou(&want, &det.polygon).unwrap() > 0.999
            });
            assert!(matched);
        }
    }

    #[test]
    fn all_zero_map() {
        let prob = ScoreMap::filled(16, 16, 0.0).unwrap();
        assert!(db_postprocess(&prob, &DetParams::default()).unwrap().is_empty());
    }

    #[test]
    fn uniform_map_is_one_clipped_box() {
        let prob = ScoreMap::filled(16, 24, 1.0).unwrap();
        let dets = db_postprocess(&prob, &DetParams::default()).unwrap();
        assert_eq!(dets.len(), 1);
        assert_eq!(dets[0].score, 1.0);
        let (lo, hi) = dets[0].polygon.bounds();
        assert_eq!((lo.x, lo.y, hi.x, hi.y), (0.0, 0.0, 24.0, 16.0));
    }

    #[test]
    fn low_scores_are_dropped_and_candidates_capped() {
        let mut prob = scene(32, 32, &[(1, 1, 4, 4), (10, 10, 4, 4), (20, 20, 4, 4)], 0.9);
        for r in 1..5 {
            for c in 1..5 {
                prob.set(r, c, 0.4);
            }
        }
        let params = DetParams { max_candidates: 1, ..Default::default() };
        let dets = db_postprocess(&prob, &params).unwrap();
        assert_eq!(dets.len(), 1);
        assert!(dets[0].score >= params.box_score_thresh);
        let all = db_postprocess(&prob, &DetParams::default()).unwrap();
        assert_eq!(all.len(), 2);
    }

    #[test]
    fn blob_unclips_to_a_simple_polygon() {
        // A disc-like blob gives a staircase contour.
        let prob = ScoreMap::from_fn(40, 40, |r, c| {
            let (dy, dx) = (r as f64 - 20.0, c as f64 - 20.0);
            if dx * dx + dy * dy < 100.0 { 0.9 } else { 0.0 }
        })
        .unwrap();
        let dets = db_postprocess(&prob, &DetParams::default()).unwrap();
        assert_eq!(dets.len(), 1);
        let area = dets[0].polygon.area();
        assert!(area > std::f64::consts::PI * 100.0, "{area}");
    }
}
