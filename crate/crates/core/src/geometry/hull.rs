use super::polygon::{orient, Point, Polygon};
use super::{GeometryError, EPS};

/// Convex hull by Andrew's monotone chain. Collinear boundary points are
/// dropped, so every output vertex is a strict corner.
pub fn convex_hull(points: &[Point]) -> Result<Polygon, GeometryError> {
    if points.iter().any(|p| !p.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| a.approx_eq(*b));
    if pts.len() < 3 {
        return Err(GeometryError::Degenerate("fewer than 3 distinct points"));
    }

    let mut hull: Vec<Point> = Vec::with_capacity(pts.len() * 2);
    for &p in &pts {
        while hull.len() >= 2 && orient(hull[hull.len() - 2], hull[hull.len() - 1], p) <= EPS {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && orient(hull[hull.len() - 2], hull[hull.len() - 1], p) <= EPS {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();

    if hull.len() < 3 {
        return Err(GeometryError::Degenerate("collinear points"));
    }
    Polygon::new(hull).map_err(|_| GeometryError::Degenerate("collinear points"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_point_is_dropped() {
        let pts: Vec<Point> = [(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0), (1.0, 1.0)]
            .iter()
            .map(|&p| p.into())
            .collect();
        let hull = convex_hull(&pts).unwrap();
        assert_eq!(hull.len(), 4);
        assert_eq!(hull.area(), 4.0);
    }

    #[test]
    fn circle_points_all_retained() {
        let pts: Vec<Point> = (0..24)
            .map(|i| {
                let t = i as f64 / 24.0 * std::f64::consts::TAU;
                Point::new(10.0 * t.cos(), 10.0 * t.sin())
            })
            .collect();
        assert_eq!(convex_hull(&pts).unwrap().len(), 24);
    }

    #[test]
    fn collinear_is_degenerate() {
        let pts: Vec<Point> = (0..5).map(|i| Point::new(i as f64, 2.0 * i as f64)).collect();
        assert!(matches!(convex_hull(&pts), Err(GeometryError::Degenerate(_))));
    }
}
