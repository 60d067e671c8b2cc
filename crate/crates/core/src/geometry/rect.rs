use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use super::hull::convex_hull;
use super::polygon::{Point, Polygon};
use super::GeometryError;

/// Rotated rectangle. `width` runs along the direction given by `angle`.
///
/// Boxes produced by [`min_area_rect`] keep `angle` in `[-pi/4, pi/4)`,
/// which lies inside the general `[-pi/2, pi/2)` range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatedBox {
    pub center: Point,
    pub width: f64,
    pub height: f64,
    pub angle: f64,
}

impl RotatedBox {
    pub fn axes(&self) -> (Point, Point) {
        let (s, c) = self.angle.sin_cos();
        (Point::new(c, s), Point::new(-s, c))
    }

    /// Corners in positive winding, starting at `center - w/2 u - h/2 v`.
    pub fn corners(&self) -> [Point; 4] {
        let (u, v) = self.axes();
        let hu = u * (self.width * 0.5);
        let hv = v * (self.height * 0.5);
        let c = self.center;
        [c - hu - hv, c + hu - hv, c + hu + hv, c - hu + hv]
    }

    pub fn to_polygon(&self) -> Result<Polygon, GeometryError> {
        Polygon::new(self.corners().to_vec())
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }
}

/// Smallest-area enclosing rectangle: convex hull followed by rotating calipers.
pub fn min_area_rect(points: &[Point]) -> Result<RotatedBox, GeometryError> {
    let hull = convex_hull(points)?;
    let h = hull.vertices();
    let n = h.len();
    let next = |j: usize| (j + 1) % n;

    let mut best: Option<(f64, RotatedBox)> = None;
    let (mut top, mut right, mut left) = (0usize, 0usize, 0usize);
    for i in 0..n {
        let a = h[i];
        let edge = h[next(i)] - a;
        let u = edge * (1.0 / edge.norm());
        let v = Point::new(-u.y, u.x);
        let along = |j: usize| (h[j] - a).dot(u);
        let across = |j: usize| (h[j] - a).dot(v);

        if i == 0 {
            top = argmax(n, across);
            right = argmax(n, along);
            left = argmax(n, |j| -along(j));
        } else {
            top = advance(top, n, across);
            right = advance(right, n, along);
            left = advance(left, n, |j| -along(j));
        }

        let max_u = along(right);
        let min_u = along(left);
        let height = across(top);
        let width = max_u - min_u;
        let area = width * height;
        if best.as_ref().is_none_or(|(b, _)| area < *b) {
            let center = a + u * ((max_u + min_u) * 0.5) + v * (height * 0.5);
            let angle = u.y.atan2(u.x);
            best = Some((area, normalize(RotatedBox { center, width, height, angle })));
        }
    }
    Ok(best.expect("hull has at least 3 edges").1)
}

fn argmax(n: usize, f: impl Fn(usize) -> f64) -> usize {
    (0..n).fold(0, |best, j| if f(j) > f(best) { j } else { best })
}

fn advance(mut j: usize, n: usize, f: impl Fn(usize) -> f64) -> usize {
    for _ in 0..n {
        let k = (j + 1) % n;
        if f(k) >= f(j) {
            j = k;
        } else {
            break;
        }
    }
    j
}

fn normalize(mut b: RotatedBox) -> RotatedBox {
    while b.angle >= FRAC_PI_4 {
        b.angle -= FRAC_PI_2;
        std::mem::swap(&mut b.width, &mut b.height);
    }
    while b.angle < -FRAC_PI_4 {
        b.angle += FRAC_PI_2;
        std::mem::swap(&mut b.width, &mut b.height);
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotate(p: Point, t: f64) -> Point {
        let (s, c) = t.sin_cos();
        Point::new(c * p.x - s * p.y, s * p.x + c * p.y)
    }

    #[test]
    fn axis_aligned_rectangle() {
        let pts = [(1.0, 2.0), (7.0, 2.0), (7.0, 5.0), (1.0, 5.0)].map(Point::from);
        let r = min_area_rect(&pts).unwrap();
        assert!(r.angle.abs() < 1e-12);
        assert!((r.width - 6.0).abs() < 1e-9);
        assert!((r.height - 3.0).abs() < 1e-9);
        assert!((r.center.x - 4.0).abs() < 1e-9 && (r.center.y - 3.5).abs() < 1e-9);
    }

    #[test]
    fn rotated_thirty_degrees() {
        let t = 30f64.to_radians();
        let pts = [(0.0, 0.0), (6.0, 0.0), (6.0, 3.0), (0.0, 3.0)].map(|p| rotate(Point::from(p), t));
        let r = min_area_rect(&pts).unwrap();
        assert!((r.angle - t).abs() < 1e-9);
        assert!((r.width - 6.0).abs() < 1e-9);
        assert!((r.height - 3.0).abs() < 1e-9);
    }

    #[test]
    fn corners_round_trip() {
        let b = RotatedBox { center: Point::new(3.0, 4.0), width: 5.0, height: 2.0, angle: 0.3 };
        let poly = b.to_polygon().unwrap();
        assert!((poly.area() - 10.0).abs() < 1e-9);
        let back = min_area_rect(poly.vertices()).unwrap();
        assert!((back.center.x - 3.0).abs() < 1e-6 && (back.center.y - 4.0).abs() < 1e-6);
        assert!((back.width - 5.0).abs() < 1e-6 && (back.height - 2.0).abs() < 1e-6);
        assert!((back.angle - 0.3).abs() < 1e-6);
    }

    #[test]
    fn collinear_input_is_degenerate() {
        let pts = [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)].map(Point::from);
        assert!(matches!(min_area_rect(&pts), Err(GeometryError::Degenerate(_))));
    }

    #[test]
    fn zero_size_box_has_no_polygon() {
        let b = RotatedBox { center: Point::new(0.0, 0.0), width: 0.0, height: 2.0, angle: 0.0 };
        assert!(b.to_polygon().is_err());
    }
}
