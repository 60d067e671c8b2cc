use ocrflow_core::geometry::{
    min_area_rect, polygon_intersection_area, polygon_iou, polygon_offset, Point, Polygon,
};
use proptest::prelude::*;

fn convex_polygon() -> impl Strategy<Value = Polygon> {
    (
        (10.0..90.0f64, 10.0..90.0f64),
        (2.0..30.0f64, 2.0..30.0f64),
        0.0..std::f64::consts::PI,
        prop::collection::vec(0.0..std::f64::consts::TAU, 3..8),
    )
        .prop_filter_map("distinct angles", |((cx, cy), (rx, ry), phi, mut angles)| {
            angles.sort_by(f64::total_cmp);
            let spread = angles.windows(2).all(|w| w[1] - w[0] > 0.2)
                && angles[0] + std::f64::consts::TAU - angles[angles.len() - 1] > 0.2;
            if !spread {
                return None;
            }
            let pts = angles
                .iter()
                .map(|&a| {
                    let (x, y) = (rx * a.cos(), ry * a.sin());
                    Point::new(cx + x * phi.cos() - y * phi.sin(), cy + x * phi.sin() + y * phi.cos())
                })
                .collect();
            Polygon::new(pts).ok()
        })
}

fn point_cloud() -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec((-50.0..50.0f64, -50.0..50.0f64), 3..25)
        .prop_map(|v| v.into_iter().map(|(x, y)| Point::new(x, y)).collect())
}

proptest! {
    #[test]
    fn iou_is_symmetric(a in convex_polygon(), b in convex_polygon()) {
        let (ab, ba) = (polygon_iou(&a, &b).unwrap(), polygon_iou(&b, &a).unwrap());
        prop_assert!((ab - ba).abs() <= 1e-9, "{ab} vs {ba}");
    }

    #[test]
    fn self_iou_is_one(a in convex_polygon()) {
        prop_assert!((polygon_iou(&a, &a).unwrap() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn intersection_bounded_by_smaller_area(a in convex_polygon(), b in convex_polygon()) {
        let inter = polygon_intersection_area(&a, &b);
        prop_assert!(inter >= -1e-9);
        prop_assert!(inter <= a.area().min(b.area()) + 1e-6);
    }

    #[test]
    fn area_ignores_starting_vertex(a in convex_polygon(), shift in 0usize..8) {
        let mut v = a.vertices().to_vec();
        let k = shift % v.len();
        v.rotate_left(k);
        let b = Polygon::new(v).unwrap();
        prop_assert!(b.area() > 0.0);
        prop_assert!((a.area() - b.area()).abs() <= 1e-9 * a.area());
    }

    #[test]
    fn min_rect_area_survives_rotation(points in point_cloud(), theta in 0.0..std::f64::consts::TAU, dx in -20.0..20.0f64) {
        let base = match min_area_rect(&points) {
            Ok(r) => r.area(),
            Err(_) => return Ok(()),
        };
        prop_assume!(base > 1e-3);
        let (c, s) = (theta.cos(), theta.sin());
        let moved: Vec<Point> = points.iter().map(|p| Point::new(p.x * c - p.y * s + dx, p.x * s + p.y * c - dx)).collect();
        let area = min_area_rect(&moved).unwrap().area();
        prop_assert!((area - base).abs() <= 1e-6 * base, "{base} vs {area}");
    }

    #[test]
    fn min_rect_contains_points(points in point_cloud()) {
        let Ok(r) = min_area_rect(&points) else { return Ok(()) };
        let (u, v) = r.axes();
        for p in &points {
            let d = *p - r.center;
            prop_assert!(d.dot(u).abs() <= r.width / 2.0 + 1e-6);
            prop_assert!(d.dot(v).abs() <= r.height / 2.0 + 1e-6);
        }
    }

    #[test]
    fn square_offset_grows_by_perimeter_and_miter_corners(side in 1.0..100.0f64, d in 0.01..20.0f64) {
        let sq = Polygon::rect(0.0, 0.0, side, side).unwrap();
        let grown = polygon_offset(&sq, d).unwrap();
        let want = side * side + 4.0 * side * d + 4.0 * d * d;
        prop_assert!((grown.area() - want).abs() <= 1e-9 * want);
        let c = (grown.area() - sq.area() - sq.perimeter() * d) / (d * d);
        prop_assert!(c >= std::f64::consts::PI);
    }
}
