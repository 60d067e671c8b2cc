use super::polygon::{orient, signed_area, Point, Polygon};
use super::{GeometryError, EPS};

/// Clips a convex subject ring against a convex, positive-winding clip ring.
fn clip_convex(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let mut output = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % n];
        let input = std::mem::take(&mut output);
        let m = input.len();
        for j in 0..m {
            let cur = input[j];
            let prev = input[(j + m - 1) % m];
            let cur_in = orient(a, b, cur) >= 0.0;
            let prev_in = orient(a, b, prev) >= 0.0;
            if cur_in {
                if !prev_in {
                    output.push(line_intersection(prev, cur, a, b));
                }
                output.push(cur);
            } else if prev_in {
                output.push(line_intersection(prev, cur, a, b));
            }
        }
    }
    output
}

fn line_intersection(p: Point, q: Point, a: Point, b: Point) -> Point {
    let r = q - p;
    let s = b - a;
    let denom = r.cross(s);
    if denom.abs() < f64::MIN_POSITIVE {
        return q;
    }
    let t = (a - p).cross(s) / denom;
    p + r * t
}

fn convex_intersection_area(a: &[Point], b: &[Point]) -> f64 {
    let clipped = clip_convex(a, b);
    if clipped.len() < 3 {
        return 0.0;
    }
    signed_area(&clipped).max(0.0)
}

/// Ear-clipping triangulation of a positive-winding polygon.
///
/// Collinear vertices are dropped without emitting a triangle. Weakly simple
/// rings (touching at a vertex) are handled by falling back to the most
/// convex remaining corner when no clean ear exists.
pub fn triangulate(p: &Polygon) -> Vec<[Point; 3]> {
    let mut ring: Vec<Point> = p.vertices().to_vec();
    let mut triangles = Vec::with_capacity(ring.len().saturating_sub(2));
    while ring.len() > 3 {
        let n = ring.len();
        let mut ear = None;
        let mut fallback = (0usize, f64::NEG_INFINITY);
        for i in 0..n {
            let a = ring[(i + n - 1) % n];
            let b = ring[i];
            let c = ring[(i + 1) % n];
            let turn = orient(a, b, c);
            if turn.abs() <= EPS * EPS {
                ear = Some((i, false));
                break;
            }
            if turn > fallback.1 {
                fallback = (i, turn);
            }
            if turn <= 0.0 {
                continue;
            }
            let blocked = ring.iter().enumerate().any(|(j, &q)| {
                j != i
                    && j != (i + n - 1) % n
                    && j != (i + 1) % n
                    && !q.approx_eq(a)
                    && !q.approx_eq(b)
                    && !q.approx_eq(c)
                    && in_triangle(a, b, c, q)
            });
            if !blocked {
                ear = Some((i, true));
                break;
            }
        }
        let (i, emit) = ear.unwrap_or((fallback.0, fallback.1 > 0.0));
        let n = ring.len();
        if emit {
            triangles.push([ring[(i + n - 1) % n], ring[i], ring[(i + 1) % n]]);
        }
        ring.remove(i);
    }
    if ring.len() == 3 && signed_area(&ring) > 0.0 {
        triangles.push([ring[0], ring[1], ring[2]]);
    }
    triangles
}

fn in_triangle(a: Point, b: Point, c: Point, q: Point) -> bool {
    orient(a, b, q) >= 0.0 && orient(b, c, q) >= 0.0 && orient(c, a, q) >= 0.0
}

fn convex_pieces(p: &Polygon) -> Vec<Vec<Point>> {
    if p.is_convex() {
        vec![p.vertices().to_vec()]
    } else {
        triangulate(p).into_iter().map(|t| t.to_vec()).collect()
    }
}

fn ring_bounds(ring: &[Point]) -> (Point, Point) {
    ring.iter().fold(
        (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
        |(lo, hi), p| (Point::new(lo.x.min(p.x), lo.y.min(p.y)), Point::new(hi.x.max(p.x), hi.y.max(p.y))),
    )
}

/// Exact intersection area of two polygons.
///
/// Convex pairs are clipped directly with Sutherland-Hodgman; non-convex
/// inputs are decomposed into triangles and the pairwise pieces summed.
pub fn polygon_intersection_area(a: &Polygon, b: &Polygon) -> f64 {
    let (alo, ahi) = a.bounds();
    let (blo, bhi) = b.bounds();
    if ahi.x <= blo.x || bhi.x <= alo.x || ahi.y <= blo.y || bhi.y <= alo.y {
        return 0.0;
    }
    let pa = convex_pieces(a);
    let pb = convex_pieces(b);
    let bb: Vec<_> = pb.iter().map(|r| ring_bounds(r)).collect();
    let mut total = 0.0;
    for ra in &pa {
        let (lo, hi) = ring_bounds(ra);
        for (rb, (blo, bhi)) in pb.iter().zip(&bb) {
            if hi.x <= blo.x || bhi.x <= lo.x || hi.y <= blo.y || bhi.y <= lo.y {
                continue;
            }
            total += convex_intersection_area(ra, rb);
        }
    }
    total.clamp(0.0, a.area().min(b.area()))
}

/// Clips `p` to the image rectangle `[0, width] x [0, height]`.
///
/// Returns `None` when nothing with positive area remains.
pub fn clip_to_bounds(p: &Polygon, width: f64, height: f64) -> Option<Polygon> {
    let (lo, hi) = p.bounds();
    if lo.x >= 0.0 && lo.y >= 0.0 && hi.x <= width && hi.y <= height {
        return Some(p.clone());
    }
    let mut ring = p.vertices().to_vec();
    for (axis_x, bound, keep_below) in [(true, 0.0, false), (true, width, true), (false, 0.0, false), (false, height, true)] {
        ring = clip_axis(&ring, axis_x, bound, keep_below);
        if ring.is_empty() {
            return None;
        }
    }
    Polygon::new(ring).ok()
}

/// One Sutherland-Hodgman pass against an axis-aligned half-plane. Crossing
/// points land exactly on the bound.
fn clip_axis(ring: &[Point], axis_x: bool, bound: f64, keep_below: bool) -> Vec<Point> {
    let coord = |p: Point| if axis_x { p.x } else { p.y };
    let inside = |p: Point| if keep_below { coord(p) <= bound } else { coord(p) >= bound };
    let cross = |a: Point, b: Point| {
        let t = (bound - coord(a)) / (coord(b) - coord(a));
        if axis_x {
            Point::new(bound, a.y + (b.y - a.y) * t)
        } else {
            Point::new(a.x + (b.x - a.x) * t, bound)
        }
    };
    let m = ring.len();
    let mut out = Vec::with_capacity(m + 2);
    for j in 0..m {
        let cur = ring[j];
        let prev = ring[(j + m - 1) % m];
        match (inside(prev), inside(cur)) {
            (true, true) => out.push(cur),
            (true, false) => out.push(cross(prev, cur)),
            (false, true) => {
                out.push(cross(prev, cur));
                out.push(cur);
            }
            (false, false) => {}
        }
    }
    out
}

/// Intersection over union of two polygons.
pub fn polygon_iou(a: &Polygon, b: &Polygon) -> Result<f64, GeometryError> {
    let inter = polygon_intersection_area(a, b);
    let union = a.area() + b.area() - inter;
    if union <= EPS * EPS {
        return Err(GeometryError::ZeroUnion);
    }
    Ok((inter / union).clamp(0.0, 1.0))
}
