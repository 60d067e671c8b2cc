use super::polygon::{has_proper_crossing, signed_area, Point, Polygon};
use super::{GeometryError, EPS};

/// Ratio of miter length to offset distance beyond which a join is beveled.
const MITER_LIMIT: f64 = 2.0;

/// Displaces every edge by `d` along its outward normal (inward when `d < 0`).
///
/// Outer corners use miter joins, beveled past a miter ratio of 2. The input
/// is expected to be convex or star-shaped; an offset that reverses an edge,
/// collapses the area or self-intersects is reported as degenerate.
pub fn polygon_offset(p: &Polygon, d: f64) -> Result<Polygon, GeometryError> {
    if !d.is_finite() {
        return Err(GeometryError::NonFinite);
    }
    if d == 0.0 {
        return Ok(p.clone());
    }
    let v = p.vertices();
    let n = v.len();
    let dirs: Vec<Point> = (0..n)
        .map(|i| {
            let e = v[(i + 1) % n] - v[i];
            e * (1.0 / e.norm())
        })
        .collect();
    // Interior lies to the left of each edge, so the outward normal points right.
    let normals: Vec<Point> = dirs.iter().map(|t| Point::new(t.y, -t.x)).collect();

    let mut out = Vec::with_capacity(n * 2);
    // Index range in `out` produced by each vertex.
    let mut spans = Vec::with_capacity(n);
    for i in 0..n {
        let prev = (i + n - 1) % n;
        let (np, nc) = (normals[prev], normals[i]);
        let turn = dirs[prev].cross(dirs[i]);
        let cos = np.dot(nc);
        let start = out.len();
        let opens_gap = turn * d > 0.0;
        if 1.0 + cos <= EPS {
            out.push(v[i] + np * d);
            out.push(v[i] + nc * d);
        } else {
            let ratio = (2.0 / (1.0 + cos)).sqrt();
            if opens_gap && ratio > MITER_LIMIT {
                out.push(v[i] + np * d);
                out.push(v[i] + nc * d);
            } else {
                out.push(v[i] + (np + nc) * (d / (1.0 + cos)));
            }
        }
        spans.push((start, out.len() - 1));
    }

    for i in 0..n {
        let from = out[spans[i].1];
        let to = out[spans[(i + 1) % n].0];
        if (to - from).dot(dirs[i]) <= 0.0 {
            return Err(GeometryError::Degenerate("offset collapses polygon"));
        }
    }
    if signed_area(&out) <= EPS || has_proper_crossing(&out) {
        return Err(GeometryError::Degenerate("offset collapses polygon"));
    }
    Polygon::new(out).map_err(|_| GeometryError::Degenerate("offset collapses polygon"))
}
