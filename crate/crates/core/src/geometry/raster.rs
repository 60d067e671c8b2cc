use super::polygon::{Point, Polygon};

/// Calls `f(row, col)` for every pixel of a `height x width` grid whose
/// center lies inside `p` (even-odd rule, scanline order).
pub fn for_each_pixel_inside(p: &Polygon, height: usize, width: usize, mut f: impl FnMut(usize, usize)) {
    let (lo, hi) = p.bounds();
    let r0 = ((lo.y - 0.5).ceil().max(0.0)) as usize;
    let r1 = ((hi.y - 0.5).floor().min(height as f64 - 1.0)).max(-1.0);
    if r1 < 0.0 {
        return;
    }
    let r1 = r1 as usize;
    let mut xs = Vec::new();
    for r in r0..=r1 {
        let y = r as f64 + 0.5;
        xs.clear();
        for (a, b) in p.edges() {
            if (a.y <= y && y < b.y) || (b.y <= y && y < a.y) {
                xs.push(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
            }
        }
        xs.sort_by(f64::total_cmp);
        for pair in xs.chunks_exact(2) {
            let c0 = (pair[0] - 0.5).ceil().max(0.0);
            let c1 = ((pair[1] - 0.5).ceil()).min(width as f64);
            let (c0, c1) = (c0 as usize, c1.max(0.0) as usize);
            for c in c0..c1 {
                f(r, c);
            }
        }
    }
}

/// Douglas-Peucker simplification of a closed ring.
///
/// The ring is split at vertex 0 and the vertex farthest from it, and each
/// half is simplified independently with tolerance `epsilon`.
pub fn simplify_closed(ring: &[Point], epsilon: f64) -> Vec<Point> {
    let n = ring.len();
    if n <= 3 {
        return ring.to_vec();
    }
    let far = (1..n)
        .max_by(|&a, &b| ring[0].distance(ring[a]).total_cmp(&ring[0].distance(ring[b])))
        .unwrap_or(n / 2);
    let mut first: Vec<Point> = ring[..=far].to_vec();
    let mut second: Vec<Point> = ring[far..].to_vec();
    second.push(ring[0]);
    first = douglas_peucker(&first, epsilon);
    second = douglas_peucker(&second, epsilon);
    first.pop();
    second.pop();
    first.extend(second);
    first
}

fn douglas_peucker(line: &[Point], epsilon: f64) -> Vec<Point> {
    if line.len() < 3 {
        return line.to_vec();
    }
    let mut keep = vec![false; line.len()];
    keep[0] = true;
    keep[line.len() - 1] = true;
    let mut stack = vec![(0usize, line.len() - 1)];
    while let Some((s, e)) = stack.pop() {
        let (a, b) = (line[s], line[e]);
        let ab = b - a;
        let len = ab.norm();
        let mut best = (0usize, -1.0);
        for (i, &p) in line.iter().enumerate().take(e).skip(s + 1) {
            let dist = if len == 0.0 { p.distance(a) } else { ab.cross(p - a).abs() / len };
            if dist > best.1 {
                best = (i, dist);
            }
        }
        if best.1 > epsilon {
            keep[best.0] = true;
            stack.push((s, best.0));
            stack.push((best.0, e));
        }
    }
    line.iter().zip(keep).filter_map(|(&p, k)| k.then_some(p)).collect()
}
