use crate::geometry::{LabelMap, Point, Polygon};

use super::DetError;

// Directions on the pixel-corner lattice: east, south, west, north (y down).
const DIRS: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

/// Outer boundary of one labeled region, traced along pixel edges.
///
/// Vertices sit on pixel corners and only direction changes are kept, so a
/// single pixel yields its unit square and a solid block its four corners.
/// Diagonally touching pixels are kept inside the boundary, which then
/// touches itself at the shared corner.
pub fn extract_contour(labels: &LabelMap, label: u32) -> Result<Polygon, DetError> {
    let w = labels.width();
    let start = labels
        .data()
        .iter()
        .position(|&l| l == label && label != 0)
        .ok_or(DetError::LabelNotFound(label))?;
    Ok(trace(labels, label, start / w, start % w))
}

/// Contours for labels `1..=count`, indexed by `label - 1`. Absent labels
/// yield `None`.
pub fn extract_contours(labels: &LabelMap, count: u32) -> Vec<Option<Polygon>> {
    let mut first = vec![usize::MAX; count as usize];
    let mut missing = count as usize;
    for (idx, &l) in labels.data().iter().enumerate() {
        if l == 0 || l > count {
            continue;
        }
        let slot = &mut first[(l - 1) as usize];
        if *slot == usize::MAX {
            *slot = idx;
            missing -= 1;
            if missing == 0 {
                break;
            }
        }
    }
    let w = labels.width();
    first
        .iter()
        .enumerate()
        .map(|(i, &idx)| (idx != usize::MAX).then(|| trace(labels, i as u32 + 1, idx / w, idx % w)))
        .collect()
}

fn trace(labels: &LabelMap, label: u32, row: usize, col: usize) -> Polygon {
    let (h, w) = (labels.height() as i64, labels.width() as i64);
    let inside = |r: i64, c: i64| r >= 0 && c >= 0 && r < h && c < w && *labels.get(r as usize, c as usize) == label;

    // The first raster pixel's top edge is on the outer boundary; walk east
    // along it with the region on the right-hand side.
    let start = (col as i64, row as i64);
    let mut pos = (start.0 + 1, start.1);
    let mut dir = 0usize;
    let mut vertices = Vec::new();
    loop {
        let (dx, dy) = DIRS[dir];
        // Right-hand normal of (dx, dy) in y-down coordinates is (-dy, dx).
        let (rx, ry) = (-dy, dx);
        // Pixels ahead of the current corner, named by side.
        let cell = |ox: i64, oy: i64| {
            // Doubled coordinates: corner * 2 + direction + normal offset.
            let cx = 2 * pos.0 + dx + ox;
            let cy = 2 * pos.1 + dy + oy;
            (cy.div_euclid(2), cx.div_euclid(2))
        };
        let (lr, lc) = cell(-rx, -ry);
        let (rr, rc) = cell(rx, ry);
        let next = if inside(lr, lc) {
            (dir + 3) % 4
        } else if inside(rr, rc) {
            dir
        } else {
            (dir + 1) % 4
        };
        if next != dir {
            vertices.push(Point::new(pos.0 as f64, pos.1 as f64));
        }
        if pos == start && next == 0 {
            break;
        }
        dir = next;
        pos = (pos.0 + DIRS[dir].0, pos.1 + DIRS[dir].1);
    }
    Polygon::from_ccw_unchecked(vertices)
}
