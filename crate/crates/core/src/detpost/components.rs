use serde::{Deserialize, Serialize};

use crate::geometry::{BinaryMap, LabelMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Connectivity {
    Four,
    Eight,
}

/// Labels foreground components `1..=count` in first-encounter raster order.
///
/// Two-pass union-find: provisional labels are issued in raster order and
/// each set is rooted at its smallest label, so the root is also the
/// component's first raster pixel.
pub fn connected_components(binary: &BinaryMap, connectivity: Connectivity) -> (LabelMap, u32) {
    let (h, w) = binary.dims();
    let fg = binary.data();
    let mut prov = vec![0u32; h * w];
    let mut parent: Vec<u32> = vec![0];

    for r in 0..h {
        for c in 0..w {
            let idx = r * w + c;
            if !fg[idx] {
                continue;
            }
            let mut label = 0u32;
            let mut visit = |n: u32, parent: &mut Vec<u32>| {
                if n == 0 {
                    return;
                }
                if label == 0 {
                    label = find(parent, n);
                } else {
                    label = union(parent, label, n);
                }
            };
            if c > 0 {
                visit(prov[idx - 1], &mut parent);
            }
            if r > 0 {
                visit(prov[idx - w], &mut parent);
                if connectivity == Connectivity::Eight {
                    if c > 0 {
                        visit(prov[idx - w - 1], &mut parent);
                    }
                    if c + 1 < w {
                        visit(prov[idx - w + 1], &mut parent);
                    }
                }
            }
            if label == 0 {
                label = parent.len() as u32;
                parent.push(label);
            }
            prov[idx] = label;
        }
    }

    let mut remap = vec![0u32; parent.len()];
    let mut count = 0u32;
    for l in 1..parent.len() as u32 {
        let root = find(&mut parent, l);
        if root == l {
            count += 1;
            remap[l as usize] = count;
        }
    }
    for l in 1..parent.len() {
        let root = find(&mut parent, l as u32);
        remap[l] = remap[root as usize];
    }
    let data = prov.into_iter().map(|l| remap[l as usize]).collect();
    (LabelMap::new(h, w, data).expect("dims checked by input grid"), count)
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let p = parent[x as usize];
        parent[x as usize] = parent[p as usize];
        x = p;
    }
    x
}

fn union(parent: &mut [u32], a: u32, b: u32) -> u32 {
    let ra = find(parent, a);
    let rb = find(parent, b);
    let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
    parent[hi as usize] = lo;
    lo
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(rows: &[&str]) -> BinaryMap {
        let h = rows.len();
        let w = rows[0].len();
        BinaryMap::new(h, w, rows.iter().flat_map(|r| r.bytes().map(|b| b == b'#')).collect()).unwrap()
    }

    #[test]
    fn empty_grid() {
        let (labels, n) = connected_components(&grid(&["...", "..."]), Connectivity::Four);
        assert_eq!(n, 0);
        assert!(labels.data().iter().all(|&l| l == 0));
    }

    #[test]
    fn single_pixel() {
        let (labels, n) = connected_components(&grid(&["...", ".#."]), Connectivity::Eight);
        assert_eq!(n, 1);
        assert_eq!(*labels.get(1, 1), 1);
    }

    #[test]
    fn checkerboard() {
        let g = grid(&["#.#", ".#.", "#.#"]);
        assert_eq!(connected_components(&g, Connectivity::Four).1, 5);
        assert_eq!(connected_components(&g, Connectivity::Eight).1, 1);
    }

    #[test]
    fn labels_follow_first_encounter_order() {
        // The U joins late: the right arm starts a provisional label that
        // must merge into the left one.
        let g = grid(&["#.#.#", "#.#..", "###.#"]);
        let (labels, n) = connected_components(&g, Connectivity::Four);
        assert_eq!(n, 3);
        assert_eq!(*labels.get(0, 0), 1);
        assert_eq!(*labels.get(0, 2), 1);
        assert_eq!(*labels.get(0, 4), 2);
        assert_eq!(*labels.get(2, 4), 3);
    }
}
