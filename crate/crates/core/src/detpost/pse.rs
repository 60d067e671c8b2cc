use std::collections::VecDeque;

use crate::geometry::{BinaryMap, LabelMap, ScoreMap};

use super::{check_dims, connected_components, score_labels, Connectivity, DetError, DetParams, Detection};

/// Binary kernels ordered smallest first, all the same size.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelStack {
    kernels: Vec<BinaryMap>,
}

impl KernelStack {
    /// Builds a stack, intersecting each kernel with its successor so that
    /// kernel `i` is contained in kernel `i + 1`.
    pub fn new(mut kernels: Vec<BinaryMap>) -> Result<Self, DetError> {
        let first = kernels.first().ok_or_else(|| DetError::Shape("kernel stack is empty".into()))?;
        let dims = first.dims();
        if let Some(bad) = kernels.iter().position(|k| k.dims() != dims) {
            return Err(DetError::Shape(format!("kernel {bad} is {:?}, expected {dims:?}", kernels[bad].dims())));
        }
        for i in (0..kernels.len() - 1).rev() {
            let (lo, hi) = kernels.split_at_mut(i + 1);
            for (a, &b) in lo[i].data_mut().iter_mut().zip(hi[0].data()) {
                *a &= b;
            }
        }
        Ok(Self { kernels })
    }

    pub fn kernels(&self) -> &[BinaryMap] {
        &self.kernels
    }

    pub fn dims(&self) -> (usize, usize) {
        self.kernels[0].dims()
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }
}

/// Progressive scale expansion.
///
/// Seeds are the 4-connected components of the smallest kernel with at
/// least `min_kernel_area` pixels, relabeled consecutively. For every larger
/// kernel, a FIFO queue is seeded with the labeled pixels in raster order and
/// labels spread breadth-first (neighbor order up, down, left, right) into
/// unlabeled foreground pixels of that kernel. The first label to reach a
/// pixel keeps it; seeds are never merged or relabeled.
pub fn pse_expand(stack: &KernelStack, min_kernel_area: usize) -> LabelMap {
    let (h, w) = stack.dims();
    let (cc, n) = connected_components(&stack.kernels[0], Connectivity::Four);

    let mut area = vec![0usize; n as usize + 1];
    for &l in cc.data() {
        area[l as usize] += 1;
    }
    let mut remap = vec![0u32; n as usize + 1];
    let mut next = 0u32;
    for l in 1..=n as usize {
        if area[l] >= min_kernel_area {
            next += 1;
            remap[l] = next;
        }
    }
    let mut labels: Vec<u32> = cc.data().iter().map(|&l| remap[l as usize]).collect();

    let mut queue = VecDeque::new();
    for kernel in &stack.kernels[1..] {
        let fg = kernel.data();
        let open = |labels: &[u32], idx: usize| labels[idx] == 0 && fg[idx];
        queue.clear();
        // Pixels without an open neighbor would be popped without effect.
        for idx in 0..h * w {
            if labels[idx] == 0 {
                continue;
            }
            let (r, c) = (idx / w, idx % w);
            let has_open = (r > 0 && open(&labels, idx - w))
                || (r + 1 < h && open(&labels, idx + w))
                || (c > 0 && open(&labels, idx - 1))
                || (c + 1 < w && open(&labels, idx + 1));
            if has_open {
                queue.push_back(idx);
            }
        }
        while let Some(idx) = queue.pop_front() {
            let label = labels[idx];
            let (r, c) = (idx / w, idx % w);
            let neighbors = [
                (r > 0).then(|| idx - w),
                (r + 1 < h).then(|| idx + w),
                (c > 0).then(|| idx - 1),
                (c + 1 < w).then(|| idx + 1),
            ];
            for nb in neighbors.into_iter().flatten() {
                if open(&labels, nb) {
                    labels[nb] = label;
                    queue.push_back(nb);
                }
            }
        }
    }
    LabelMap::new(h, w, labels).expect("dims from stack")
}

/// PSENet post-processing: expansion, then contour and mean-probability
/// filtering per instance. Kernels are already full size, so no unclipping.
pub fn psenet_postprocess(
    stack: &KernelStack,
    prob: &ScoreMap,
    params: &DetParams,
) -> Result<Vec<Detection>, DetError> {
    params.validate()?;
    check_dims(&stack.kernels[0], prob, "kernel stack vs probability map")?;
    let labels = pse_expand(stack, params.min_kernel_area);
    let count = labels.max_label();
    Ok(score_labels(&labels, count, prob, params)
        .into_iter()
        .map(|(polygon, score)| Detection { polygon, score })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bin(rows: &[&str]) -> BinaryMap {
        let w = rows[0].len();
        BinaryMap::new(rows.len(), w, rows.iter().flat_map(|r| r.bytes().map(|b| b == b'#')).collect()).unwrap()
    }

    #[test]
    fn single_kernel_matches_components() {
        let k = bin(&["##..", "##..", "...#"]);
        let stack = KernelStack::new(vec![k.clone()]).unwrap();
        let (cc, _) = connected_components(&k, Connectivity::Four);
        assert_eq!(pse_expand(&stack, 1), cc);
    }

    #[test]
    fn strip_splits_four_three() {
        let seeds = bin(&["#.....#"]);
        let full = bin(&["#######"]);
        let stack = KernelStack::new(vec![seeds, full]).unwrap();
        let out = pse_expand(&stack, 1);
        assert_eq!(out.data(), &[1, 1, 1, 1, 2, 2, 2]);
    }

    #[test]
    fn small_seeds_are_dropped() {
        let seeds = bin(&["##...#"]);
        let full = bin(&["######"]);
        let out = pse_expand(&KernelStack::new(vec![seeds, full]).unwrap(), 2);
        assert_eq!(out.data(), &[1; 6]);
    }

    #[test]
    fn nesting_is_enforced() {
        let stack = KernelStack::new(vec![bin(&["##"]), bin(&["#."])]).unwrap();
        assert_eq!(stack.kernels()[0].data(), &[true, false]);
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(KernelStack::new(vec![]), Err(DetError::Shape(_))));
        assert!(matches!(KernelStack::new(vec![bin(&["#"]), bin(&["##"])]), Err(DetError::Shape(_))));
    }

    #[test]
    fn empty_kernels_give_no_detections() {
        let stack = KernelStack::new(vec![bin(&["...", "..."]), bin(&["...", "..."])]).unwrap();
        let prob = ScoreMap::filled(2, 3, 0.0).unwrap();
        assert!(psenet_postprocess(&stack, &prob, &DetParams::default()).unwrap().is_empty());
    }
}
