use std::path::Path;

use super::{KieError, EDGE_DIM};

pub const WEIGHTS_MAGIC: &[u8; 7] = b"SDMGRW1";

/// Matrix order in the weight file.
pub const MATRIX_NAMES: [&str; 13] = [
    "embedding",
    "node_in",
    "node_in_bias",
    "edge_hidden",
    "edge_hidden_bias",
    "edge_gate",
    "edge_gate_bias",
    "update_self",
    "update_msg",
    "update_text",
    "update_bias",
    "classifier",
    "classifier_bias",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    /// Row-major.
    pub data: Vec<f32>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn at(&self, r: usize, c: usize) -> f64 {
        f64::from(self.data[r * self.cols + c])
    }
}

/// Layer sizes implied by a weight set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KieDims {
    /// Dictionary size (embedding rows).
    pub vocab: usize,
    pub embed: usize,
    /// Visual feature length per node; 0 disables the branch.
    pub visual: usize,
    pub hidden: usize,
    pub edge_hidden: usize,
    pub classes: usize,
    pub rounds: usize,
}

impl KieDims {
    fn shapes(&self) -> [(usize, usize); 13] {
        let (e, h, g, k) = (self.embed, self.hidden, self.edge_hidden, self.classes);
        [
            (self.vocab, e),
            (e + self.visual, h),
            (1, h),
            (EDGE_DIM, g),
            (1, g),
            (g, 1),
            (1, 1),
            (h, h),
            (h, h),
            (e, h),
            (1, h),
            (h, k),
            (1, k),
        ]
    }
}

/// Immutable parameter set for [`kie_infer`](super::kie_infer).
#[derive(Debug, Clone, PartialEq)]
pub struct KieWeights {
    dims: KieDims,
    matrices: Vec<Matrix>,
}

impl KieWeights {
    pub fn zeros(dims: KieDims) -> Result<Self, KieError> {
        let matrices = dims.shapes().iter().map(|&(r, c)| Matrix::zeros(r, c)).collect();
        Self::from_matrices(dims, matrices)
    }

    pub fn from_matrices(dims: KieDims, matrices: Vec<Matrix>) -> Result<Self, KieError> {
        if dims.vocab == 0 || dims.embed == 0 || dims.hidden == 0 || dims.edge_hidden == 0 || dims.classes == 0 {
            return Err(KieError::Weights(format!("all layer sizes must be positive: {dims:?}")));
        }
        if matrices.len() != MATRIX_NAMES.len() {
            return Err(KieError::Weights(format!("expected {} matrices, got {}", MATRIX_NAMES.len(), matrices.len())));
        }
        for ((m, name), (r, c)) in matrices.iter().zip(MATRIX_NAMES).zip(dims.shapes()) {
            if (m.rows, m.cols) != (r, c) {
                return Err(KieError::Weights(format!("{name} is {}x{}, expected {r}x{c}", m.rows, m.cols)));
            }
            if m.data.len() != r * c {
                return Err(KieError::Weights(format!("{name} holds {} values, expected {}", m.data.len(), r * c)));
            }
            if m.data.iter().any(|v| !v.is_finite()) {
                return Err(KieError::Weights(format!("{name} has non-finite values")));
            }
        }
        Ok(Self { dims, matrices })
    }

    pub fn dims(&self) -> KieDims {
        self.dims
    }

    pub fn matrix(&self, name: &str) -> &Matrix {
        let i = MATRIX_NAMES.iter().position(|&n| n == name).expect("known matrix name");
        &self.matrices[i]
    }

    pub fn matrices_mut(&mut self) -> impl Iterator<Item = (&'static str, &mut Matrix)> {
        MATRIX_NAMES.into_iter().zip(self.matrices.iter_mut())
    }

    /// Serializes to the binary weight format.
    pub fn to_bytes(&self) -> Vec<u8> {
        let d = self.dims;
        let mut out = WEIGHTS_MAGIC.to_vec();
        let header = [d.vocab, d.embed, EDGE_DIM, d.classes, d.rounds, self.matrices.len()];
        for v in header {
            out.extend((v as u32).to_le_bytes());
        }
        for m in &self.matrices {
            out.extend((m.rows as u32).to_le_bytes());
            out.extend((m.cols as u32).to_le_bytes());
        }
        for m in &self.matrices {
            for v in &m.data {
                out.extend(v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, KieError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(WEIGHTS_MAGIC.len())? != WEIGHTS_MAGIC {
            return Err(KieError::Weights("bad magic".into()));
        }
        let vocab = r.u32()?;
        let embed = r.u32()?;
        let edge = r.u32()?;
        let classes = r.u32()?;
        let rounds = r.u32()?;
        let count = r.u32()?;
        if edge != EDGE_DIM {
            return Err(KieError::Weights(format!("edge feature length {edge}, expected {EDGE_DIM}")));
        }
        if count != MATRIX_NAMES.len() {
            return Err(KieError::Weights(format!("header declares {count} matrices, expected {}", MATRIX_NAMES.len())));
        }
        let mut shapes = Vec::with_capacity(count);
        for _ in 0..count {
            shapes.push((r.u32()?, r.u32()?));
        }
        let expected: usize = shapes.iter().map(|(a, b)| a * b * 4).sum();
        if bytes.len() - r.pos != expected {
            return Err(KieError::Weights(format!(
                "data section is {} bytes, header declares {expected}",
                bytes.len() - r.pos
            )));
        }
        let mut matrices = Vec::with_capacity(count);
        for &(rows, cols) in &shapes {
            let raw = r.take(rows * cols * 4)?;
            let data = raw.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
            matrices.push(Matrix { rows, cols, data });
        }
        let hidden = shapes[1].1;
        let dims = KieDims {
            vocab,
            embed,
            visual: shapes[1].0.saturating_sub(embed),
            hidden,
            edge_hidden: shapes[3].1,
            classes,
            rounds,
        };
        Self::from_matrices(dims, matrices)
    }

    pub fn load(path: &Path) -> Result<Self, KieError> {
        let bytes = std::fs::read(path)
            .map_err(|e| KieError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_bytes(&bytes).map_err(|e| KieError::Io { path: path.display().to_string(), message: e.to_string() })
    }

    pub fn save(&self, path: &Path) -> Result<(), KieError> {
        std::fs::write(path, self.to_bytes())
            .map_err(|e| KieError::Io { path: path.display().to_string(), message: e.to_string() })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], KieError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| KieError::Weights(format!("truncated at byte {}", self.pos)))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<usize, KieError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }
}
