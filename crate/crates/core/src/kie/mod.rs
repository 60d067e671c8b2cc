//! Key information extraction over recognized text boxes: a complete directed
//! graph with spatial edge features, edge-gated message passing, and
//! per-node field classification.

mod graph;
mod infer;
mod weights;

pub use graph::{build_graph, edge_features, KieEdge, KieGraph, KieNode, EDGE_DIM};
pub use infer::kie_infer;
pub use weights::{KieDims, KieWeights, Matrix, MATRIX_NAMES, WEIGHTS_MAGIC};

use thiserror::Error;

use crate::geometry::{GeometryError, Polygon};
use crate::recdecode::DecodeError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KieError {
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("invalid weights: {0}")]
    Weights(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

impl From<GeometryError> for KieError {
    fn from(e: GeometryError) -> Self {
        KieError::Geometry(e.to_string())
    }
}

/// One detected and recognized region.
#[derive(Debug, Clone, PartialEq)]
pub struct TextInstance {
    pub polygon: Polygon,
    pub text: String,
    pub det_score: f64,
    pub rec_score: f64,
}

impl TextInstance {
    pub fn new(polygon: Polygon, text: impl Into<String>) -> Self {
        Self { polygon, text: text.into(), det_score: 1.0, rec_score: 1.0 }
    }
}

/// Texts grouped by predicted class, in class index order.
pub type Entities = Vec<(String, Vec<String>)>;

/// Assigns each node its argmax class and groups texts per class in reading
/// order (box center y, then x). Nodes of the `background` class are dropped.
pub fn extract_entities(
    graph: &KieGraph,
    scores: &[Vec<f64>],
    class_names: &[String],
    background: Option<usize>,
) -> Entities {
    let mut order: Vec<usize> = (0..graph.nodes.len()).collect();
    order.sort_by(|&a, &b| {
        let (ca, cb) = (graph.nodes[a].center(), graph.nodes[b].center());
        ca.y.total_cmp(&cb.y).then(ca.x.total_cmp(&cb.x)).then(a.cmp(&b))
    });
    let mut grouped: Vec<Vec<String>> = vec![Vec::new(); class_names.len()];
    for i in order {
        let row = &scores[i];
        let mut best = 0;
        for (k, &s) in row.iter().enumerate() {
            if s > row[best] {
                best = k;
            }
        }
        if Some(best) == background || best >= class_names.len() {
            continue;
        }
        grouped[best].push(graph.nodes[i].text.clone());
    }
    class_names
        .iter()
        .zip(grouped)
        .filter(|(_, texts)| !texts.is_empty())
        .map(|(name, texts)| (name.clone(), texts))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recdecode::{Dictionary, SpecialTokens};

    fn graph(boxes: &[(f64, f64, &str)]) -> KieGraph {
        let dict = Dictionary::new(["a", "b"], SpecialTokens { unknown: Some(0), ..Default::default() }).unwrap();
        let inst: Vec<_> =
            boxes.iter().map(|&(x, y, t)| TextInstance::new(Polygon::rect(x, y, 10.0, 4.0).unwrap(), t)).collect();
        build_graph(&inst, &dict).unwrap()
    }

    fn names() -> Vec<String> {
        ["other", "address", "total"].map(String::from).to_vec()
    }

    #[test]
    fn single_total() {
        let g = graph(&[(0.0, 0.0, "9.99")]);
        let e = extract_entities(&g, &[vec![0.1, 0.2, 0.7]], &names(), Some(0));
        assert_eq!(e, vec![("total".to_string(), vec!["9.99".to_string()])]);
    }

    #[test]
    fn stacked_addresses_top_first() {
        let g = graph(&[(0.0, 20.0, "city"), (0.0, 5.0, "street")]);
        let s = vec![vec![0.0, 1.0, 0.0]; 2];
        let e = extract_entities(&g, &s, &names(), Some(0));
        assert_eq!(e[0].1, vec!["street", "city"]);
    }

    #[test]
    fn all_background_is_empty() {
        let g = graph(&[(0.0, 0.0, "x"), (20.0, 0.0, "y")]);
        let s = vec![vec![0.9, 0.05, 0.05]; 2];
        assert!(extract_entities(&g, &s, &names(), Some(0)).is_empty());
    }
}
