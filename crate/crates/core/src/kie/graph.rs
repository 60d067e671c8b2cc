use crate::geometry::{Point, Polygon};
use crate::recdecode::Dictionary;

use super::{KieError, TextInstance};

/// Length of the spatial relation vector on every edge.
pub const EDGE_DIM: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct KieNode {
    /// Axis-aligned bounding box of the instance polygon.
    pub bbox: Polygon,
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    pub text: String,
    pub symbols: Vec<usize>,
    /// Optional visual feature vector; zeros when absent.
    pub visual: Option<Vec<f64>>,
}

impl KieNode {
    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn center(&self) -> Point {
        Point::new((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KieEdge {
    pub from: usize,
    pub to: usize,
    pub features: [f64; EDGE_DIM],
}

#[derive(Debug, Clone, PartialEq)]
pub struct KieGraph {
    pub nodes: Vec<KieNode>,
    /// Complete directed edge set without self-loops, ordered by (from, to).
    pub edges: Vec<KieEdge>,
}

/// `[dx/h_i, dy/h_i, w_i/h_i, h_j/h_i, w_j/h_i]` for the edge i -> j, where
/// `dx, dy` is the center offset from i to j.
pub fn edge_features(from: &KieNode, to: &KieNode) -> [f64; EDGE_DIM] {
    let (ci, cj) = (from.center(), to.center());
    let hi = from.height();
    [
        (cj.x - ci.x) / hi,
        (cj.y - ci.y) / hi,
        from.width() / hi,
        to.height() / hi,
        to.width() / hi,
    ]
}

pub fn build_graph(instances: &[TextInstance], dict: &Dictionary) -> Result<KieGraph, KieError> {
    if instances.is_empty() {
        return Err(KieError::Geometry("graph needs at least one instance".into()));
    }
    let mut nodes = Vec::with_capacity(instances.len());
    for (i, inst) in instances.iter().enumerate() {
        let (lo, hi) = inst.polygon.bounds();
        if hi.y - lo.y <= 0.0 || hi.x - lo.x <= 0.0 {
            return Err(KieError::Geometry(format!("instance {i} has a zero-size box")));
        }
        let bbox = Polygon::rect(lo.x, lo.y, hi.x - lo.x, hi.y - lo.y)?;
        nodes.push(KieNode {
            bbox,
            x0: lo.x,
            y0: lo.y,
            x1: hi.x,
            y1: hi.y,
            text: inst.text.clone(),
            symbols: dict.encode(&inst.text)?,
            visual: None,
        });
    }
    let mut edges = Vec::with_capacity(nodes.len() * (nodes.len() - 1));
    for (i, a) in nodes.iter().enumerate() {
        for (j, b) in nodes.iter().enumerate() {
            if i != j {
                edges.push(KieEdge { from: i, to: j, features: edge_features(a, b) });
            }
        }
    }
    Ok(KieGraph { nodes, edges })
}
