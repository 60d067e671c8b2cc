use super::{KieError, KieGraph, KieWeights, Matrix};

/// `x W + b` for a row vector `x`.
fn affine(x: &[f64], w: &Matrix, b: Option<&Matrix>) -> Vec<f64> {
    let mut out: Vec<f64> = match b {
        Some(b) => (0..w.cols).map(|c| b.at(0, c)).collect(),
        None => vec![0.0; w.cols],
    };
    for (r, &xv) in x.iter().enumerate() {
        if xv == 0.0 {
            continue;
        }
        for (c, o) in out.iter_mut().enumerate() {
            *o += xv * w.at(r, c);
        }
    }
    out
}

fn add_into(acc: &mut [f64], v: &[f64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += b;
    }
}

fn relu(v: &mut [f64]) {
    for x in v {
        *x = x.max(0.0);
    }
}

fn softmax(v: &[f64]) -> Vec<f64> {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = v.iter().map(|x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Runs message passing over `graph` and returns one class distribution per
/// node.
///
/// Each edge's features pass through a one-hidden-layer MLP to a scalar gate;
/// gates are softmax-normalized over each node's incoming edges. A round
/// updates every node as `relu(h W_self + m W_msg + t W_text + b)` where `m`
/// is the gated sum of neighbor states and `t` the node's text embedding.
pub fn kie_infer(graph: &KieGraph, weights: &KieWeights) -> Result<Vec<Vec<f64>>, KieError> {
    let dims = weights.dims();
    let n = graph.nodes.len();
    let w = |name| weights.matrix(name);

    let mut text = Vec::with_capacity(n);
    let mut state = Vec::with_capacity(n);
    for (i, node) in graph.nodes.iter().enumerate() {
        let mut t = vec![0.0; dims.embed];
        for &s in &node.symbols {
            if s >= dims.vocab {
                return Err(KieError::Weights(format!("symbol {s} outside embedding table of {} rows", dims.vocab)));
            }
            for (e, v) in t.iter_mut().enumerate() {
                *v += w("embedding").at(s, e);
            }
        }
        if !node.symbols.is_empty() {
            let len = node.symbols.len() as f64;
            t.iter_mut().for_each(|v| *v /= len);
        }
        let mut input = t.clone();
        match &node.visual {
            Some(v) if v.len() == dims.visual => input.extend(v),
            Some(v) => {
                return Err(KieError::Weights(format!(
                    "node {i} visual features have length {}, weights expect {}",
                    v.len(),
                    dims.visual
                )))
            }
            None => input.resize(dims.embed + dims.visual, 0.0),
        }
        let mut h = affine(&input, w("node_in"), Some(w("node_in_bias")));
        relu(&mut h);
        text.push(t);
        state.push(h);
    }

    let mut incoming: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for e in &graph.edges {
        if e.from >= n || e.to >= n || e.from == e.to {
            return Err(KieError::Geometry(format!("invalid edge {} -> {}", e.from, e.to)));
        }
        let mut hidden = affine(&e.features, w("edge_hidden"), Some(w("edge_hidden_bias")));
        relu(&mut hidden);
        let gate = affine(&hidden, w("edge_gate"), Some(w("edge_gate_bias")))[0];
        incoming[e.to].push((e.from, gate));
    }
    let alphas: Vec<Vec<(usize, f64)>> = incoming
        .iter()
        .map(|edges| {
            let gates: Vec<f64> = edges.iter().map(|&(_, g)| g).collect();
            edges.iter().map(|&(src, _)| src).zip(softmax(&gates)).collect()
        })
        .collect();

    let text_proj: Vec<Vec<f64>> = text.iter().map(|t| affine(t, w("update_text"), Some(w("update_bias")))).collect();
    for _ in 0..dims.rounds {
        let mut next = Vec::with_capacity(n);
        for j in 0..n {
            let mut msg = vec![0.0; dims.hidden];
            for &(src, a) in &alphas[j] {
                for (m, s) in msg.iter_mut().zip(&state[src]) {
                    *m += a * s;
                }
            }
            let mut h = affine(&state[j], w("update_self"), None);
            add_into(&mut h, &affine(&msg, w("update_msg"), None));
            add_into(&mut h, &text_proj[j]);
            relu(&mut h);
            next.push(h);
        }
        state = next;
    }

    Ok(state.iter().map(|h| softmax(&affine(h, w("classifier"), Some(w("classifier_bias"))))).collect())
}
