use super::features::FeatureMatrix;
use super::linalg::{add_assign, relu, sigmoid};
use super::model::{Layer, Model, ModelKind};
use crate::error::{Error, Result};
use crate::graph::{Graph, PortNumbering};

/// Concatenation fed to a VVC layer: own embedding, then for each port
/// `1..=delta` the tail embedding and back-port number. Missing ports
/// contribute a zero vector and a scalar 0.
pub(crate) fn vvc_concat(own: &[f64], ports: &[Option<(&[f64], usize)>], delta: usize) -> Vec<f64> {
    let d = own.len();
    let mut c = Vec::with_capacity(d + delta * (d + 1));
    c.extend_from_slice(own);
    for i in 0..delta {
        match ports.get(i).copied().flatten() {
            Some((z, back)) => {
                c.extend_from_slice(z);
                c.push(back as f64);
            }
            None => c.extend(std::iter::repeat_n(0.0, d + 1)),
        }
    }
    c
}

/// `(W c, ReLU(W c))`.
pub(crate) fn vvc_update(layer: &Layer, concat: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let pre = layer.weight.matvec(concat);
    let post = pre.iter().map(|&x| relu(x)).collect();
    (pre, post)
}

pub(crate) enum LayerCache {
    Vvc { concat: Vec<Vec<f64>>, pre: Vec<Vec<f64>> },
    Mb,
    Sb {
        /// `sigma(W z_u + b)` per node.
        transformed: Vec<Vec<f64>>,
        /// Per target node, per output coordinate: the neighbor attaining the max.
        winner: Vec<Vec<usize>>,
    },
}

/// Intermediate values of a forward pass, kept for differentiation.
pub struct Trace {
    /// `embeddings[l][v - 1]` is the node embedding entering layer `l + 1`;
    /// the last entry is the final embedding.
    pub embeddings: Vec<Vec<Vec<f64>>>,
    pub(crate) caches: Vec<LayerCache>,
    /// Per node, the input and the pre-activation of each readout layer.
    pub(crate) readout_inputs: Vec<Vec<Vec<f64>>>,
    pub(crate) readout_pre: Vec<Vec<Vec<f64>>>,
    /// Readout vectors, one per node.
    pub logits: Vec<Vec<f64>>,
}

fn check_inputs(m: &Model, g: &Graph, ports: Option<&PortNumbering>, x: &FeatureMatrix) -> Result<()> {
    m.validate()?;
    if x.len() != g.n() {
        return Err(Error::ShapeError(format!("{} feature rows for {} nodes", x.len(), g.n())));
    }
    if x.width() != m.input_dim {
        return Err(Error::ShapeError(format!(
            "feature width {} but model expects {}",
            x.width(),
            m.input_dim
        )));
    }
    if g.max_degree() > m.delta {
        return Err(Error::DegreeExceeded(
            g.nodes().find(|&v| g.degree(v) > m.delta).unwrap(),
            g.max_degree(),
            m.delta,
        ));
    }
    match m.kind {
        ModelKind::Vvc => {
            let p = ports.ok_or_else(|| Error::InvalidPorts("VVC forward needs a port numbering".into()))?;
            p.validate(g)?;
        }
        ModelKind::Mb | ModelKind::Sb => {
            if let Some(v) = g.nodes().find(|&v| g.degree(v) == 0) {
                return Err(Error::IsolatedNode(v));
            }
        }
    }
    Ok(())
}

/// Full forward pass keeping every intermediate.
pub fn forward_trace(
    m: &Model,
    g: &Graph,
    ports: Option<&PortNumbering>,
    x: &FeatureMatrix,
) -> Result<Trace> {
    check_inputs(m, g, ports, x)?;
    let mut embeddings: Vec<Vec<Vec<f64>>> = vec![x.rows().to_vec()];
    let mut caches = Vec::with_capacity(m.num_layers());
    for layer in &m.layers {
        let z = embeddings.last().unwrap();
        let (next, cache) = match m.kind {
            ModelKind::Vvc => vvc_layer(layer, g, ports.unwrap(), z, m.delta),
            ModelKind::Mb => mb_layer(layer, g, z),
            ModelKind::Sb => sb_layer(layer, g, z),
        };
        embeddings.push(next);
        caches.push(cache);
    }
    let last = embeddings.last().unwrap();
    let mut readout_inputs = Vec::with_capacity(g.n());
    let mut readout_pre = Vec::with_capacity(g.n());
    let mut logits = Vec::with_capacity(g.n());
    for z in last {
        let mut inputs = Vec::new();
        let mut pres = Vec::new();
        let mut a = z.clone();
        for (k, affine) in m.readout.layers.iter().enumerate() {
            let pre = affine.apply(&a);
            inputs.push(std::mem::take(&mut a));
            a = if k + 1 < m.readout.layers.len() {
                pre.iter().map(|&v| relu(v)).collect()
            } else {
                pre.clone()
            };
            pres.push(pre);
        }
        readout_inputs.push(inputs);
        readout_pre.push(pres);
        logits.push(a);
    }
    Ok(Trace {
        embeddings,
        caches,
        readout_inputs,
        readout_pre,
        logits,
    })
}

fn vvc_layer(
    layer: &Layer,
    g: &Graph,
    p: &PortNumbering,
    z: &[Vec<f64>],
    delta: usize,
) -> (Vec<Vec<f64>>, LayerCache) {
    let mut concat = Vec::with_capacity(g.n());
    let mut pre = Vec::with_capacity(g.n());
    let mut next = Vec::with_capacity(g.n());
    for v in g.nodes() {
        let ports: Vec<Option<(&[f64], usize)>> = (1..=delta)
            .map(|i| p.lookup(v, i).map(|(t, back)| (z[t - 1].as_slice(), back)))
            .collect();
        let c = vvc_concat(&z[v - 1], &ports, delta);
        let (pr, post) = vvc_update(layer, &c);
        concat.push(c);
        pre.push(pr);
        next.push(post);
    }
    (next, LayerCache::Vvc { concat, pre })
}

fn mb_layer(layer: &Layer, g: &Graph, z: &[Vec<f64>]) -> (Vec<Vec<f64>>, LayerCache) {
    let transformed: Vec<Vec<f64>> = z.iter().map(|zu| layer.weight.matvec(zu)).collect();
    let next = g
        .nodes()
        .map(|v| {
            let mut acc = vec![0.0; layer.weight.rows];
            for &u in g.neighbors(v) {
                add_assign(&mut acc, &transformed[u - 1]);
            }
            let deg = g.degree(v) as f64;
            let mut out = z[v - 1].clone();
            out.extend(acc.iter().map(|&s| s / deg));
            out
        })
        .collect();
    (next, LayerCache::Mb)
}

fn sb_layer(layer: &Layer, g: &Graph, z: &[Vec<f64>]) -> (Vec<Vec<f64>>, LayerCache) {
    let bias = layer.bias.as_ref().expect("SB layer has a bias");
    let transformed: Vec<Vec<f64>> = z
        .iter()
        .map(|zu| {
            layer
                .weight
                .matvec(zu)
                .iter()
                .zip(bias)
                .map(|(&a, &b)| sigmoid(a + b))
                .collect()
        })
        .collect();
    let width = layer.weight.rows;
    let mut next = Vec::with_capacity(g.n());
    let mut winner = Vec::with_capacity(g.n());
    for v in g.nodes() {
        let nbrs = g.neighbors(v);
        let mut out = transformed[nbrs[0] - 1].clone();
        let mut arg = vec![nbrs[0]; width];
        for &u in &nbrs[1..] {
            for k in 0..width {
                if transformed[u - 1][k] > out[k] {
                    out[k] = transformed[u - 1][k];
                    arg[k] = u;
                }
            }
        }
        next.push(out);
        winner.push(arg);
    }
    (next, LayerCache::Sb { transformed, winner })
}

/// Readout vectors of a model of any kind. `ports` is required for VVC and
/// ignored otherwise.
pub fn forward(
    m: &Model,
    g: &Graph,
    ports: Option<&PortNumbering>,
    x: &FeatureMatrix,
) -> Result<Vec<Vec<f64>>> {
    Ok(forward_trace(m, g, ports, x)?.logits)
}

fn require_kind(m: &Model, kind: ModelKind) -> Result<()> {
    if m.kind != kind {
        return Err(Error::ShapeError(format!("expected a {kind} model, got {}", m.kind)));
    }
    Ok(())
}

/// CPNGNN forward pass: per-node readout vectors.
pub fn cpngnn_forward(m: &Model, g: &Graph, p: &PortNumbering, x: &FeatureMatrix) -> Result<Vec<Vec<f64>>> {
    require_kind(m, ModelKind::Vvc)?;
    forward(m, g, Some(p), x)
}

/// GraphSAGE-mean forward pass.
pub fn mbgnn_forward(m: &Model, g: &Graph, x: &FeatureMatrix) -> Result<Vec<Vec<f64>>> {
    require_kind(m, ModelKind::Mb)?;
    forward(m, g, None, x)
}

/// GraphSAGE-pool forward pass.
pub fn sbgnn_forward(m: &Model, g: &Graph, x: &FeatureMatrix) -> Result<Vec<Vec<f64>>> {
    require_kind(m, ModelKind::Sb)?;
    forward(m, g, None, x)
}
