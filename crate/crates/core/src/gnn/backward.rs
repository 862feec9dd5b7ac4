//! Reverse-mode differentiation through readout, layers and concatenation.

use super::forward::{LayerCache, Trace};
use super::linalg::add_assign;
use super::model::{Model, ModelKind};
use crate::error::{Error, Result};
use crate::graph::{Graph, PortNumbering};

/// Gradient of `sum_v <dlogits[v], logits[v]>` with respect to every
/// parameter, returned as a model-shaped accumulator.
pub fn backward(
    m: &Model,
    g: &Graph,
    ports: Option<&PortNumbering>,
    trace: &Trace,
    dlogits: &[Vec<f64>],
) -> Result<Model> {
    if dlogits.len() != g.n() {
        return Err(Error::ShapeError("one logit gradient per node required".into()));
    }
    let mut grad = m.zeros_like();
    let n_read = m.readout.layers.len();

    // Readout, node by node.
    let mut dz: Vec<Vec<f64>> = Vec::with_capacity(g.n());
    for vi in 0..g.n() {
        let mut delta = dlogits[vi].clone();
        for k in (0..n_read).rev() {
            if k + 1 < n_read {
                for (d, &pre) in delta.iter_mut().zip(&trace.readout_pre[vi][k]) {
                    if pre <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            let input = &trace.readout_inputs[vi][k];
            let gl = &mut grad.readout.layers[k];
            gl.weight.add_outer(&delta, input);
            add_assign(&mut gl.bias, &delta);
            delta = m.readout.layers[k].weight.matvec_t(&delta);
        }
        dz.push(delta);
    }

    for l in (0..m.num_layers()).rev() {
        let layer = &m.layers[l];
        let z_in = &trace.embeddings[l];
        let d_in = z_in[0].len();
        let mut dz_in = vec![vec![0.0; d_in]; g.n()];
        let gl = &mut grad.layers[l];
        match (&trace.caches[l], m.kind) {
            (LayerCache::Vvc { concat, pre }, ModelKind::Vvc) => {
                let p = ports.expect("VVC backward needs ports");
                for v in g.nodes() {
                    let mut dpre = dz[v - 1].clone();
                    for (d, &x) in dpre.iter_mut().zip(&pre[v - 1]) {
                        if x <= 0.0 {
                            *d = 0.0;
                        }
                    }
                    gl.weight.add_outer(&dpre, &concat[v - 1]);
                    let dc = layer.weight.matvec_t(&dpre);
                    add_assign(&mut dz_in[v - 1], &dc[..d_in]);
                    for i in 1..=m.delta {
                        if let Some((t, _)) = p.lookup(v, i) {
                            let start = d_in + (i - 1) * (d_in + 1);
                            add_assign(&mut dz_in[t - 1], &dc[start..start + d_in]);
                        }
                    }
                }
            }
            (LayerCache::Mb, ModelKind::Mb) => {
                for v in g.nodes() {
                    let dv = &dz[v - 1];
                    add_assign(&mut dz_in[v - 1], &dv[..d_in]);
                    let deg = g.degree(v) as f64;
                    let dmean: Vec<f64> = dv[d_in..].iter().map(|&x| x / deg).collect();
                    let back = layer.weight.matvec_t(&dmean);
                    for &u in g.neighbors(v) {
                        gl.weight.add_outer(&dmean, &z_in[u - 1]);
                        add_assign(&mut dz_in[u - 1], &back);
                    }
                }
            }
            (LayerCache::Sb { transformed, winner }, ModelKind::Sb) => {
                let width = layer.weight.rows;
                let mut ds = vec![vec![0.0; width]; g.n()];
                for v in g.nodes() {
                    for k in 0..width {
                        ds[winner[v - 1][k] - 1][k] += dz[v - 1][k];
                    }
                }
                let gbias = gl.bias.as_mut().expect("SB gradient has a bias");
                for u in g.nodes() {
                    let s = &transformed[u - 1];
                    let dpre: Vec<f64> = ds[u - 1]
                        .iter()
                        .zip(s)
                        .map(|(&d, &sv)| d * sv * (1.0 - sv))
                        .collect();
                    if dpre.iter().all(|&x| x == 0.0) {
                        continue;
                    }
                    gl.weight.add_outer(&dpre, &z_in[u - 1]);
                    add_assign(gbias, &dpre);
                    add_assign(&mut dz_in[u - 1], &layer.weight.matvec_t(&dpre));
                }
            }
            _ => unreachable!("trace does not match model kind"),
        }
        dz = dz_in;
    }

    let mut finite = true;
    grad.for_each_param_mut(|x| finite &= x.is_finite());
    if !finite {
        return Err(Error::NumericalError("non-finite gradient".into()));
    }
    Ok(grad)
}
