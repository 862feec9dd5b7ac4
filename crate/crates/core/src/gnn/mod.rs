//! Forward passes for SB-, MB- and VVC-class GNNs, node features, and
//! edge-output decoding.

mod backward;
mod features;
mod forward;
pub mod linalg;
mod model;

pub use backward::backward;
pub use features::{decode_edge_output, node_features, readout_label, EdgePortLabels, FeatureMatrix, FeatureSpec};
pub use forward::{cpngnn_forward, forward, forward_trace, mbgnn_forward, sbgnn_forward, Trace};
pub(crate) use forward::{vvc_concat, vvc_update};
pub use linalg::Matrix;
pub use model::{Affine, Layer, Model, ModelConfig, ModelKind, Readout};

/// Greedy labels: argmax of each node's readout vector.
pub fn predict_labels(logits: &[Vec<f64>]) -> Vec<usize> {
    logits.iter().map(|z| readout_label(z)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{consistent_port_numbering, generate, DegreeBound, Graph, GraphKind, PortNumbering};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn degree_x(g: &Graph, delta: usize) -> FeatureMatrix {
        node_features(g, FeatureSpec::Degree, None, DegreeBound::new(delta).unwrap()).unwrap()
    }

    fn bits(v: &[f64]) -> Vec<u64> {
        v.iter().map(|x| x.to_bits()).collect()
    }

    #[test]
    fn zero_weights_give_equal_outputs() {
        let g = generate(GraphKind::RandomBounded { n: 9, delta: 3 }, 2).unwrap();
        let p = consistent_port_numbering(&g);
        let m = Model::zeros(&ModelConfig::two_layer(ModelKind::Vvc, 3, 3, 4)).unwrap();
        let out = cpngnn_forward(&m, &g, &p, &degree_x(&g, 3)).unwrap();
        assert!(out.iter().all(|z| bits(z) == bits(&out[0])));

        let mut sb = Model::zeros(&ModelConfig::two_layer(ModelKind::Sb, 3, 3, 4)).unwrap();
        for layer in &mut sb.layers {
            layer.bias = Some(vec![0.3; 4]);
        }
        let out = sbgnn_forward(&sb, &g, &degree_x(&g, 3)).unwrap();
        assert!(out.iter().all(|z| bits(z) == bits(&out[0])));
    }

    #[test]
    fn port_scalars_separate_star_leaves() {
        let star = generate(GraphKind::Star { k: 3 }, 0).unwrap();
        let p = consistent_port_numbering(&star);
        let x = degree_x(&star, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cfg = ModelConfig::two_layer(ModelKind::Vvc, 3, 3, 8);
        let differing = (0..100)
            .filter(|_| {
                let m = Model::random(&cfg, 1.0, &mut rng).unwrap();
                let out = cpngnn_forward(&m, &star, &p, &x).unwrap();
                // nodes 2 and 3 sit on center ports 1 and 2
                out[1] != out[2]
            })
            .count();
        assert!(differing >= 95, "only {differing} draws separated the leaves");
    }

    #[test]
    fn broadcast_models_cannot_separate_leaves() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for k in 2..=5 {
            let star = generate(GraphKind::Star { k }, 0).unwrap();
            let x = degree_x(&star, k);
            for kind in [ModelKind::Mb, ModelKind::Sb] {
                let m = Model::random(&ModelConfig::two_layer(kind, k, k, 5), 1.0, &mut rng).unwrap();
                let out = forward(&m, &star, None, &x).unwrap();
                for v in 3..=k + 1 {
                    assert_eq!(bits(&out[1]), bits(&out[v - 1]));
                }
            }
        }
    }

    #[test]
    fn regular_graph_uniform_features_mb() {
        let c = generate(GraphKind::Cycle { n: 7 }, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = Model::random(&ModelConfig::two_layer(ModelKind::Mb, 2, 2, 3), 1.0, &mut rng).unwrap();
        let out = mbgnn_forward(&m, &c, &degree_x(&c, 2)).unwrap();
        assert!(out.iter().all(|z| bits(z) == bits(&out[0])));
    }

    #[test]
    fn sb_pooling_ignores_multiplicity() {
        // Node 1 sees feature multiset {a, a, b} in the first graph and {a, b}
        // in the second; the pooled value must agree.
        let g1 = Graph::new(4, &[(1, 2), (1, 3), (1, 4)]).unwrap();
        let g2 = Graph::new(3, &[(1, 2), (1, 3)]).unwrap();
        let a = vec![1.0, 0.0];
        let b = vec![0.0, 1.0];
        let x1 = FeatureMatrix::new(vec![vec![0.5, 0.5], a.clone(), a.clone(), b.clone()]).unwrap();
        let x2 = FeatureMatrix::new(vec![vec![0.5, 0.5], a, b]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = ModelConfig {
            kind: ModelKind::Sb,
            delta: 3,
            input_dim: 2,
            layer_widths: vec![4],
            readout_hidden: None,
            labels: 2,
        };
        for _ in 0..20 {
            let m = Model::random(&cfg, 2.0, &mut rng).unwrap();
            let t1 = forward_trace(&m, &g1, None, &x1).unwrap();
            let t2 = forward_trace(&m, &g2, None, &x2).unwrap();
            assert_eq!(bits(&t1.embeddings[1][0]), bits(&t2.embeddings[1][0]));
            assert_eq!(bits(&t1.logits[0]), bits(&t2.logits[0]));
        }
    }

    #[test]
    fn disjoint_copies_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let tri = generate(GraphKind::Cycle { n: 3 }, 0).unwrap();
        let g = generate(GraphKind::RandomBounded { n: 8, delta: 3 }, 4).unwrap();
        for base in [tri, g] {
            let p = consistent_port_numbering(&base);
            let union = base.disjoint_union(&base);
            let pu = p.disjoint_union(base.n(), &p);
            let x = degree_x(&base, 3);
            let xu = x.stack(&x).unwrap();
            for kind in [ModelKind::Vvc, ModelKind::Mb, ModelKind::Sb] {
                let m = Model::random(&ModelConfig::two_layer(kind, 3, 3, 4), 1.0, &mut rng).unwrap();
                let out = forward(&m, &union, Some(&pu), &xu).unwrap();
                for v in 0..base.n() {
                    assert_eq!(bits(&out[v]), bits(&out[v + base.n()]));
                }
            }
        }
    }

    #[test]
    fn shape_and_kind_errors() {
        let star = generate(GraphKind::Star { k: 3 }, 0).unwrap();
        let p = consistent_port_numbering(&star);
        let m = Model::zeros(&ModelConfig::two_layer(ModelKind::Vvc, 3, 3, 4)).unwrap();
        let narrow = FeatureMatrix::new(vec![vec![1.0, 0.0]; 4]).unwrap();
        assert!(matches!(cpngnn_forward(&m, &star, &p, &narrow), Err(crate::Error::ShapeError(_))));
        assert!(matches!(mbgnn_forward(&m, &star, &degree_x(&star, 3)), Err(crate::Error::ShapeError(_))));
        let mb = Model::zeros(&ModelConfig::two_layer(ModelKind::Mb, 3, 3, 4)).unwrap();
        let iso = Graph::new(4, &[(1, 2), (1, 3)]).unwrap();
        assert!(matches!(
            mbgnn_forward(&mb, &iso, &degree_x(&iso, 3)),
            Err(crate::Error::IsolatedNode(4))
        ));
        // VVC handles isolated nodes: every port is the empty symbol.
        let pi = consistent_port_numbering(&iso);
        assert!(cpngnn_forward(&m, &iso, &pi, &degree_x(&iso, 3)).is_ok());
    }

    /// Central finite differences of `sum_v <w_v, logits_v>`.
    fn numeric_gradient(m: &Model, g: &Graph, p: Option<&PortNumbering>, x: &FeatureMatrix, w: &[Vec<f64>], h: f64) -> Vec<f64> {
        let base = m.params();
        let objective = |params: &[f64]| {
            let mut mm = m.clone();
            mm.set_params(params).unwrap();
            let out = forward(&mm, g, p, x).unwrap();
            out.iter()
                .zip(w)
                .map(|(z, wv)| z.iter().zip(wv).map(|(a, b)| a * b).sum::<f64>())
                .sum::<f64>()
        };
        (0..base.len())
            .map(|k| {
                let mut plus = base.clone();
                let mut minus = base.clone();
                plus[k] += h;
                minus[k] -= h;
                (objective(&plus) - objective(&minus)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn backward_matches_finite_differences_all_kinds() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let g = generate(GraphKind::RandomBounded { n: 7, delta: 3 }, 8).unwrap();
        let p = consistent_port_numbering(&g);
        let x = degree_x(&g, 3);
        for kind in [ModelKind::Vvc, ModelKind::Mb, ModelKind::Sb] {
            let m = Model::random(&ModelConfig::two_layer(kind, 3, 3, 4), 0.5, &mut rng).unwrap();
            let ports = (kind == ModelKind::Vvc).then_some(&p);
            let w: Vec<Vec<f64>> = (0..g.n()).map(|v| vec![1.0 + v as f64 * 0.1, -0.7]).collect();
            let trace = forward_trace(&m, &g, ports, &x).unwrap();
            let analytic = backward(&m, &g, ports, &trace, &w).unwrap().params();
            let numeric = numeric_gradient(&m, &g, ports, &x, &w, 1e-6);
            for (a, b) in analytic.iter().zip(&numeric) {
                assert!((a - b).abs() <= 1e-6 * (1.0 + a.abs().max(b.abs())), "{kind}: {a} vs {b}");
            }
        }
    }
}
