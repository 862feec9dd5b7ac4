//! Plain full enumeration over all subsets, used to cross-check the exact
//! solvers. Exponential in `n` (or `m`); keep inputs small.

use crate::graph::Graph;

fn node_mask(v: usize) -> u64 {
    1 << (v - 1)
}

/// Smallest dominating set size over all `2^n` node subsets.
pub fn dominating_set_size(g: &Graph) -> usize {
    assert!(g.n() <= 24, "exhaustive search is limited to 24 nodes");
    let closed: Vec<u64> = g
        .nodes()
        .map(|v| g.neighbors(v).iter().fold(node_mask(v), |m, &u| m | node_mask(u)))
        .collect();
    let full = (1u64 << g.n()) - 1;
    (0..=full)
        .filter(|&s| {
            let covered = (0..g.n())
                .filter(|&i| s >> i & 1 == 1)
                .fold(0u64, |m, i| m | closed[i]);
            covered == full
        })
        .map(|s| s.count_ones() as usize)
        .min()
        .unwrap_or(0)
}

/// Smallest vertex cover size over all `2^n` node subsets.
pub fn vertex_cover_size(g: &Graph) -> usize {
    assert!(g.n() <= 24, "exhaustive search is limited to 24 nodes");
    let edges: Vec<u64> = g
        .edges()
        .iter()
        .map(|&(u, v)| node_mask(u) | node_mask(v))
        .collect();
    (0..1u64 << g.n())
        .filter(|&s| edges.iter().all(|&e| s & e != 0))
        .map(|s| s.count_ones() as usize)
        .min()
        .unwrap_or(0)
}

/// Largest matching size over all `2^m` edge subsets.
pub fn matching_size(g: &Graph) -> usize {
    assert!(g.m() <= 24, "exhaustive search is limited to 24 edges");
    let edges: Vec<u64> = g
        .edges()
        .iter()
        .map(|&(u, v)| node_mask(u) | node_mask(v))
        .collect();
    (0..1u64 << g.m())
        .filter(|&s| {
            let mut used = 0u64;
            for (i, &e) in edges.iter().enumerate() {
                if s >> i & 1 == 1 {
                    if used & e != 0 {
                        return false;
                    }
                    used |= e;
                }
            }
            true
        })
        .map(|s| s.count_ones() as usize)
        .max()
        .unwrap_or(0)
}
