//! Exact solvers. Each returns the lexicographically smallest optimum.

use super::{EdgeSet, NodeSet};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Node-count cap for dominating set and vertex cover.
pub const MAX_NODES: usize = 24;
/// Edge-count cap for matching.
pub const MAX_EDGES: usize = 24;

fn node_cap(g: &Graph) -> Result<()> {
    if g.n() > MAX_NODES {
        return Err(Error::TooLarge {
            what: "n",
            size: g.n(),
            cap: MAX_NODES,
        });
    }
    Ok(())
}

fn bit(v: usize) -> u64 {
    1 << (v - 1)
}

fn closed_neighborhoods(g: &Graph) -> Vec<u64> {
    g.nodes()
        .map(|v| g.neighbors(v).iter().fold(bit(v), |m, &u| m | bit(u)))
        .collect()
}

/// Minimum dominating set by enumerating node subsets in increasing size,
/// lexicographic within a size, pruned by the lowest undominated node.
pub fn min_dominating_set(g: &Graph) -> Result<NodeSet> {
    node_cap(g)?;
    let n = g.n();
    let closed = closed_neighborhoods(g);
    let all = if n == 0 { 0 } else { u64::MAX >> (64 - n) };
    let reach = g.max_degree() + 1;
    for k in 0..=n {
        if let Some(mask) = dominate_search(&closed, all, 0, 0, 0, k, reach) {
            return Ok(NodeSet::from_mask(mask, n));
        }
    }
    unreachable!("the full node set dominates")
}

/// Extends `chosen` with `slots` more nodes of index `>= next` (0-based).
fn dominate_search(
    closed: &[u64],
    all: u64,
    chosen: u64,
    dominated: u64,
    next: usize,
    slots: usize,
    reach: usize,
) -> Option<u64> {
    if dominated == all {
        return Some(chosen);
    }
    if slots == 0 {
        return None;
    }
    let undominated = (all & !dominated).count_ones() as usize;
    if undominated > slots * reach {
        return None;
    }
    // The lowest undominated node needs a dominator among the later choices.
    let u = (all & !dominated).trailing_zeros() as usize;
    let later = !((1u64 << next) - 1);
    if closed[u] & later == 0 {
        return None;
    }
    for v in next..closed.len() {
        if let Some(found) = dominate_search(
            closed,
            all,
            chosen | (1 << v),
            dominated | closed[v],
            v + 1,
            slots - 1,
            reach,
        ) {
            return Some(found);
        }
        // Skipping every dominator of u leaves it undominated.
        if closed[u] >> (v + 1) == 0 {
            break;
        }
    }
    None
}

struct CoverSearch<'a> {
    edges: &'a [(usize, usize)],
    best: usize,
}

impl CoverSearch<'_> {
    /// Forces endpoints of edges whose other endpoint is excluded; returns
    /// `None` when an edge has both endpoints excluded.
    fn propagate(&self, mut inn: u64, out: u64) -> Option<u64> {
        loop {
            let mut changed = false;
            for &(u, v) in self.edges {
                let (bu, bv) = (bit(u), bit(v));
                if inn & (bu | bv) != 0 {
                    continue;
                }
                match (out & bu != 0, out & bv != 0) {
                    (true, true) => return None,
                    (true, false) => inn |= bv,
                    (false, true) => inn |= bu,
                    (false, false) => continue,
                }
                changed = true;
            }
            if !changed {
                return Some(inn);
            }
        }
    }

    fn search(&mut self, inn: u64, out: u64) {
        let Some(inn) = self.propagate(inn, out) else {
            return;
        };
        let size = inn.count_ones() as usize;
        if size >= self.best {
            return;
        }
        let uncovered: Vec<(usize, usize)> = self
            .edges
            .iter()
            .copied()
            .filter(|&(u, v)| inn & (bit(u) | bit(v)) == 0)
            .collect();
        let Some(&(u, _)) = uncovered.first() else {
            self.best = size;
            return;
        };
        // Any matching among uncovered edges needs one cover node per edge.
        let mut used = 0u64;
        let mut lower = 0;
        for &(a, b) in &uncovered {
            if used & (bit(a) | bit(b)) == 0 {
                used |= bit(a) | bit(b);
                lower += 1;
            }
        }
        if size + lower >= self.best {
            return;
        }
        self.search(inn | bit(u), out);
        self.search(inn, out | bit(u));
    }
}

/// Size of a minimum vertex cover containing `forced_in` and avoiding
/// `forced_out`, or `None` if no such cover exists.
fn cover_size(g: &Graph, forced_in: u64, forced_out: u64) -> Option<usize> {
    let mut s = CoverSearch {
        edges: g.edges(),
        best: g.n() + 1,
    };
    s.search(forced_in, forced_out);
    (s.best <= g.n()).then_some(s.best)
}

/// Size of a minimum vertex cover, by branch and bound on uncovered edges.
pub fn min_vertex_cover_size(g: &Graph) -> Result<usize> {
    node_cap(g)?;
    Ok(cover_size(g, 0, 0).expect("the full node set covers"))
}

/// Minimum vertex cover: branch and bound on uncovered edges (take the lower
/// endpoint, or exclude it and take all its neighbors), then a greedy pass
/// that fixes nodes in increasing id order to pick the lexicographically
/// smallest optimum.
pub fn min_vertex_cover(g: &Graph) -> Result<NodeSet> {
    let k = min_vertex_cover_size(g)?;
    let (mut inn, mut out) = (0u64, 0u64);
    for v in g.nodes() {
        if inn.count_ones() as usize == k {
            break;
        }
        if cover_size(g, inn | bit(v), out) == Some(k) {
            inn |= bit(v);
        } else {
            out |= bit(v);
        }
    }
    let cover = NodeSet::from_mask(inn, g.n());
    debug_assert!(super::is_vertex_cover(g, &cover));
    Ok(cover)
}

struct MatchingSearch<'a> {
    edges: &'a [(usize, usize)],
    best: Vec<(usize, usize)>,
    current: Vec<(usize, usize)>,
}

impl MatchingSearch<'_> {
    /// Include-first search over edges `idx..`; the first maximum found is
    /// the lexicographically smallest.
    fn search(&mut self, idx: usize, used: u64) {
        if self.current.len() > self.best.len() {
            self.best = self.current.clone();
        }
        if idx == self.edges.len() {
            return;
        }
        let rest = &self.edges[idx..];
        let free_endpoints = rest
            .iter()
            .fold(0u64, |m, &(u, v)| {
                if used & (bit(u) | bit(v)) == 0 {
                    m | bit(u) | bit(v)
                } else {
                    m
                }
            })
            .count_ones() as usize;
        if self.current.len() + free_endpoints / 2 <= self.best.len() {
            return;
        }
        let (u, v) = self.edges[idx];
        if used & (bit(u) | bit(v)) == 0 {
            self.current.push((u, v));
            self.search(idx + 1, used | bit(u) | bit(v));
            self.current.pop();
        }
        self.search(idx + 1, used);
    }
}

/// Maximum matching by pruned enumeration of edge subsets.
pub fn max_matching(g: &Graph) -> Result<EdgeSet> {
    if g.m() > MAX_EDGES {
        return Err(Error::TooLarge {
            what: "m",
            size: g.m(),
            cap: MAX_EDGES,
        });
    }
    if g.n() > 64 {
        // Node ids index a 64-bit mask.
        return Err(Error::TooLarge {
            what: "n",
            size: g.n(),
            cap: 64,
        });
    }
    let mut s = MatchingSearch {
        edges: g.edges(),
        best: Vec::new(),
        current: Vec::new(),
    };
    s.search(0, 0);
    Ok(EdgeSet::from_sorted(s.best))
}
