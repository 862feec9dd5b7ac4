//! Exact small-instance solvers, validity checks, trivial baselines, and
//! exact approximation ratios for minimum dominating set, minimum vertex
//! cover, and maximum matching.

mod exact;
pub mod exhaustive;

use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio as Rational;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

pub use exact::{max_matching, min_dominating_set, min_vertex_cover, min_vertex_cover_size, MAX_EDGES, MAX_NODES};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Sorted, duplicate-free node ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct NodeSet(Vec<usize>);

impl NodeSet {
    pub fn new(g: &Graph, mut ids: Vec<usize>) -> Result<Self> {
        ids.sort_unstable();
        ids.dedup();
        if let Some(&bad) = ids.iter().find(|&&v| v == 0 || v > g.n()) {
            return Err(Error::InvalidNode { node: bad, n: g.n() });
        }
        Ok(Self(ids))
    }

    pub(crate) fn from_mask(mask: u64, n: usize) -> Self {
        Self((1..=n).filter(|&v| mask >> (v - 1) & 1 == 1).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn without(&self, v: usize) -> NodeSet {
        NodeSet(self.0.iter().copied().filter(|&u| u != v).collect())
    }
}

/// Sorted, duplicate-free canonical edges.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct EdgeSet(Vec<(usize, usize)>);

impl EdgeSet {
    pub fn new(g: &Graph, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut canon: Vec<_> = edges.into_iter().map(|(u, v)| (u.min(v), u.max(v))).collect();
        canon.sort_unstable();
        canon.dedup();
        if let Some(&(u, v)) = canon.iter().find(|&&(u, v)| !g.has_edge(u, v)) {
            return Err(Error::InvalidParams(format!("{{{u}, {v}}} is not an edge")));
        }
        Ok(Self(canon))
    }

    pub(crate) fn from_sorted(edges: Vec<(usize, usize)>) -> Self {
        Self(edges)
    }

    pub fn as_slice(&self) -> &[(usize, usize)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    #[value(name = "mds")]
    DominatingSet,
    #[value(name = "mvc")]
    VertexCover,
    Matching,
}

impl Problem {
    pub fn sense(self) -> Sense {
        match self {
            Problem::DominatingSet | Problem::VertexCover => Sense::Min,
            Problem::Matching => Sense::Max,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Candidate {
    Nodes(NodeSet),
    Edges(EdgeSet),
}

pub fn is_dominating_set(g: &Graph, d: &NodeSet) -> bool {
    g.nodes()
        .all(|v| d.contains(v) || g.neighbors(v).iter().any(|&u| d.contains(u)))
}

pub fn is_vertex_cover(g: &Graph, c: &NodeSet) -> bool {
    g.edges().iter().all(|&(u, v)| c.contains(u) || c.contains(v))
}

pub fn is_matching(g: &Graph, m: &EdgeSet) -> bool {
    let mut used = vec![false; g.n() + 1];
    for &(u, v) in m.as_slice() {
        if !g.has_edge(u, v) || used[u] || used[v] {
            return false;
        }
        used[u] = true;
        used[v] = true;
    }
    true
}

/// Validity of `candidate` for `problem`; no optimality claim.
pub fn check(problem: Problem, g: &Graph, candidate: &Candidate) -> bool {
    match (problem, candidate) {
        (Problem::DominatingSet, Candidate::Nodes(d)) => is_dominating_set(g, d),
        (Problem::VertexCover, Candidate::Nodes(c)) => is_vertex_cover(g, c),
        (Problem::Matching, Candidate::Edges(m)) => is_matching(g, m),
        _ => false,
    }
}

/// Every node: a dominating set within `Delta + 1` of optimal.
pub fn all_nodes_baseline(g: &Graph) -> NodeSet {
    NodeSet(g.nodes().collect())
}

/// Greedy maximal matching over the edges in canonical order, or in a seeded
/// shuffle of it.
pub fn greedy_maximal_matching(g: &Graph, seed: Option<u64>) -> EdgeSet {
    let mut order = g.edges().to_vec();
    if let Some(seed) = seed {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let mut used = vec![false; g.n() + 1];
    let mut out = Vec::new();
    for (u, v) in order {
        if !used[u] && !used[v] {
            used[u] = true;
            used[v] = true;
            out.push((u, v));
        }
    }
    out.sort_unstable();
    EdgeSet(out)
}

/// Endpoints of a greedy maximal matching: a vertex cover at most twice the
/// minimum. This is the centralized greedy, not a local algorithm.
pub fn matching_vc_baseline(g: &Graph, seed: Option<u64>) -> NodeSet {
    let m = greedy_maximal_matching(g, seed);
    let mut ids: Vec<usize> = m.as_slice().iter().flat_map(|&(u, v)| [u, v]).collect();
    ids.sort_unstable();
    NodeSet(ids)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Min,
    Max,
}

/// Exact approximation ratio; `Infinite` when a maximization candidate is
/// empty but the optimum is not.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ratio {
    Finite(Rational<u64>),
    Infinite,
}

impl Ratio {
    pub fn integer(k: u64) -> Self {
        Ratio::Finite(Rational::from_integer(k))
    }

    pub fn new(num: u64, den: u64) -> Self {
        Ratio::Finite(Rational::new(num, den))
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Ratio::Finite(a), Ratio::Finite(b)) => a.cmp(b),
            (Ratio::Finite(_), Ratio::Infinite) => Ordering::Less,
            (Ratio::Infinite, Ratio::Finite(_)) => Ordering::Greater,
            (Ratio::Infinite, Ratio::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Finite(r) if *r.denom() == 1 => write!(f, "{}", r.numer()),
            Ratio::Finite(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Ratio::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// `candidate / opt` for minimization, `opt / candidate` for maximization.
pub fn approx_ratio(candidate_size: usize, opt_size: usize, sense: Sense) -> Result<Ratio> {
    let (c, o) = (candidate_size as u64, opt_size as u64);
    match sense {
        Sense::Min if o == 0 => Err(Error::Undefined),
        Sense::Min => Ok(Ratio::new(c, o)),
        Sense::Max if c == 0 && o == 0 => Err(Error::Undefined),
        Sense::Max if c == 0 => Ok(Ratio::Infinite),
        Sense::Max => Ok(Ratio::new(o, c)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphKind};

    fn star3() -> Graph {
        generate(GraphKind::Star { k: 3 }, 0).unwrap()
    }

    fn path(n: usize) -> Graph {
        generate(GraphKind::Path { n }, 0).unwrap()
    }

    #[test]
    fn checks() {
        let s = star3();
        let tri = generate(GraphKind::Cycle { n: 3 }, 0).unwrap();
        assert!(check(Problem::DominatingSet, &s, &Candidate::Nodes(NodeSet::new(&s, vec![1]).unwrap())));
        assert!(!check(Problem::VertexCover, &tri, &Candidate::Nodes(NodeSet::new(&tri, vec![1]).unwrap())));
        let two = EdgeSet::new(&s, vec![(1, 2), (1, 3)]).unwrap();
        assert!(!check(Problem::Matching, &s, &Candidate::Edges(two)));
        assert!(!check(Problem::Matching, &s, &Candidate::Nodes(NodeSet::new(&s, vec![1]).unwrap())));
        assert!(EdgeSet::new(&s, vec![(2, 3)]).is_err());
    }

    #[test]
    fn all_nodes_ratios() {
        for (g, expected) in [
            (star3(), Ratio::integer(4)),
            (generate(GraphKind::Cycle { n: 3 }, 0).unwrap(), Ratio::integer(3)),
            (path(2), Ratio::integer(2)),
        ] {
            let opt = min_dominating_set(&g).unwrap();
            let r = approx_ratio(all_nodes_baseline(&g).len(), opt.len(), Sense::Min).unwrap();
            assert_eq!(r, expected);
            assert!(r <= Ratio::integer(g.max_degree() as u64 + 1));
        }
    }

    #[test]
    fn matching_cover_baseline() {
        let p4 = path(4);
        let vc = matching_vc_baseline(&p4, None);
        assert_eq!(vc.as_slice(), &[1, 2, 3, 4]);
        assert_eq!(approx_ratio(vc.len(), min_vertex_cover(&p4).unwrap().len(), Sense::Min).unwrap(), Ratio::integer(2));

        let tri = generate(GraphKind::Cycle { n: 3 }, 0).unwrap();
        let vc = matching_vc_baseline(&tri, None);
        assert_eq!(vc.len(), 2);
        assert!(is_vertex_cover(&tri, &vc));

        let s = star3();
        let vc = matching_vc_baseline(&s, None);
        assert_eq!(vc.as_slice(), &[1, 2]);
        assert_eq!(approx_ratio(vc.len(), 1, Sense::Min).unwrap(), Ratio::integer(2));

        let shuffled = matching_vc_baseline(&p4, Some(3));
        assert!(is_vertex_cover(&p4, &shuffled));
    }

    #[test]
    fn ratio_arithmetic() {
        assert_eq!(approx_ratio(4, 1, Sense::Min).unwrap(), Ratio::integer(4));
        assert_eq!(approx_ratio(2, 3, Sense::Max).unwrap(), Ratio::new(3, 2));
        assert_eq!(approx_ratio(0, 1, Sense::Max).unwrap(), Ratio::Infinite);
        assert!(matches!(approx_ratio(3, 0, Sense::Min), Err(Error::Undefined)));
        assert_eq!(Ratio::new(3, 2).to_string(), "3/2");
        assert_eq!(Ratio::Infinite.to_string(), "inf");
        assert!(Ratio::new(7, 2) < Ratio::integer(4));
        assert!(Ratio::Infinite > Ratio::integer(1000));
    }
}
