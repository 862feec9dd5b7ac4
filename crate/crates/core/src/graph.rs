//! Simple undirected bounded-degree graphs, consistent port numberings,
//! weak 2-colorings, seeded generators, and the JSON graph file format.
//!
//! Nodes are numbered `1..=n`. Ports are `(v, i)` with `1 <= i <= deg(v)`.

use std::collections::{BTreeSet, VecDeque};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::header::Header;

/// A simple undirected graph on nodes `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    adjacency: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Builds a canonical graph from an edge list in any order and orientation.
    pub fn new(n: usize, edge_list: &[(usize, usize)]) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &(a, b) in edge_list {
            for x in [a, b] {
                if x == 0 || x > n {
                    return Err(Error::InvalidNode { node: x, n });
                }
            }
            if a == b {
                return Err(Error::InvalidEdge(a, b));
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(Error::DuplicateEdge(e.0, e.1));
            }
        }
        let edges: Vec<_> = seen.into_iter().collect();
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adjacency[u - 1].push(v);
            adjacency[v - 1].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            n,
            adjacency,
            edges,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = usize> {
        1..=self.n
    }

    /// Sorted neighbor ids of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v - 1]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v - 1].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// Canonical edges `(u, v)` with `u < v`, sorted lexicographically.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v
            && (1..=self.n).contains(&u)
            && (1..=self.n).contains(&v)
            && self.adjacency[u - 1].binary_search(&v).is_ok()
    }

    /// Index of `(u, v)` in [`Graph::edges`].
    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        self.edges.binary_search(&(u.min(v), u.max(v))).ok()
    }

    /// Returns the center if this graph is a star `K_{1,k}` with `k >= 2`.
    pub fn star_center(&self) -> Option<usize> {
        if self.n < 3 || self.m() != self.n - 1 {
            return None;
        }
        let center = self.nodes().find(|&v| self.degree(v) == self.n - 1)?;
        self.nodes()
            .all(|v| v == center || self.degree(v) == 1)
            .then_some(center)
    }

    /// Connected components, each sorted, ordered by their lowest node.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for root in self.nodes() {
            if seen[root - 1] {
                continue;
            }
            seen[root - 1] = true;
            let mut comp = vec![root];
            let mut queue = VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                for &u in self.neighbors(v) {
                    if !seen[u - 1] {
                        seen[u - 1] = true;
                        comp.push(u);
                        queue.push_back(u);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Disjoint union: nodes of `other` are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let shift = self.n;
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|&(u, v)| (u + shift, v + shift)));
        Graph::new(self.n + other.n, &edges).expect("union of valid graphs is valid")
    }
}

/// Convenience alias for [`Graph::new`].
pub fn build_graph(n: usize, edge_list: &[(usize, usize)]) -> Result<Graph> {
    Graph::new(n, edge_list)
}

/// Maximum permitted degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DegreeBound(usize);

impl DegreeBound {
    pub fn new(delta: usize) -> Result<Self> {
        if delta == 0 {
            return Err(Error::InvalidParams("degree bound must be positive".into()));
        }
        Ok(Self(delta))
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn check(self, g: &Graph) -> Result<()> {
        match g.nodes().find(|&v| g.degree(v) > self.0) {
            Some(v) => Err(Error::DegreeExceeded(v, g.degree(v), self.0)),
            None => Ok(()),
        }
    }

    /// Smallest bound admitting `g` (at least 1).
    pub fn of(g: &Graph) -> Self {
        Self(g.max_degree().max(1))
    }
}

/// A port `(node, index)`, both 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Port {
    pub node: usize,
    pub index: usize,
}

impl Port {
    pub fn new(node: usize, index: usize) -> Self {
        Self { node, index }
    }
}

/// A consistent port numbering: an involution on the ports of a graph that
/// realizes every edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PortNumbering {
    forward: Vec<Vec<Port>>,
}

impl PortNumbering {
    /// Numbers edges one at a time in the given order, giving each endpoint
    /// its next free port. `order` must list every edge of `g` exactly once.
    pub fn from_edge_order(g: &Graph, order: &[(usize, usize)]) -> Result<Self> {
        if order.len() != g.m() {
            return Err(Error::InvalidPorts(format!(
                "edge order lists {} edges, graph has {}",
                order.len(),
                g.m()
            )));
        }
        let mut used = vec![false; g.m()];
        let mut counter = vec![0usize; g.n()];
        let mut forward: Vec<Vec<Port>> = g
            .nodes()
            .map(|v| vec![Port::new(0, 0); g.degree(v)])
            .collect();
        for &(u, v) in order {
            let idx = g
                .edge_index(u, v)
                .filter(|_| g.has_edge(u, v))
                .ok_or_else(|| Error::InvalidPorts(format!("{{{u}, {v}}} is not an edge")))?;
            if std::mem::replace(&mut used[idx], true) {
                return Err(Error::InvalidPorts(format!("edge {{{u}, {v}}} listed twice")));
            }
            counter[u - 1] += 1;
            counter[v - 1] += 1;
            let (cu, cv) = (counter[u - 1], counter[v - 1]);
            forward[u - 1][cu - 1] = Port::new(v, cv);
            forward[v - 1][cv - 1] = Port::new(u, cu);
        }
        Ok(Self { forward })
    }

    /// Builds a numbering from explicit `p(from) = to` assignments and checks
    /// totality, edge realization, and consistency.
    pub fn from_assignments(g: &Graph, pairs: &[(Port, Port)]) -> Result<Self> {
        let mut forward: Vec<Vec<Option<Port>>> =
            g.nodes().map(|v| vec![None; g.degree(v)]).collect();
        let in_range = |p: Port| p.node >= 1 && p.node <= g.n() && p.index >= 1 && p.index <= g.degree(p.node);
        for &(from, to) in pairs {
            if !in_range(from) || !in_range(to) {
                return Err(Error::InvalidPorts(format!("port out of range in {from:?} -> {to:?}")));
            }
            let slot = &mut forward[from.node - 1][from.index - 1];
            if slot.is_some_and(|prev| prev != to) {
                return Err(Error::InvalidPorts(format!("port {from:?} assigned twice")));
            }
            *slot = Some(to);
        }
        let forward: Vec<Vec<Port>> = forward
            .into_iter()
            .enumerate()
            .map(|(vi, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(ii, p)| {
                        p.ok_or_else(|| {
                            Error::InvalidPorts(format!("port ({}, {}) unassigned", vi + 1, ii + 1))
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let pn = Self { forward };
        pn.validate(g)?;
        Ok(pn)
    }

    /// Checks that `self` is a consistent port numbering of `g`.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        if self.forward.len() != g.n() {
            return Err(Error::InvalidPorts("node count mismatch".into()));
        }
        for v in g.nodes() {
            if self.forward[v - 1].len() != g.degree(v) {
                return Err(Error::InvalidPorts(format!("node {v} has wrong port count")));
            }
            let mut targets = BTreeSet::new();
            for (i, &to) in self.forward[v - 1].iter().enumerate() {
                let from = Port::new(v, i + 1);
                if !g.has_edge(v, to.node) {
                    return Err(Error::InvalidPorts(format!("{from:?} -> {to:?} is not along an edge")));
                }
                if to.index == 0 || to.index > g.degree(to.node) || self.get(to) != from {
                    return Err(Error::InvalidPorts(format!("not an involution at {from:?}")));
                }
                targets.insert(to.node);
            }
            if targets.len() != g.degree(v) {
                return Err(Error::InvalidPorts(format!("node {v} does not realize every edge")));
            }
        }
        Ok(())
    }

    /// `p(v, i)`. Panics if the port does not exist.
    pub fn get(&self, port: Port) -> Port {
        self.forward[port.node - 1][port.index - 1]
    }

    /// All assignments `(from, to)` sorted by `from`.
    pub fn assignments(&self) -> Vec<(Port, Port)> {
        self.forward
            .iter()
            .enumerate()
            .flat_map(|(vi, row)| {
                row.iter()
                    .enumerate()
                    .map(move |(ii, &to)| (Port::new(vi + 1, ii + 1), to))
            })
            .collect()
    }

    /// `(p_tail(v, i), p_n(v, i))`, or `None` when `i > deg(v)`.
    pub fn lookup(&self, v: usize, i: usize) -> Option<(usize, usize)> {
        let row = &self.forward[v - 1];
        if i == 0 || i > row.len() {
            return None;
        }
        // For an involution the port sending into (v, i) is p(v, i) itself.
        let Port { node, index } = row[i - 1];
        Some((node, index))
    }

    /// Port numbering of a disjoint union, matching [`Graph::disjoint_union`].
    pub fn disjoint_union(&self, left_n: usize, other: &PortNumbering) -> PortNumbering {
        let mut forward = self.forward.clone();
        forward.extend(other.forward.iter().map(|row| {
            row.iter()
                .map(|p| Port::new(p.node + left_n, p.index))
                .collect()
        }));
        PortNumbering { forward }
    }
}

/// Consistent port numbering from the canonical edge order.
pub fn consistent_port_numbering(g: &Graph) -> PortNumbering {
    PortNumbering::from_edge_order(g, g.edges()).expect("canonical order is complete")
}

/// Consistent port numbering from a seeded shuffle of the edge order.
pub fn shuffled_port_numbering(g: &Graph, seed: u64) -> PortNumbering {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = g.edges().to_vec();
    order.shuffle(&mut rng);
    PortNumbering::from_edge_order(g, &order).expect("shuffled order is complete")
}

/// `(p_tail(v, i), p_n(v, i))`; `None` realizes the out-of-range symbol.
pub fn port_lookup(p: &PortNumbering, v: usize, i: usize) -> Option<(usize, usize)> {
    p.lookup(v, i)
}

/// A 0/1 color per node.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Coloring(Vec<u8>);

impl Coloring {
    pub fn new(colors: Vec<u8>) -> Result<Self> {
        if colors.iter().any(|&c| c > 1) {
            return Err(Error::InvalidColoring("colors must be 0 or 1".into()));
        }
        Ok(Self(colors))
    }

    pub fn color(&self, v: usize) -> u8 {
        self.0[v - 1]
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    /// Every node has a neighbor of the opposite color.
    pub fn is_weak_two_coloring(&self, g: &Graph) -> bool {
        self.0.len() == g.n()
            && g.nodes().all(|v| {
                g.neighbors(v)
                    .iter()
                    .any(|&u| self.color(u) != self.color(v))
            })
    }

    /// No edge is monochromatic.
    pub fn is_proper(&self, g: &Graph) -> bool {
        self.0.len() == g.n() && g.edges().iter().all(|&(u, v)| self.color(u) != self.color(v))
    }
}

/// BFS layer-parity coloring, one BFS per component rooted at its lowest id.
pub fn weak_two_coloring(g: &Graph) -> Result<Coloring> {
    if let Some(v) = g.nodes().find(|&v| g.degree(v) == 0) {
        return Err(Error::NoWeakColoring(v));
    }
    let mut color = vec![0u8; g.n()];
    let mut visited = vec![false; g.n()];
    for root in g.nodes() {
        if visited[root - 1] {
            continue;
        }
        visited[root - 1] = true;
        let mut queue = VecDeque::from([(root, 0u8)]);
        while let Some((v, x)) = queue.pop_front() {
            color[v - 1] = x;
            for &u in g.neighbors(v) {
                if !visited[u - 1] {
                    visited[u - 1] = true;
                    queue.push_back((u, 1 - x));
                }
            }
        }
    }
    Ok(Coloring(color))
}

/// Graph families for [`generate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum GraphKind {
    /// `K_{1,k}` with center node 1.
    Star { k: usize },
    Path { n: usize },
    Cycle { n: usize },
    /// Random graph with `1 <= deg(v) <= delta`.
    RandomBounded { n: usize, delta: usize },
    /// Random bipartite graph, sides `1..=a` and `a+1..=a+b`, `1 <= deg(v) <= delta`.
    RandomBipartite { a: usize, b: usize, delta: usize },
}

/// Deterministic generator: a fixed `(kind, seed)` always yields the same graph.
pub fn generate(kind: GraphKind, seed: u64) -> Result<Graph> {
    let bad = |msg: &str| Err(Error::InvalidParams(msg.to_string()));
    match kind {
        GraphKind::Star { k } => {
            if k == 0 {
                return bad("star needs k >= 1");
            }
            let edges: Vec<_> = (2..=k + 1).map(|leaf| (1, leaf)).collect();
            Graph::new(k + 1, &edges)
        }
        GraphKind::Path { n } => {
            if n == 0 {
                return bad("path needs n >= 1");
            }
            let edges: Vec<_> = (1..n).map(|v| (v, v + 1)).collect();
            Graph::new(n, &edges)
        }
        GraphKind::Cycle { n } => {
            if n < 3 {
                return bad("cycle needs n >= 3");
            }
            let mut edges: Vec<_> = (1..n).map(|v| (v, v + 1)).collect();
            edges.push((n, 1));
            Graph::new(n, &edges)
        }
        GraphKind::RandomBounded { n, delta } => random_bounded(n, delta, seed),
        GraphKind::RandomBipartite { a, b, delta } => random_bipartite(a, b, delta, seed),
    }
}

struct EdgeBuilder {
    degree: Vec<usize>,
    edges: BTreeSet<(usize, usize)>,
    delta: usize,
}

impl EdgeBuilder {
    fn new(n: usize, delta: usize) -> Self {
        Self {
            degree: vec![0; n + 1],
            edges: BTreeSet::new(),
            delta,
        }
    }

    fn try_add(&mut self, u: usize, v: usize) -> bool {
        let e = (u.min(v), u.max(v));
        if u == v
            || self.degree[u] >= self.delta
            || self.degree[v] >= self.delta
            || self.edges.contains(&e)
        {
            return false;
        }
        self.edges.insert(e);
        self.degree[u] += 1;
        self.degree[v] += 1;
        true
    }

    fn finish(self, n: usize) -> Result<Graph> {
        let edges: Vec<_> = self.edges.into_iter().collect();
        Graph::new(n, &edges)
    }
}

fn random_bounded(n: usize, delta: usize, seed: u64) -> Result<Graph> {
    if n < 2 || delta == 0 {
        return Err(Error::InvalidParams("random_bounded needs n >= 2 and delta >= 1".into()));
    }
    if delta == 1 && n % 2 == 1 {
        return Err(Error::InvalidParams("delta = 1 requires an even node count".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(&mut rng);
    let mut b = EdgeBuilder::new(n, delta);
    // Perfect matching on the shuffled order gives min degree >= 1.
    for pair in order.chunks(2) {
        if let [u, v] = *pair {
            b.try_add(u, v);
        }
    }
    if n % 2 == 1 {
        let last = order[n - 1];
        let partner = order[rng.gen_range(0..n - 1)];
        b.try_add(last, partner);
    }
    let attempts = rng.gen_range(0..=n * delta);
    for _ in 0..attempts {
        let u = rng.gen_range(1..=n);
        let v = rng.gen_range(1..=n);
        b.try_add(u, v);
    }
    b.finish(n)
}

fn random_bipartite(a: usize, b: usize, delta: usize, seed: u64) -> Result<Graph> {
    if a == 0 || b == 0 || delta == 0 {
        return Err(Error::InvalidParams("random_bipartite needs a, b, delta >= 1".into()));
    }
    if a > b * delta || b > a * delta {
        return Err(Error::InvalidParams(format!(
            "no bipartite graph with sides {a}, {b} has all degrees in [1, {delta}]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut left: Vec<usize> = (1..=a).collect();
    let mut right: Vec<usize> = (a + 1..=a + b).collect();
    left.shuffle(&mut rng);
    right.shuffle(&mut rng);
    let mut builder = EdgeBuilder::new(a + b, delta);
    for i in 0..a.max(b) {
        builder.try_add(left[i % a], right[i % b]);
    }
    let attempts = rng.gen_range(0..=(a + b) * delta);
    for _ in 0..attempts {
        let u = left[rng.gen_range(0..a)];
        let v = right[rng.gen_range(0..b)];
        builder.try_add(u, v);
    }
    builder.finish(a + b)
}

/// On-disk graph representation. Ordering is canonical on write; any order
/// is accepted on read.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub header: Option<Header>,
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coloring: Option<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ports: Option<Vec<[[usize; 2]; 2]>>,
}

impl GraphFile {
    pub fn from_graph(g: &Graph) -> Self {
        Self {
            header: None,
            n: g.n(),
            edges: g.edges().iter().map(|&(u, v)| [u, v]).collect(),
            coloring: None,
            ports: None,
        }
    }

    pub fn with_coloring(mut self, c: &Coloring) -> Self {
        self.coloring = Some(c.as_slice().to_vec());
        self
    }

    pub fn with_ports(mut self, p: &PortNumbering) -> Self {
        self.ports = Some(
            p.assignments()
                .into_iter()
                .map(|(a, b)| [[a.node, a.index], [b.node, b.index]])
                .collect(),
        );
        self
    }

    pub fn with_header(mut self, header: Header) -> Self {
        self.header = Some(header);
        self
    }

    pub fn graph(&self) -> Result<Graph> {
        let edges: Vec<_> = self.edges.iter().map(|&[u, v]| (u, v)).collect();
        Graph::new(self.n, &edges)
    }

    pub fn coloring(&self, g: &Graph) -> Result<Option<Coloring>> {
        match &self.coloring {
            None => Ok(None),
            Some(c) if c.len() != g.n() => Err(Error::InvalidColoring(format!(
                "coloring has {} entries, graph has {} nodes",
                c.len(),
                g.n()
            ))),
            Some(c) => Coloring::new(c.clone()).map(Some),
        }
    }

    /// Listed ports; a pair may be given in one direction only.
    pub fn ports(&self, g: &Graph) -> Result<Option<PortNumbering>> {
        let Some(list) = &self.ports else {
            return Ok(None);
        };
        let mut pairs = Vec::with_capacity(2 * list.len());
        for &[[v, i], [u, j]] in list {
            let (a, b) = (Port::new(v, i), Port::new(u, j));
            pairs.push((a, b));
            pairs.push((b, a));
        }
        PortNumbering::from_assignments(g, &pairs).map(Some)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::new(3, &[(1, 2), (2, 3), (1, 3)]).unwrap()
    }

    #[test]
    fn builds_star_and_edge_cases() {
        let star = Graph::new(4, &[(1, 2), (1, 3), (1, 4)]).unwrap();
        assert_eq!(star.degree(1), 3);
        assert!((2..=4).all(|v| star.degree(v) == 1));
        assert_eq!(star.star_center(), Some(1));

        let single = Graph::new(1, &[]).unwrap();
        assert_eq!(single.degree(1), 0);

        let t = triangle();
        assert!(t.nodes().all(|v| t.degree(v) == 2));
        assert_eq!(t.edges(), &[(1, 2), (1, 3), (2, 3)]);
        assert_eq!(t.star_center(), None);
    }

    #[test]
    fn rejects_malformed_edges() {
        assert!(matches!(Graph::new(3, &[(2, 2)]), Err(Error::InvalidEdge(2, 2))));
        assert!(matches!(
            Graph::new(3, &[(1, 2), (2, 1)]),
            Err(Error::DuplicateEdge(1, 2))
        ));
        assert!(matches!(
            Graph::new(3, &[(1, 4)]),
            Err(Error::InvalidNode { node: 4, n: 3 })
        ));
        assert!(matches!(Graph::new(3, &[(0, 1)]), Err(Error::InvalidNode { .. })));
    }

    #[test]
    fn triangle_port_trace() {
        let p = consistent_port_numbering(&triangle());
        assert_eq!(p.get(Port::new(1, 1)), Port::new(2, 1));
        assert_eq!(p.get(Port::new(1, 2)), Port::new(3, 1));
        assert_eq!(p.get(Port::new(2, 2)), Port::new(3, 2));
        assert_eq!(p.get(Port::new(2, 1)), Port::new(1, 1));
        assert_eq!(p.get(Port::new(3, 1)), Port::new(1, 2));
        assert_eq!(p.get(Port::new(3, 2)), Port::new(2, 2));
        assert_eq!(port_lookup(&p, 1, 2), Some((3, 1)));
        assert_eq!(port_lookup(&p, 1, 3), None);
    }

    #[test]
    fn single_edge_and_star_ports() {
        let e = Graph::new(2, &[(1, 2)]).unwrap();
        let p = consistent_port_numbering(&e);
        assert_eq!(p.get(Port::new(1, 1)), Port::new(2, 1));
        assert_eq!(p.get(Port::new(2, 1)), Port::new(1, 1));

        let star = generate(GraphKind::Star { k: 3 }, 0).unwrap();
        let p = consistent_port_numbering(&star);
        for k in 1..=3 {
            assert_eq!(p.get(Port::new(1, k)), Port::new(k + 1, 1));
        }
        // leaf_2 is node 3
        assert_eq!(port_lookup(&p, 3, 1), Some((1, 2)));
        assert_eq!(port_lookup(&p, 3, 2), None);
    }

    #[test]
    fn explicit_assignments_are_validated() {
        let e = Graph::new(2, &[(1, 2)]).unwrap();
        let ok = PortNumbering::from_assignments(
            &e,
            &[(Port::new(1, 1), Port::new(2, 1)), (Port::new(2, 1), Port::new(1, 1))],
        );
        assert!(ok.is_ok());
        let missing = PortNumbering::from_assignments(&e, &[(Port::new(1, 1), Port::new(2, 1))]);
        assert!(matches!(missing, Err(Error::InvalidPorts(_))));

        // A 2-cycle on the center's ports of a path is not an involution.
        let path = generate(GraphKind::Path { n: 3 }, 0).unwrap();
        let bad = PortNumbering::from_assignments(
            &path,
            &[
                (Port::new(1, 1), Port::new(2, 1)),
                (Port::new(2, 1), Port::new(3, 1)),
                (Port::new(3, 1), Port::new(2, 2)),
                (Port::new(2, 2), Port::new(1, 1)),
            ],
        );
        assert!(matches!(bad, Err(Error::InvalidPorts(_))));
    }

    #[test]
    fn edge_order_must_be_complete() {
        let t = triangle();
        assert!(PortNumbering::from_edge_order(&t, &[(1, 2), (1, 3)]).is_err());
        assert!(PortNumbering::from_edge_order(&t, &[(1, 2), (2, 1), (1, 3)]).is_err());
        let p = PortNumbering::from_edge_order(&t, &[(3, 2), (1, 3), (2, 1)]).unwrap();
        p.validate(&t).unwrap();
        assert_eq!(p.get(Port::new(3, 1)), Port::new(2, 1));
    }

    #[test]
    fn weak_coloring_traces() {
        let path = generate(GraphKind::Path { n: 3 }, 0).unwrap();
        assert_eq!(weak_two_coloring(&path).unwrap().as_slice(), &[0, 1, 0]);
        let e = Graph::new(2, &[(1, 2)]).unwrap();
        assert_eq!(weak_two_coloring(&e).unwrap().as_slice(), &[0, 1]);
        let empty = Graph::new(2, &[]).unwrap();
        assert!(matches!(weak_two_coloring(&empty), Err(Error::NoWeakColoring(1))));
        // Triangle: weak but not proper.
        let c = weak_two_coloring(&triangle()).unwrap();
        assert!(c.is_weak_two_coloring(&triangle()));
        assert!(!c.is_proper(&triangle()));
    }

    #[test]
    fn weak_coloring_runs_per_component() {
        let g = Graph::new(5, &[(1, 2), (3, 4), (4, 5)]).unwrap();
        let c = weak_two_coloring(&g).unwrap();
        assert_eq!(c.as_slice(), &[0, 1, 0, 1, 0]);
        assert!(c.is_proper(&g));
    }

    #[test]
    fn generators() {
        assert_eq!(generate(GraphKind::Cycle { n: 3 }, 0).unwrap(), triangle());
        let c6 = generate(GraphKind::Cycle { n: 6 }, 0).unwrap();
        assert_eq!((c6.n(), c6.m()), (6, 6));
        let a = generate(GraphKind::RandomBounded { n: 10, delta: 3 }, 7).unwrap();
        let b = generate(GraphKind::RandomBounded { n: 10, delta: 3 }, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.max_degree() <= 3 && a.min_degree() >= 1);
        assert!(matches!(
            generate(GraphKind::Star { k: 0 }, 0),
            Err(Error::InvalidParams(_))
        ));
        assert!(generate(GraphKind::Cycle { n: 2 }, 0).is_err());
        assert!(generate(GraphKind::RandomBounded { n: 5, delta: 1 }, 0).is_err());
        assert!(generate(GraphKind::RandomBipartite { a: 1, b: 5, delta: 3 }, 0).is_err());
        let bip = generate(GraphKind::RandomBipartite { a: 3, b: 5, delta: 2 }, 3).unwrap();
        assert!(bip.min_degree() >= 1 && bip.max_degree() <= 2);
        assert!(bip.edges().iter().all(|&(u, v)| u <= 3 && v > 3));
    }

    #[test]
    fn graph_file_accepts_loose_order() {
        let text = r#"{"n": 3, "edges": [[3, 2], [2, 1]], "ports": [[[2, 1], [3, 1]], [[1, 1], [2, 2]]]}"#;
        let file: GraphFile = serde_json::from_str(text).unwrap();
        let g = file.graph().unwrap();
        assert_eq!(g.edges(), &[(1, 2), (2, 3)]);
        let p = file.ports(&g).unwrap().unwrap();
        assert_eq!(p.lookup(2, 1), Some((3, 1)));
        assert_eq!(p.lookup(1, 1), Some((2, 2)));
    }

    #[test]
    fn disjoint_union_copies_ports() {
        let t = triangle();
        let p = consistent_port_numbering(&t);
        let g2 = t.disjoint_union(&t);
        let p2 = p.disjoint_union(t.n(), &p);
        p2.validate(&g2).unwrap();
        assert_eq!(p2.lookup(4, 2), Some((6, 1)));
        assert_eq!(g2.components().len(), 2);
    }
}
