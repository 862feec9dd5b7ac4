use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Coloring, DegreeBound, Graph, Port, PortNumbering};

/// Per-node input vectors of a common width.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    width: usize,
    rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::ShapeError("feature rows differ in width".into()));
        }
        Ok(Self { width, rows })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Row of node `v` (1-based).
    pub fn row(&self, v: usize) -> &[f64] {
        &self.rows[v - 1]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Stacks `self` over `other`, matching [`Graph::disjoint_union`].
    pub fn stack(&self, other: &FeatureMatrix) -> Result<FeatureMatrix> {
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        FeatureMatrix::new(rows)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSpec {
    /// One-hot degree.
    Degree,
    /// One-hot degree plus a weak 2-coloring bit.
    #[value(name = "degree+weak2")]
    #[serde(rename = "degree+weak2")]
    DegreeWeak2,
    /// One-hot degree plus a proper 2-coloring bit.
    #[value(name = "degree+2color")]
    #[serde(rename = "degree+2color")]
    DegreeTwoColor,
}

impl FeatureSpec {
    pub fn width(self, delta: DegreeBound) -> usize {
        match self {
            FeatureSpec::Degree => delta.get(),
            FeatureSpec::DegreeWeak2 | FeatureSpec::DegreeTwoColor => delta.get() + 1,
        }
    }
}

/// One-hot degree over positions `1..=delta` (position `deg(v)` set),
/// followed by the color bit when `spec` asks for one. Isolated nodes get an
/// all-zero degree block.
pub fn node_features(
    g: &Graph,
    spec: FeatureSpec,
    coloring: Option<&Coloring>,
    delta: DegreeBound,
) -> Result<FeatureMatrix> {
    delta.check(g)?;
    let coloring = match spec {
        FeatureSpec::Degree => None,
        FeatureSpec::DegreeWeak2 | FeatureSpec::DegreeTwoColor => {
            let c = coloring
                .ok_or_else(|| Error::InvalidColoring(format!("{spec:?} features need a coloring")))?;
            let valid = match spec {
                FeatureSpec::DegreeWeak2 => c.is_weak_two_coloring(g),
                _ => c.is_proper(g),
            };
            if !valid {
                return Err(Error::InvalidColoring(format!("coloring is not valid for {spec:?}")));
            }
            Some(c)
        }
    };
    let rows = g
        .nodes()
        .map(|v| {
            let mut row = vec![0.0; spec.width(delta)];
            let d = g.degree(v);
            if d > 0 {
                row[d - 1] = 1.0;
            }
            if let Some(c) = coloring {
                row[delta.get()] = f64::from(c.color(v));
            }
            row
        })
        .collect();
    FeatureMatrix::new(rows)
}

/// Index of the maximum element, ties toward the lowest index.
pub fn readout_label(z: &[f64]) -> usize {
    assert!(!z.is_empty(), "readout of an empty vector");
    let mut best = 0;
    for (i, &x) in z.iter().enumerate().skip(1) {
        if x > z[best] {
            best = i;
        }
    }
    best
}

/// Per-node bit vectors of length `delta`, one bit per port.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgePortLabels {
    bits: Vec<Vec<u8>>,
}

impl EdgePortLabels {
    pub fn new(g: &Graph, delta: DegreeBound, bits: Vec<Vec<u8>>) -> Result<Self> {
        if bits.len() != g.n() {
            return Err(Error::ShapeError("one bit vector per node required".into()));
        }
        for (vi, row) in bits.iter().enumerate() {
            let v = vi + 1;
            if row.len() != delta.get() {
                return Err(Error::ShapeError(format!("node {v} bit vector must have length {}", delta.get())));
            }
            if row.iter().any(|&b| b > 1) {
                return Err(Error::ShapeError(format!("node {v} has a non-binary entry")));
            }
            if row[g.degree(v)..].iter().any(|&b| b != 0) {
                return Err(Error::ShapeError(format!("node {v} sets a bit beyond its degree")));
            }
        }
        Ok(Self { bits })
    }

    /// Bit `i` (1-based) of node `v`.
    pub fn bit(&self, v: usize, i: usize) -> u8 {
        self.bits[v - 1][i - 1]
    }
}

/// Edges `{u, v}` with `p(u, i) = (v, j)` and both `y(u)_i` and `y(v)_j` set,
/// in canonical order.
pub fn decode_edge_output(
    g: &Graph,
    p: &PortNumbering,
    y: &EdgePortLabels,
) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for u in g.nodes() {
        for i in 1..=g.degree(u) {
            let Port { node: v, index: j } = p.get(Port::new(u, i));
            if u < v && y.bit(u, i) == 1 && y.bit(v, j) == 1 {
                out.push((u, v));
            }
        }
    }
    out.sort_unstable();
    out
}
