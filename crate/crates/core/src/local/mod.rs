//! Synchronous round-based simulator for the SB(1), MB(1) and VV_C(1)
//! models of distributed local computation.
//!
//! Every round all nodes first emit messages from their current state, then
//! all messages are delivered, then all nodes step. After `rounds()` rounds
//! each node maps its state to a label.

mod programs;

use std::cmp::Ordering;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use programs::{
    constant_program, identity_program, single_leaf_program, wrap_gnn_as_program, ConstantProgram,
    DegreeSumProgram, DistinctDegreesProgram, IdentityProgram, SingleLeafProgram, WrappedGnn, WrappedState,
};

use crate::error::{Error, Result};
use crate::gnn::{FeatureMatrix, ModelKind};
use crate::graph::{Graph, PortNumbering};
use crate::header::Header;

/// A message value. Ordering is total (floats by `total_cmp`), which fixes
/// the canonical order of multisets and sets.
#[derive(Clone, Debug)]
pub enum Message {
    Int(i64),
    Vector(Vec<f64>),
}

impl PartialEq for Message {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Message {}

impl PartialOrd for Message {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Message {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Message::Int(a), Message::Int(b)) => a.cmp(b),
            (Message::Int(_), Message::Vector(_)) => Ordering::Less,
            (Message::Vector(_), Message::Int(_)) => Ordering::Greater,
            (Message::Vector(a), Message::Vector(b)) => {
                for (x, y) in a.iter().zip(b) {
                    match x.total_cmp(y) {
                        Ordering::Equal => continue,
                        o => return o,
                    }
                }
                a.len().cmp(&b.len())
            }
        }
    }
}

/// What a node knows initially.
#[derive(Clone, Copy, Debug)]
pub struct NodeInput<'a> {
    pub degree: usize,
    pub features: &'a [f64],
}

pub enum Outgoing {
    /// SB and MB: the same message to every neighbor.
    Broadcast(Message),
    /// VVC: one message per port `1..=deg(v)`.
    PerPort(Vec<Message>),
}

pub enum Received {
    /// SB: distinct neighbor messages in canonical order.
    Set(Vec<Message>),
    /// MB: all neighbor messages in canonical order.
    Multiset(Vec<Message>),
    /// VVC: per own port `1..=width`, the message and the sender's port, or
    /// `None` beyond `deg(v)`.
    Ports(Vec<Option<(Message, usize)>>),
}

/// A deterministic local algorithm.
pub trait NodeProgram {
    type State: Clone;

    fn class(&self) -> ModelKind;

    /// Number of communication rounds; independent of the graph.
    fn rounds(&self) -> usize;

    /// Length of the VVC received vector; at least the graph's max degree is used.
    fn port_width(&self) -> usize {
        0
    }

    /// Membership in the program's finite message alphabet.
    fn admits(&self, msg: &Message) -> bool;

    fn init(&self, input: NodeInput<'_>) -> Self::State;

    /// Messages of round `round` (1-based).
    fn send(&self, state: &Self::State, round: usize) -> Outgoing;

    fn step(&self, state: Self::State, received: Received, round: usize) -> Self::State;

    fn finish(&self, state: &Self::State) -> usize;
}

/// A label per node.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Labeling(Vec<usize>);

impl Labeling {
    pub fn new(labels: Vec<usize>) -> Self {
        Self(labels)
    }

    pub fn label(&self, v: usize) -> usize {
        self.0[v - 1]
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

    /// Nodes labeled 1.
    pub fn selected(&self) -> Vec<usize> {
        (1..=self.0.len()).filter(|&v| self.label(v) == 1).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelingFile {
    pub header: Header,
    pub program: String,
    pub n: usize,
    pub labels: Vec<usize>,
}

impl LabelingFile {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

fn check_outgoing<P: NodeProgram>(prog: &P, out: &Outgoing, v: usize, degree: usize, round: usize) -> Result<()> {
    let violation = || Error::AlphabetViolation { node: v, round };
    match (prog.class(), out) {
        (ModelKind::Vvc, Outgoing::PerPort(msgs)) => {
            if msgs.len() != degree {
                return Err(Error::ShapeError(format!(
                    "node {v} sent {} port messages, has degree {degree}",
                    msgs.len()
                )));
            }
            if !msgs.iter().all(|m| prog.admits(m)) {
                return Err(violation());
            }
        }
        (ModelKind::Sb | ModelKind::Mb, Outgoing::Broadcast(m)) => {
            if !prog.admits(m) {
                return Err(violation());
            }
        }
        (class, _) => {
            return Err(Error::ShapeError(format!("{class} program sent the wrong message shape")));
        }
    }
    Ok(())
}

/// Runs `prog` and returns every node's final state.
pub fn simulate<P: NodeProgram>(
    g: &Graph,
    p: Option<&PortNumbering>,
    x: &FeatureMatrix,
    prog: &P,
) -> Result<Vec<P::State>> {
    if x.len() != g.n() {
        return Err(Error::ShapeError(format!("{} input rows for {} nodes", x.len(), g.n())));
    }
    let ports = match prog.class() {
        ModelKind::Vvc => {
            let p = p.ok_or_else(|| Error::InvalidPorts("VVC programs need a port numbering".into()))?;
            p.validate(g)?;
            Some(p)
        }
        ModelKind::Sb | ModelKind::Mb => None,
    };
    let width = prog.port_width().max(g.max_degree());
    let mut states: Vec<P::State> = g
        .nodes()
        .map(|v| {
            prog.init(NodeInput {
                degree: g.degree(v),
                features: x.row(v),
            })
        })
        .collect();
    for round in 1..=prog.rounds() {
        let mut outgoing = Vec::with_capacity(g.n());
        for v in g.nodes() {
            let out = prog.send(&states[v - 1], round);
            check_outgoing(prog, &out, v, g.degree(v), round)?;
            outgoing.push(out);
        }
        let received: Vec<Received> = g
            .nodes()
            .map(|v| match prog.class() {
                ModelKind::Vvc => {
                    let p = ports.unwrap();
                    Received::Ports(
                        (1..=width)
                            .map(|i| {
                                p.lookup(v, i).map(|(u, j)| match &outgoing[u - 1] {
                                    Outgoing::PerPort(msgs) => (msgs[j - 1].clone(), j),
                                    Outgoing::Broadcast(_) => unreachable!(),
                                })
                            })
                            .collect(),
                    )
                }
                ModelKind::Mb | ModelKind::Sb => {
                    let mut msgs: Vec<Message> = g
                        .neighbors(v)
                        .iter()
                        .map(|&u| match &outgoing[u - 1] {
                            Outgoing::Broadcast(m) => m.clone(),
                            Outgoing::PerPort(_) => unreachable!(),
                        })
                        .collect();
                    msgs.sort();
                    if prog.class() == ModelKind::Sb {
                        msgs.dedup();
                        Received::Set(msgs)
                    } else {
                        Received::Multiset(msgs)
                    }
                }
            })
            .collect();
        states = states
            .into_iter()
            .zip(received)
            .map(|(s, r)| prog.step(s, r, round))
            .collect();
    }
    Ok(states)
}

/// Runs `prog` for exactly `prog.rounds()` synchronous rounds. The port
/// numbering is required for VVC programs and ignored otherwise.
pub fn run_rounds<P: NodeProgram>(
    g: &Graph,
    p: Option<&PortNumbering>,
    x: &FeatureMatrix,
    prog: &P,
) -> Result<Labeling> {
    let states = simulate(g, p, x, prog)?;
    Ok(Labeling(states.iter().map(|s| prog.finish(s)).collect()))
}

/// Exactly one node is labeled 1, and it is a leaf of the star `g`.
pub fn verify_single_leaf(g: &Graph, lab: &Labeling) -> Result<bool> {
    g.star_center().ok_or(Error::NotAStar)?;
    if lab.len() != g.n() {
        return Err(Error::ShapeError("labeling length differs from node count".into()));
    }
    let selected = lab.selected();
    Ok(selected.len() == 1 && g.degree(selected[0]) == 1)
}
