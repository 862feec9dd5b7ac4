use super::{Message, NodeInput, NodeProgram, Outgoing, Received};
use crate::gnn::{readout_label, vvc_concat, vvc_update, Model, ModelKind};

const REJECT: i64 = 0;
const SELECT: i64 = 1;

/// Largest degree the single-leaf program can announce.
pub const MAX_ANNOUNCED_DEGREE: i64 = u16::MAX as i64;

/// Two-round VVC program that picks the leaf on the center's port 1.
///
/// Round 1: every node announces its degree on all ports. Round 2: a node of
/// degree at least 2 that heard only 1s sends SELECT on port 1 and REJECT
/// elsewhere; everyone else sends REJECT. A degree-1 node outputs 1 iff it
/// received SELECT.
#[derive(Clone, Copy, Debug, Default)]
pub struct SingleLeafProgram;

pub fn single_leaf_program() -> SingleLeafProgram {
    SingleLeafProgram
}

#[derive(Clone, Debug)]
pub struct SingleLeafState {
    degree: usize,
    center: bool,
    selected: bool,
}

impl NodeProgram for SingleLeafProgram {
    type State = SingleLeafState;

    fn class(&self) -> ModelKind {
        ModelKind::Vvc
    }

    fn rounds(&self) -> usize {
        2
    }

    fn admits(&self, msg: &Message) -> bool {
        matches!(msg, Message::Int(k) if (0..=MAX_ANNOUNCED_DEGREE).contains(k))
    }

    fn init(&self, input: NodeInput<'_>) -> SingleLeafState {
        SingleLeafState {
            degree: input.degree,
            center: false,
            selected: false,
        }
    }

    fn send(&self, state: &SingleLeafState, round: usize) -> Outgoing {
        let msgs = match round {
            1 => vec![Message::Int(state.degree as i64); state.degree],
            _ => (1..=state.degree)
                .map(|i| Message::Int(if state.center && i == 1 { SELECT } else { REJECT }))
                .collect(),
        };
        Outgoing::PerPort(msgs)
    }

    fn step(&self, mut state: SingleLeafState, received: Received, round: usize) -> SingleLeafState {
        let Received::Ports(ports) = received else {
            unreachable!("VVC program receives per-port messages")
        };
        match round {
            1 => {
                state.center = state.degree >= 2
                    && ports[..state.degree]
                        .iter()
                        .all(|r| matches!(r, Some((Message::Int(1), _))));
            }
            _ => {
                state.selected =
                    state.degree == 1 && matches!(ports[0], Some((Message::Int(SELECT), _)));
            }
        }
        state
    }

    fn finish(&self, state: &SingleLeafState) -> usize {
        usize::from(state.selected)
    }
}

/// Zero-round program that outputs a fixed label.
#[derive(Clone, Copy, Debug)]
pub struct ConstantProgram {
    pub label: usize,
    pub class: ModelKind,
}

pub fn constant_program(label: usize) -> ConstantProgram {
    ConstantProgram {
        label,
        class: ModelKind::Sb,
    }
}

impl NodeProgram for ConstantProgram {
    type State = ();

    fn class(&self) -> ModelKind {
        self.class
    }

    fn rounds(&self) -> usize {
        0
    }

    fn admits(&self, _: &Message) -> bool {
        false
    }

    fn init(&self, _: NodeInput<'_>) {}

    fn send(&self, _: &(), _: usize) -> Outgoing {
        unreachable!("zero-round program never sends")
    }

    fn step(&self, _: (), _: Received, _: usize) {}

    fn finish(&self, _: &()) -> usize {
        self.label
    }
}

/// Zero-round program whose output is its input: the node's degree.
#[derive(Clone, Copy, Debug)]
pub struct IdentityProgram {
    pub class: ModelKind,
}

pub fn identity_program() -> IdentityProgram {
    IdentityProgram { class: ModelKind::Sb }
}

impl NodeProgram for IdentityProgram {
    type State = usize;

    fn class(&self) -> ModelKind {
        self.class
    }

    fn rounds(&self) -> usize {
        0
    }

    fn admits(&self, _: &Message) -> bool {
        false
    }

    fn init(&self, input: NodeInput<'_>) -> usize {
        input.degree
    }

    fn send(&self, _: &usize, _: usize) -> Outgoing {
        unreachable!("zero-round program never sends")
    }

    fn step(&self, s: usize, _: Received, _: usize) -> usize {
        s
    }

    fn finish(&self, s: &usize) -> usize {
        *s
    }
}

/// One-round MB program: output the sum of neighbor degrees.
#[derive(Clone, Copy, Debug, Default)]
pub struct DegreeSumProgram;

impl NodeProgram for DegreeSumProgram {
    type State = (usize, usize);

    fn class(&self) -> ModelKind {
        ModelKind::Mb
    }

    fn rounds(&self) -> usize {
        1
    }

    fn admits(&self, msg: &Message) -> bool {
        matches!(msg, Message::Int(k) if (0..=MAX_ANNOUNCED_DEGREE).contains(k))
    }

    fn init(&self, input: NodeInput<'_>) -> (usize, usize) {
        (input.degree, 0)
    }

    fn send(&self, s: &(usize, usize), _: usize) -> Outgoing {
        Outgoing::Broadcast(Message::Int(s.0 as i64))
    }

    fn step(&self, s: (usize, usize), received: Received, _: usize) -> (usize, usize) {
        let Received::Multiset(msgs) = received else {
            unreachable!("MB program receives a multiset")
        };
        let sum = msgs
            .iter()
            .map(|m| match m {
                Message::Int(k) => *k as usize,
                Message::Vector(_) => 0,
            })
            .sum();
        (s.0, sum)
    }

    fn finish(&self, s: &(usize, usize)) -> usize {
        s.1
    }
}

/// One-round SB program: output the number of distinct neighbor degrees.
#[derive(Clone, Copy, Debug, Default)]
pub struct DistinctDegreesProgram;

impl NodeProgram for DistinctDegreesProgram {
    type State = (usize, usize);

    fn class(&self) -> ModelKind {
        ModelKind::Sb
    }

    fn rounds(&self) -> usize {
        1
    }

    fn admits(&self, msg: &Message) -> bool {
        matches!(msg, Message::Int(k) if (0..=MAX_ANNOUNCED_DEGREE).contains(k))
    }

    fn init(&self, input: NodeInput<'_>) -> (usize, usize) {
        (input.degree, 0)
    }

    fn send(&self, s: &(usize, usize), _: usize) -> Outgoing {
        Outgoing::Broadcast(Message::Int(s.0 as i64))
    }

    fn step(&self, s: (usize, usize), received: Received, _: usize) -> (usize, usize) {
        let Received::Set(msgs) = received else {
            unreachable!("SB program receives a set")
        };
        (s.0, msgs.len())
    }

    fn finish(&self, s: &(usize, usize)) -> usize {
        s.1
    }
}

/// A CPNGNN run as a VVC program: in round `l` node `v` sends its embedding
/// `z_v^(l)` on every port, and `finish` applies the readout and argmax.
#[derive(Clone, Debug)]
pub struct WrappedGnn {
    model: Model,
}

pub fn wrap_gnn_as_program(model: Model) -> crate::Result<WrappedGnn> {
    model.validate()?;
    if model.kind != ModelKind::Vvc {
        return Err(crate::Error::ShapeError(format!(
            "only VVC models wrap as VVC programs, got {}",
            model.kind
        )));
    }
    Ok(WrappedGnn { model })
}

impl WrappedGnn {
    pub fn model(&self) -> &Model {
        &self.model
    }

    /// Readout vector of a final state.
    pub fn readout(&self, state: &[f64]) -> Vec<f64> {
        self.model.readout.apply(state)
    }
}

/// State of a wrapped GNN node: its degree and current embedding.
#[derive(Clone, Debug, PartialEq)]
pub struct WrappedState {
    pub degree: usize,
    pub embedding: Vec<f64>,
}

impl NodeProgram for WrappedGnn {
    type State = WrappedState;

    fn class(&self) -> ModelKind {
        ModelKind::Vvc
    }

    fn rounds(&self) -> usize {
        self.model.num_layers()
    }

    fn port_width(&self) -> usize {
        self.model.delta
    }

    /// Finite vectors whose width is one of the model's embedding widths.
    fn admits(&self, msg: &Message) -> bool {
        match msg {
            Message::Vector(z) => {
                self.model.embedding_dims().contains(&z.len()) && z.iter().all(|x| x.is_finite())
            }
            Message::Int(_) => false,
        }
    }

    fn init(&self, input: NodeInput<'_>) -> WrappedState {
        WrappedState {
            degree: input.degree,
            embedding: input.features.to_vec(),
        }
    }

    // The sending port reaches the receiver as its back-port, so the pair
    // (z_v, i) is delivered without encoding i in the payload.
    fn send(&self, s: &WrappedState, _: usize) -> Outgoing {
        Outgoing::PerPort(vec![Message::Vector(s.embedding.clone()); s.degree])
    }

    fn step(&self, s: WrappedState, received: Received, round: usize) -> WrappedState {
        let Received::Ports(ports) = received else {
            unreachable!("VVC program receives per-port messages")
        };
        let ports: Vec<Option<(&[f64], usize)>> = ports
            .iter()
            .map(|r| {
                r.as_ref().map(|(m, back)| match m {
                    Message::Vector(v) => (v.as_slice(), *back),
                    Message::Int(_) => unreachable!("alphabet admits vectors only"),
                })
            })
            .collect();
        let concat = vvc_concat(&s.embedding, &ports, self.model.delta);
        WrappedState {
            degree: s.degree,
            embedding: vvc_update(&self.model.layers[round - 1], &concat).1,
        }
    }

    fn finish(&self, s: &WrappedState) -> usize {
        readout_label(&self.readout(&s.embedding))
    }
}
