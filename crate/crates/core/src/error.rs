use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid node {node} (graph has {n} nodes)")]
    InvalidNode { node: usize, n: usize },
    #[error("invalid edge {{{0}, {1}}}: self-loop")]
    InvalidEdge(usize, usize),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),
    #[error("node {0} has degree {1}, exceeding the bound {2}")]
    DegreeExceeded(usize, usize, usize),
    #[error("node {0} is isolated; no weak 2-coloring exists")]
    NoWeakColoring(usize),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid port numbering: {0}")]
    InvalidPorts(String),
    #[error("message outside the declared alphabet (node {node}, round {round})")]
    AlphabetViolation { node: usize, round: usize },
    #[error("graph is not a star K_{{1,k}} with k >= 2")]
    NotAStar,
    #[error("invalid coloring: {0}")]
    InvalidColoring(String),
    #[error("shape mismatch: {0}")]
    ShapeError(String),
    #[error("node {0} is isolated; neighbor aggregation is undefined")]
    IsolatedNode(usize),
    #[error("numerical error: {0}")]
    NumericalError(String),
    #[error("instance too large for exact search: {what} = {size} exceeds cap {cap}")]
    TooLarge {
        what: &'static str,
        size: usize,
        cap: usize,
    },
    #[error("approximation ratio undefined: optimum is zero")]
    Undefined,
    #[error("unknown program {0:?}")]
    UnknownProgram(String),
    #[error("experiment check failed: {0}")]
    ExperimentFailed(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit status: 2 for usage errors, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParams(_) | Error::UnknownProgram(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
