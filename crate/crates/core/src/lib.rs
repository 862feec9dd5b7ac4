//! Port-numbered graph neural networks and the distributed local models
//! they correspond to.
//!
//! - [`graph`]: graphs, consistent port numberings, weak 2-colorings, generators
//! - [`local`]: synchronous SB(1) / MB(1) / VV_C(1) simulator and node programs
//! - [`gnn`]: SB-, MB- and VVC-class forward and backward passes
//! - [`rl`]: REINFORCE training for per-node selection policies
//! - [`oracles`]: exact solvers, validity checks, baselines, exact ratios
//! - [`experiments`]: reproducible experiment bundles behind the CLI

pub mod error;
pub mod experiments;
pub mod gnn;
pub mod graph;
pub mod header;
pub mod local;
pub mod oracles;
pub mod rl;

pub use error::{Error, Result};
