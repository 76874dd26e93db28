//! Graph combinatorial optimization as single-player games.
//!
//! Problems (minimum spanning tree, single-source shortest paths, travelling
//! salesman and min-max vehicle routing) are played as sequential episodes:
//! a graph-attention encoder embeds the instance once, an attention decoder
//! picks the next node or edge, and the finished solution is scored by a
//! reward. Policies are trained with REINFORCE and compared against the
//! classical algorithms in [`oracles`].

pub mod bench;
pub mod env;
pub mod error;
pub mod graph;
pub mod nn;
pub mod oracles;
pub mod rng;
pub mod train;

pub use error::{Error, Result};
