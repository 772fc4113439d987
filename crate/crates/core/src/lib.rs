//! Link prediction with transductive node embeddings fed into inductive
//! graph neural networks, evaluated per query node with MAP and MRR.

// Negated float comparisons are how config checks reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod embed;
pub mod error;
pub mod experiment;
pub mod features;
pub mod fixtures;
pub mod gnn;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod seed;
pub mod split;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
pub use graph::{Graph, GraphStats, NodeId};
