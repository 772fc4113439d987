//! Inductive graph neural networks over enclosing subgraphs.

mod config;
mod model;
mod params;

pub use config::{sortpool_k_for, Architecture, GnnConfig};
pub use model::{
    adjacency, embed_nodes, gcn_normalized, gin_aggregate, mean_adjacency, predict,
    random_walk_normalized, score, score_pair, score_pair_dgcnn, sort_pool_order, PairGraph,
    PairInput,
};
pub use params::{Bound, ModelParams};
