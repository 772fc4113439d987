//! Enclosing subgraphs of candidate pairs and their node feature matrices.

mod assemble;
mod cache;
mod subgraph;

pub use assemble::{
    assemble_features, feature_width, FeatureMatrix, FeatureMode, SideFeatures, DEFAULT_MAX_LABEL,
};
pub use cache::SubgraphCache;
pub use subgraph::{
    drnl_labels, drnl_value, extract_enclosing_subgraph, k_hop_ball, EnclosingSubgraph, U_INDEX,
    V_INDEX,
};
