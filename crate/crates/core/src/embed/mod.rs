//! Transductive node embeddings: Node2Vec and matrix factorization.

pub mod mf;
pub mod node2vec;
pub mod table;
pub mod walk;

pub use mf::{mf_loss, train_mf, MfConfig};
pub use node2vec::{node2vec_loss_exact, train_node2vec, Node2VecConfig, Objective};
pub use table::{EmbedMethod, EmbeddingTable};
pub use walk::{sample_walks, WalkCorpus, WalkParams};
