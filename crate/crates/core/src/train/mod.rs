//! Losses, optimizer, early stopping and the training loop.

mod adam;
mod early;
mod loss;
mod trainer;

pub use adam::Adam;
pub use early::{replay, EarlyStopping, Verdict};
pub use loss::{
    bce_gradient, bce_loss, bce_loss_tape, ranking_loss, ranking_loss_tape, QueryScores,
};
pub use trainer::{
    auto_sortpool_k, cross_validate_margin, evaluate, trace_csv, train_model, EpochRecord, Fold,
    LossKind, MarginSearch, TrainConfig, TrainData, TrainOutcome,
};
