//! Signed GCN encoder and pair classifier, trained jointly with hand-written
//! gradients.

pub mod adjacency;
pub mod checkpoint;
pub mod classifier;
pub mod model;
pub mod train;

pub use adjacency::NormalizedAdjacency;
pub use checkpoint::Checkpoint;
pub use classifier::{edge_class_probs, loss, ClassProbs, EdgeClass, LabeledPair, PairScorer};
pub use model::{forward, Activation, EmbeddingState, ModelParams};
pub use train::{
    initial_features, loss_and_gradients, loss_only, train_encoder, EncoderConfig, EpochRecord, EpochSubset,
    OptimizerKind, TrainOutcome, TrainingProblem,
};
