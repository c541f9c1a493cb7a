//! Train/test protocol, metrics and multi-seed experiments.

pub mod experiment;
pub mod metrics;
pub mod split;

pub use experiment::{
    perturb, run_ablation, train_final, run_arms_on_split, run_random_baseline, run_splits, Arm, ExperimentConfig, ExperimentReport,
    PerturbMode, RunRecord, RunSplit, DEFAULT_PERTURB_RATIOS,
};
pub use metrics::{auc, compute_metrics, predict_signs, AggregateMetrics, Metrics, Prediction, Summary};
pub use split::{split, SplitSpec};
