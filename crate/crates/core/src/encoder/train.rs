use std::collections::HashSet;

use log::{debug, info};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::adjacency::NormalizedAdjacency;
use super::classifier::{cross_entropy, EdgeClass, LabeledPair};
use super::model::{backward, forward_with_cache, random_features, Activation, EmbeddingState, ModelParams};
use crate::error::{Result, SgaError};
use crate::graph::{EdgeSample, SignedGraph};
use crate::sampling::{rng_for, sample_non_edges, Stream};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    #[default]
    Adam,
    Sgd,
}

/// Encoder and training hyper-parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncoderConfig {
    pub dim: usize,
    pub layers: usize,
    pub feature_dim: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub optimizer: OptimizerKind,
    pub activation: Activation,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            dim: 64,
            layers: 2,
            feature_dim: 64,
            learning_rate: 0.01,
            epochs: 300,
            optimizer: OptimizerKind::Adam,
            activation: Activation::Tanh,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut errors = Vec::new();
        if self.dim == 0 {
            errors.push("encoder.dim must be positive".to_string());
        }
        if self.layers == 0 {
            errors.push("encoder.layers must be at least 1".to_string());
        }
        if self.feature_dim == 0 {
            errors.push("encoder.feature_dim must be positive".to_string());
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            errors.push(format!("encoder.learning_rate must be positive, got {}", self.learning_rate));
        }
        if self.epochs == 0 {
            errors.push("encoder.epochs must be positive".to_string());
        }
        errors
    }
}

/// Seeded standard-normal input features for a run.
pub fn initial_features(num_nodes: usize, feature_dim: usize, seed: u64) -> Array2<f64> {
    random_features(num_nodes, feature_dim, &mut rng_for(seed, Stream::Features))
}

/// Loss over `samples` and its gradient with respect to every parameter block.
pub fn loss_and_gradients(
    adj: &NormalizedAdjacency,
    params: &ModelParams,
    features: &Array2<f64>,
    activation: Activation,
    samples: &[LabeledPair],
) -> Result<(f64, ModelParams)> {
    let (state, cache) = forward_with_cache(adj, params, features, activation)?;
    let mut grads = params.zeros_like();
    let mut d_z = Array2::zeros(state.z.dim());
    let loss = cross_entropy(&state.z, &params.theta, samples, Some((&mut d_z, &mut grads.theta)))?;
    backward(adj, params, &state, &cache, activation, &d_z, &mut grads);
    Ok((loss, grads))
}

/// Loss only (used by finite-difference checks).
pub fn loss_only(
    adj: &NormalizedAdjacency,
    params: &ModelParams,
    features: &Array2<f64>,
    activation: Activation,
    samples: &[LabeledPair],
) -> Result<f64> {
    let (state, _) = forward_with_cache(adj, params, features, activation)?;
    cross_entropy(&state.z, &params.theta, samples, None)
}

struct Adam {
    m: ModelParams,
    v: ModelParams,
    step: i32,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

enum Optimizer {
    Adam(Box<Adam>),
    Sgd,
}

impl Optimizer {
    fn new(kind: OptimizerKind, params: &ModelParams) -> Self {
        match kind {
            OptimizerKind::Adam => Optimizer::Adam(Box::new(Adam {
                m: params.zeros_like(),
                v: params.zeros_like(),
                step: 0,
            })),
            OptimizerKind::Sgd => Optimizer::Sgd,
        }
    }

    fn step(&mut self, params: &mut ModelParams, grads: &ModelParams, lr: f64) {
        match self {
            Optimizer::Sgd => {
                for (p, g) in params.blocks_mut().into_iter().zip(grads.blocks()) {
                    p.scaled_add(-lr, g);
                }
            }
            Optimizer::Adam(state) => {
                state.step += 1;
                let c1 = 1.0 - BETA1.powi(state.step);
                let c2 = 1.0 - BETA2.powi(state.step);
                let blocks = params
                    .blocks_mut()
                    .into_iter()
                    .zip(grads.blocks())
                    .zip(state.m.blocks_mut())
                    .zip(state.v.blocks_mut());
                for (((p, g), m), v) in blocks {
                    ndarray::Zip::from(p).and(g).and(m).and(v).for_each(|p, &g, m, v| {
                        *m = BETA1 * *m + (1.0 - BETA1) * g;
                        *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                        let m_hat = *m / c1;
                        let v_hat = *v / c2;
                        *p -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
                    });
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub edges_used: usize,
    pub none_used: usize,
}

/// Result of a training run.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub embeddings: EmbeddingState,
    pub history: Vec<EpochRecord>,
    /// Sampled no-edge pairs used for the third class.
    pub none_pairs: Vec<(usize, usize)>,
    /// Mean loss over the last window did not exceed the window before it.
    pub tail_non_increasing: bool,
}

/// Which training examples are visible at one epoch: indices into the
/// training edge list (ascending) and a prefix length of the no-edge pairs.
pub struct EpochSubset {
    pub edges: Vec<usize>,
    pub none: usize,
}

/// Everything a training loop needs about one graph and seed.
pub struct TrainingProblem<'a> {
    pub graph: &'a SignedGraph,
    pub edges: &'a [EdgeSample],
    pub config: &'a EncoderConfig,
    pub seed: u64,
}

impl TrainingProblem<'_> {
    /// No-edge pairs for the third class: as many as training edges, drawn
    /// once per run.
    pub fn none_pairs(&self) -> Vec<(usize, usize)> {
        sample_non_edges(
            self.graph,
            self.edges.len(),
            &HashSet::new(),
            &mut rng_for(self.seed, Stream::NonEdges),
        )
    }

    /// Full-batch training; `subset` picks the visible examples per epoch.
    pub fn fit<F>(&self, mut subset: F) -> Result<TrainOutcome>
    where
        F: FnMut(usize, usize) -> EpochSubset,
    {
        if self.edges.is_empty() {
            return Err(SgaError::EmptyTrainingSet);
        }
        let cfg = self.config;
        let errors = cfg.validate();
        if !errors.is_empty() {
            return Err(SgaError::InvalidConfig(errors));
        }
        let adj = NormalizedAdjacency::new(self.graph);
        let features = initial_features(self.graph.num_nodes(), cfg.feature_dim, self.seed);
        let mut params = ModelParams::init(cfg.feature_dim, cfg.dim, cfg.layers, &mut rng_for(self.seed, Stream::Init));
        let none_pairs = self.none_pairs();
        let mut optimizer = Optimizer::new(cfg.optimizer, &params);
        let mut history = Vec::with_capacity(cfg.epochs);

        for epoch in 0..cfg.epochs {
            let visible = subset(epoch, none_pairs.len());
            let samples: Vec<LabeledPair> = visible
                .edges
                .iter()
                .map(|&i| LabeledPair::from(&self.edges[i]))
                .chain(none_pairs[..visible.none.min(none_pairs.len())].iter().map(|&(u, v)| LabeledPair {
                    u,
                    v,
                    class: EdgeClass::NoEdge,
                }))
                .collect();
            let (loss, grads) = loss_and_gradients(&adj, &params, &features, cfg.activation, &samples)?;
            if !loss.is_finite() {
                return Err(SgaError::Diverged { epoch, loss });
            }
            history.push(EpochRecord {
                epoch,
                loss,
                edges_used: visible.edges.len(),
                none_used: visible.none,
            });
            optimizer.step(&mut params, &grads, cfg.learning_rate);
            if !params.is_finite() {
                return Err(SgaError::Diverged { epoch, loss: f64::NAN });
            }
            if epoch % 50 == 0 {
                debug!("epoch {epoch}: loss {loss:.5} on {} edges", visible.edges.len());
            }
        }

        let embeddings = super::model::forward(&adj, &params, &features, cfg.activation)?;
        let tail_non_increasing = tail_non_increasing(&history);
        Ok(TrainOutcome {
            params,
            embeddings,
            history,
            none_pairs,
            tail_non_increasing,
        })
    }
}

fn tail_non_increasing(history: &[EpochRecord]) -> bool {
    let window = (history.len() / 4).clamp(1, 10);
    if history.len() < 2 * window {
        return true;
    }
    let mean = |records: &[EpochRecord]| records.iter().map(|r| r.loss).sum::<f64>() / records.len() as f64;
    let n = history.len();
    mean(&history[n - window..]) <= mean(&history[n - 2 * window..n - window])
}

/// Plain training on every edge at every epoch.
pub fn train_encoder(
    graph: &SignedGraph,
    edges: &[EdgeSample],
    config: &EncoderConfig,
    seed: u64,
) -> Result<TrainOutcome> {
    let problem = TrainingProblem {
        graph,
        edges,
        config,
        seed,
    };
    let all: Vec<usize> = (0..edges.len()).collect();
    let outcome = problem.fit(|_, none| EpochSubset {
        edges: all.clone(),
        none,
    })?;
    if !outcome.tail_non_increasing {
        info!("training loss rose over the final epochs (seed {seed})");
    }
    Ok(outcome)
}
