//! Signed GCN layers.
//!
//! Each layer keeps a "friend" (positive) and an "enemy" (negative)
//! representation. The first layer aggregates the input features over
//! positive and negative neighbours separately; deeper layers follow balance
//! theory, so a friend's enemy and an enemy's friend feed the enemy part while
//! an enemy's enemy feeds the friend part.

use ndarray::{s, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use super::adjacency::NormalizedAdjacency;
use crate::error::{Result, SgaError};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Tanh,
    Relu,
    Identity,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation's output.
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Encoder weights and the three-class pair classifier.
///
/// `w_pos[0]` / `w_neg[0]` have shape `(2 * input_dim, dim)`; deeper layers
/// `(3 * dim, dim)`. `theta` has shape `(4 * dim, 3)`: it scores the pair
/// embedding `[z_u, z_v]`, each `z` being `[h_pos, h_neg]` of width `2 * dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub input_dim: usize,
    pub dim: usize,
    pub w_pos: Vec<Array2<f64>>,
    pub w_neg: Vec<Array2<f64>>,
    pub theta: Array2<f64>,
}

pub const NUM_CLASSES: usize = 3;

impl ModelParams {
    pub fn zeros(input_dim: usize, dim: usize, layers: usize) -> Self {
        assert!(layers >= 1, "at least one layer");
        let shape = |l: usize| if l == 0 { (2 * input_dim, dim) } else { (3 * dim, dim) };
        ModelParams {
            input_dim,
            dim,
            w_pos: (0..layers).map(|l| Array2::zeros(shape(l))).collect(),
            w_neg: (0..layers).map(|l| Array2::zeros(shape(l))).collect(),
            theta: Array2::zeros((4 * dim, NUM_CLASSES)),
        }
    }

    /// Glorot-uniform initialisation.
    pub fn init<R: Rng + ?Sized>(input_dim: usize, dim: usize, layers: usize, rng: &mut R) -> Self {
        let mut params = Self::zeros(input_dim, dim, layers);
        for block in params.blocks_mut() {
            let (fan_in, fan_out) = block.dim();
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
            block.mapv_inplace(|_| dist.sample(rng));
        }
        params
    }

    pub fn layers(&self) -> usize {
        self.w_pos.len()
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.input_dim, self.dim, self.layers())
    }

    /// Parameter blocks in a fixed order: positive layers, negative layers,
    /// then the classifier.
    pub fn blocks(&self) -> Vec<&Array2<f64>> {
        self.w_pos
            .iter()
            .chain(self.w_neg.iter())
            .chain(std::iter::once(&self.theta))
            .collect()
    }

    pub fn blocks_mut(&mut self) -> Vec<&mut Array2<f64>> {
        self.w_pos
            .iter_mut()
            .chain(self.w_neg.iter_mut())
            .chain(std::iter::once(&mut self.theta))
            .collect()
    }

    pub fn block_names(&self) -> Vec<String> {
        let l = self.layers();
        (0..l)
            .map(|i| format!("w_pos[{i}]"))
            .chain((0..l).map(|i| format!("w_neg[{i}]")))
            .chain(std::iter::once("theta".to_string()))
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.blocks().iter().all(|b| b.iter().all(|x| x.is_finite()))
    }

    /// Checks every block against the shapes implied by `input_dim`, `dim`.
    pub fn validate(&self) -> Result<()> {
        if self.w_pos.is_empty() || self.w_pos.len() != self.w_neg.len() {
            return Err(SgaError::DimensionMismatch {
                layer: "layers".into(),
                expected: "equal, non-zero positive and negative layer counts".into(),
                got: format!("{} / {}", self.w_pos.len(), self.w_neg.len()),
            });
        }
        let expected = |l: usize| if l == 0 { (2 * self.input_dim, self.dim) } else { (3 * self.dim, self.dim) };
        for (name, block, shape) in self
            .w_pos
            .iter()
            .enumerate()
            .map(|(l, w)| (format!("w_pos[{l}]"), w, expected(l)))
            .chain(
                self.w_neg
                    .iter()
                    .enumerate()
                    .map(|(l, w)| (format!("w_neg[{l}]"), w, expected(l))),
            )
            .chain(std::iter::once(("theta".to_string(), &self.theta, (4 * self.dim, NUM_CLASSES))))
        {
            if block.dim() != shape {
                return Err(SgaError::DimensionMismatch {
                    layer: name,
                    expected: format!("{shape:?}"),
                    got: format!("{:?}", block.dim()),
                });
            }
        }
        Ok(())
    }
}

/// Per-layer node representations and the final embedding `z = [h_pos, h_neg]`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingState {
    pub h_pos: Vec<Array2<f64>>,
    pub h_neg: Vec<Array2<f64>>,
    pub z: Array2<f64>,
}

impl EmbeddingState {
    pub fn num_nodes(&self) -> usize {
        self.z.nrows()
    }
}

/// Seeded standard-normal node features.
pub fn random_features<R: Rng + ?Sized>(num_nodes: usize, dim: usize, rng: &mut R) -> Array2<f64> {
    Array2::from_shape_simple_fn((num_nodes, dim), || StandardNormal.sample(rng))
}

/// Inputs to one layer's linear map, kept for the backward pass.
struct LayerInputs {
    pos: Vec<Array2<f64>>,
    neg: Vec<Array2<f64>>,
}

pub(crate) struct ForwardCache {
    inputs: Vec<LayerInputs>,
}

fn linear_blocks(inputs: &[Array2<f64>], weights: &Array2<f64>) -> Array2<f64> {
    let width = inputs[0].ncols();
    let mut out = Array2::zeros((inputs[0].nrows(), weights.ncols()));
    for (b, x) in inputs.iter().enumerate() {
        let w = weights.slice(s![b * width..(b + 1) * width, ..]);
        ndarray::linalg::general_mat_mul(1.0, x, &w, 1.0, &mut out);
    }
    out
}

pub(crate) fn forward_with_cache(
    adj: &NormalizedAdjacency,
    params: &ModelParams,
    features: &Array2<f64>,
    activation: Activation,
) -> Result<(EmbeddingState, ForwardCache)> {
    params.validate()?;
    let n = adj.num_nodes();
    if features.nrows() != n || features.ncols() != params.input_dim {
        return Err(SgaError::DimensionMismatch {
            layer: "input features".into(),
            expected: format!("({n}, {})", params.input_dim),
            got: format!("{:?}", features.dim()),
        });
    }
    let act = |m: Array2<f64>| m.mapv_into(|x| activation.apply(x));

    let mut h_pos: Vec<Array2<f64>> = Vec::with_capacity(params.layers());
    let mut h_neg: Vec<Array2<f64>> = Vec::with_capacity(params.layers());
    let mut cache = ForwardCache { inputs: Vec::with_capacity(params.layers()) };
    for l in 0..params.layers() {
        let inputs = if l == 0 {
            LayerInputs {
                pos: vec![adj.positive.apply(features), features.clone()],
                neg: vec![adj.negative.apply(features), features.clone()],
            }
        } else {
            let (prev_pos, prev_neg) = (&h_pos[l - 1], &h_neg[l - 1]);
            LayerInputs {
                pos: vec![
                    adj.positive.apply(prev_pos),
                    adj.negative.apply(prev_neg),
                    prev_pos.clone(),
                ],
                neg: vec![
                    adj.positive.apply(prev_neg),
                    adj.negative.apply(prev_pos),
                    prev_neg.clone(),
                ],
            }
        };
        h_pos.push(act(linear_blocks(&inputs.pos, &params.w_pos[l])));
        h_neg.push(act(linear_blocks(&inputs.neg, &params.w_neg[l])));
        cache.inputs.push(inputs);
    }
    let last = params.layers() - 1;
    let z = ndarray::concatenate(Axis(1), &[h_pos[last].view(), h_neg[last].view()])
        .expect("equal row counts");
    Ok((EmbeddingState { h_pos, h_neg, z }, cache))
}

/// Runs the encoder on `features` over the normalised adjacency.
pub fn forward(
    adj: &NormalizedAdjacency,
    params: &ModelParams,
    features: &Array2<f64>,
    activation: Activation,
) -> Result<EmbeddingState> {
    forward_with_cache(adj, params, features, activation).map(|(state, _)| state)
}

fn input_grad(d_pre: &Array2<f64>, weights: &Array2<f64>, block: usize, width: usize) -> Array2<f64> {
    let w: ArrayView2<f64> = weights.slice(s![block * width..(block + 1) * width, ..]);
    d_pre.dot(&w.t())
}

fn weight_grad(inputs: &[Array2<f64>], d_pre: &Array2<f64>, grad: &mut Array2<f64>) {
    let width = inputs[0].ncols();
    for (b, x) in inputs.iter().enumerate() {
        let mut g = grad.slice_mut(s![b * width..(b + 1) * width, ..]);
        ndarray::linalg::general_mat_mul(1.0, &x.t(), d_pre, 1.0, &mut g);
    }
}

/// Back-propagates `d_z` (gradient of the loss w.r.t. the final embedding)
/// into the encoder weight gradients of `grads`.
pub(crate) fn backward(
    adj: &NormalizedAdjacency,
    params: &ModelParams,
    state: &EmbeddingState,
    cache: &ForwardCache,
    activation: Activation,
    d_z: &Array2<f64>,
    grads: &mut ModelParams,
) {
    let d = params.dim;
    let mut d_pos = d_z.slice(s![.., 0..d]).to_owned();
    let mut d_neg = d_z.slice(s![.., d..2 * d]).to_owned();
    for l in (0..params.layers()).rev() {
        let deriv = |h: &Array2<f64>, g: &Array2<f64>| {
            let mut out = g.clone();
            out.zip_mut_with(h, |g, &y| *g *= activation.derivative_from_output(y));
            out
        };
        let pre_pos = deriv(&state.h_pos[l], &d_pos);
        let pre_neg = deriv(&state.h_neg[l], &d_neg);
        let inputs = &cache.inputs[l];
        weight_grad(&inputs.pos, &pre_pos, &mut grads.w_pos[l]);
        weight_grad(&inputs.neg, &pre_neg, &mut grads.w_neg[l]);
        if l == 0 {
            break;
        }
        // pos inputs: [A+ h_pos, A- h_neg, h_pos]; neg inputs: [A+ h_neg, A- h_pos, h_neg]
        let wp = &params.w_pos[l];
        let wn = &params.w_neg[l];
        let mut next_pos = adj.positive.apply_transpose(&input_grad(&pre_pos, wp, 0, d));
        next_pos += &input_grad(&pre_pos, wp, 2, d);
        next_pos += &adj.negative.apply_transpose(&input_grad(&pre_neg, wn, 1, d));
        let mut next_neg = adj.negative.apply_transpose(&input_grad(&pre_pos, wp, 1, d));
        next_neg += &adj.positive.apply_transpose(&input_grad(&pre_neg, wn, 0, d));
        next_neg += &input_grad(&pre_neg, wn, 2, d);
        d_pos = next_pos;
        d_neg = next_neg;
    }
}
