//! JSON model checkpoints.
//!
//! Layout (`version` 1):
//!
//! ```text
//! {
//!   "format": "sga-checkpoint",
//!   "version": 1,
//!   "seed": u64,            // run seed; also regenerates the input features
//!   "num_nodes": usize,
//!   "encoder": { EncoderConfig },
//!   "w_pos": [Matrix; layers], "w_neg": [Matrix; layers], "theta": Matrix
//! }
//! Matrix = { "rows": usize, "cols": usize, "data": [f64; rows * cols] }  // row-major
//! ```
//!
//! Floats are written in shortest round-trip form, so save → load is exact.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::adjacency::NormalizedAdjacency;
use super::model::{forward, EmbeddingState, ModelParams};
use super::train::{initial_features, EncoderConfig};
use crate::error::{Result, SgaError};
use crate::graph::SignedGraph;

pub const CHECKPOINT_FORMAT: &str = "sga-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl From<&Array2<f64>> for Matrix {
    fn from(a: &Array2<f64>) -> Self {
        Matrix {
            rows: a.nrows(),
            cols: a.ncols(),
            data: a.iter().copied().collect(),
        }
    }
}

impl TryFrom<&Matrix> for Array2<f64> {
    type Error = SgaError;

    fn try_from(m: &Matrix) -> Result<Self> {
        Array2::from_shape_vec((m.rows, m.cols), m.data.clone())
            .map_err(|e| SgaError::Checkpoint(format!("matrix {}x{}: {e}", m.rows, m.cols)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub seed: u64,
    pub num_nodes: usize,
    pub encoder: EncoderConfig,
    pub w_pos: Vec<Matrix>,
    pub w_neg: Vec<Matrix>,
    pub theta: Matrix,
}

impl Checkpoint {
    pub fn new(params: &ModelParams, encoder: &EncoderConfig, seed: u64, num_nodes: usize) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            seed,
            num_nodes,
            encoder: encoder.clone(),
            w_pos: params.w_pos.iter().map(Matrix::from).collect(),
            w_neg: params.w_neg.iter().map(Matrix::from).collect(),
            theta: Matrix::from(&params.theta),
        }
    }

    pub fn params(&self) -> Result<ModelParams> {
        let params = ModelParams {
            input_dim: self.encoder.feature_dim,
            dim: self.encoder.dim,
            w_pos: self.w_pos.iter().map(Array2::try_from).collect::<Result<_>>()?,
            w_neg: self.w_neg.iter().map(Array2::try_from).collect::<Result<_>>()?,
            theta: Array2::try_from(&self.theta)?,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        fs::write(path, text).map_err(|e| SgaError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| SgaError::io(path, e))?;
        let ckpt: Checkpoint = serde_json::from_str(&text)?;
        if ckpt.format != CHECKPOINT_FORMAT {
            return Err(SgaError::Checkpoint(format!("unexpected format tag {:?}", ckpt.format)));
        }
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(SgaError::Checkpoint(format!("unsupported version {}", ckpt.version)));
        }
        Ok(ckpt)
    }

    /// Recomputes embeddings on `graph`, which should be the graph the model
    /// was trained on. Input features are regenerated from the stored seed.
    pub fn embed(&self, graph: &SignedGraph) -> Result<EmbeddingState> {
        if graph.num_nodes() != self.num_nodes {
            return Err(SgaError::Checkpoint(format!(
                "checkpoint has {} nodes, graph has {}",
                self.num_nodes,
                graph.num_nodes()
            )));
        }
        let params = self.params()?;
        let features = initial_features(self.num_nodes, self.encoder.feature_dim, self.seed);
        forward(&NormalizedAdjacency::new(graph), &params, &features, self.encoder.activation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::train_encoder;
    use crate::graph::Sign;
    use crate::sampling::{rng_for, Stream};

    #[test]
    fn save_load_is_lossless() {
        let params = ModelParams::init(5, 4, 3, &mut rng_for(3, Stream::Init));
        let cfg = EncoderConfig {
            dim: 4,
            layers: 3,
            feature_dim: 5,
            ..EncoderConfig::default()
        };
        let ckpt = Checkpoint::new(&params, &cfg, 77, 12);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        ckpt.save(&path).unwrap();
        let back = Checkpoint::load(&path).unwrap();
        assert_eq!(back, ckpt);
        assert_eq!(back.params().unwrap(), params);
    }

    #[test]
    fn embed_reproduces_training_embeddings() {
        let g = SignedGraph::load(&[(0, 1, Sign::Positive), (1, 2, Sign::Negative), (2, 3, Sign::Positive), (0, 3, Sign::Positive)]).unwrap();
        let cfg = EncoderConfig {
            dim: 4,
            feature_dim: 4,
            epochs: 5,
            ..EncoderConfig::default()
        };
        let out = train_encoder(&g, &g.edges(), &cfg, 11).unwrap();
        let ckpt = Checkpoint::new(&out.params, &cfg, 11, g.num_nodes());
        assert_eq!(ckpt.embed(&g).unwrap().z, out.embeddings.z);
        assert!(ckpt.embed(&SignedGraph::new(9)).is_err());
    }

    #[test]
    fn rejects_foreign_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.json");
        let params = ModelParams::zeros(2, 2, 1);
        let mut ckpt = Checkpoint::new(&params, &EncoderConfig::default(), 0, 3);
        ckpt.version = 9;
        ckpt.save(&path).unwrap();
        assert!(matches!(Checkpoint::load(&path), Err(SgaError::Checkpoint(_))));
    }
}
