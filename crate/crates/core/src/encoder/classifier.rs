//! Three-way logistic classifier over pair embeddings: positive edge,
//! negative edge, or no edge.

use ndarray::{s, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SgaError};
use crate::graph::{EdgeSample, Sign};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeClass {
    Positive = 0,
    Negative = 1,
    NoEdge = 2,
}

impl From<Sign> for EdgeClass {
    fn from(sign: Sign) -> Self {
        match sign {
            Sign::Positive => EdgeClass::Positive,
            Sign::Negative => EdgeClass::Negative,
        }
    }
}

/// A classifier training example.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LabeledPair {
    pub u: usize,
    pub v: usize,
    pub class: EdgeClass,
}

impl From<&EdgeSample> for LabeledPair {
    fn from(e: &EdgeSample) -> Self {
        LabeledPair {
            u: e.u,
            v: e.v,
            class: e.sign.into(),
        }
    }
}

/// Class probabilities for one node pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassProbs {
    pub positive: f64,
    pub negative: f64,
    pub none: f64,
}

impl ClassProbs {
    pub fn as_array(&self) -> [f64; 3] {
        [self.positive, self.negative, self.none]
    }

    pub fn of(&self, class: EdgeClass) -> f64 {
        self.as_array()[class as usize]
    }
}

pub(crate) fn softmax3(logits: [f64; 3]) -> [f64; 3] {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e = logits.map(|x| (x - max).exp());
    let sum = e[0] + e[1] + e[2];
    e.map(|x| x / sum)
}

/// Per-node partial logits: `left = z · θ_top` and `right = z · θ_bottom`,
/// so the logits of pair `(u, v)` are `left[u] + right[v]`.
#[derive(Clone, Debug)]
pub struct PairScorer {
    left: Array2<f64>,
    right: Array2<f64>,
}

impl PairScorer {
    pub fn new(z: &Array2<f64>, theta: &Array2<f64>) -> Result<Self> {
        let width = z.ncols();
        if theta.dim() != (2 * width, 3) {
            return Err(SgaError::DimensionMismatch {
                layer: "theta".into(),
                expected: format!("({}, 3)", 2 * width),
                got: format!("{:?}", theta.dim()),
            });
        }
        Ok(PairScorer {
            left: z.dot(&theta.slice(s![0..width, ..])),
            right: z.dot(&theta.slice(s![width..2 * width, ..])),
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.left.nrows()
    }

    pub fn logits(&self, u: usize, v: usize) -> [f64; 3] {
        let (a, b) = (self.left.row(u), self.right.row(v));
        [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
    }

    pub fn probs(&self, u: usize, v: usize) -> ClassProbs {
        let [positive, negative, none] = softmax3(self.logits(u, v));
        ClassProbs {
            positive,
            negative,
            none,
        }
    }
}

fn pair_logits(zu: ArrayView1<f64>, zv: ArrayView1<f64>, theta: &Array2<f64>) -> [f64; 3] {
    let width = zu.len();
    let mut out = [0.0; 3];
    for (c, slot) in out.iter_mut().enumerate() {
        let col = theta.column(c);
        *slot = zu.dot(&col.slice(s![0..width])) + zv.dot(&col.slice(s![width..2 * width]));
    }
    out
}

/// Softmax probabilities of `[z_u, z_v] · θ` over positive, negative and
/// no-edge classes.
pub fn edge_class_probs(z: &Array2<f64>, theta: &Array2<f64>, u: usize, v: usize) -> ClassProbs {
    let [positive, negative, none] = softmax3(pair_logits(z.row(u), z.row(v), theta));
    ClassProbs {
        positive,
        negative,
        none,
    }
}

/// Mean cross-entropy over `samples`, and optionally its gradients with
/// respect to `z` and `θ`.
pub(crate) fn cross_entropy(
    z: &Array2<f64>,
    theta: &Array2<f64>,
    samples: &[LabeledPair],
    mut grads: Option<(&mut Array2<f64>, &mut Array2<f64>)>,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(SgaError::EmptyTrainingSet);
    }
    let width = z.ncols();
    let scale = 1.0 / samples.len() as f64;
    let mut total = 0.0;
    for s in samples {
        let logits = pair_logits(z.row(s.u), z.row(s.v), theta);
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let log_sum = max + logits.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
        total += log_sum - logits[s.class as usize];

        if let Some((d_z, d_theta)) = grads.as_mut() {
            let mut g = softmax3(logits);
            g[s.class as usize] -= 1.0;
            for (c, gc) in g.iter().enumerate() {
                let gc = gc * scale;
                let mut col = d_theta.column_mut(c);
                col.slice_mut(s![0..width]).scaled_add(gc, &z.row(s.u));
                col.slice_mut(s![width..2 * width]).scaled_add(gc, &z.row(s.v));
                let th = theta.column(c);
                d_z.row_mut(s.u).scaled_add(gc, &th.slice(s![0..width]));
                d_z.row_mut(s.v).scaled_add(gc, &th.slice(s![width..2 * width]));
            }
        }
    }
    Ok(total * scale)
}

/// Mean negative log-likelihood of the labelled edges together with the
/// sampled no-edge pairs.
pub fn loss(
    train: &[EdgeSample],
    z: &Array2<f64>,
    theta: &Array2<f64>,
    none_pairs: &[(usize, usize)],
) -> Result<f64> {
    if train.is_empty() {
        return Err(SgaError::EmptyTrainingSet);
    }
    let samples: Vec<LabeledPair> = train
        .iter()
        .map(LabeledPair::from)
        .chain(none_pairs.iter().map(|&(u, v)| LabeledPair {
            u,
            v,
            class: EdgeClass::NoEdge,
        }))
        .collect();
    cross_entropy(z, theta, &samples, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Scalar oracle: explicit sums and exponentials, no ndarray products.
    fn scalar_probs(z: &Array2<f64>, theta: &Array2<f64>, u: usize, v: usize) -> [f64; 3] {
        let w = z.ncols();
        let mut logits = [0.0f64; 3];
        for (c, l) in logits.iter_mut().enumerate() {
            for k in 0..w {
                *l += z[[u, k]] * theta[[k, c]];
                *l += z[[v, k]] * theta[[w + k, c]];
            }
        }
        let denom: f64 = logits.iter().map(|x| x.exp()).sum();
        logits.map(|x| x.exp() / denom)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
        Array2::from_shape_fn((rows, cols), |_| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn zero_theta_is_uniform() {
        let z = Array2::from_elem((3, 4), 0.7);
        let theta = Array2::zeros((8, 3));
        let p = edge_class_probs(&z, &theta, 0, 2);
        for x in p.as_array() {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn large_positive_logit_dominates() {
        let mut z = Array2::zeros((2, 1));
        z[[0, 0]] = 1.0;
        let mut theta = Array2::zeros((2, 3));
        theta[[0, 0]] = 800.0;
        let p = edge_class_probs(&z, &theta, 0, 1);
        assert_eq!(p.positive, 1.0);
        assert_eq!(p.negative, 0.0);
        assert!(p.positive.is_finite());
    }

    #[test]
    fn probs_match_scalar_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let z = random_matrix(&mut rng, 6, 4);
        let theta = random_matrix(&mut rng, 8, 3);
        let scorer = PairScorer::new(&z, &theta).unwrap();
        for u in 0..6 {
            for v in 0..6 {
                let oracle = scalar_probs(&z, &theta, u, v);
                let direct = edge_class_probs(&z, &theta, u, v).as_array();
                let cached = scorer.probs(u, v).as_array();
                for c in 0..3 {
                    assert!((direct[c] - oracle[c]).abs() < 1e-14);
                    assert!((cached[c] - oracle[c]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn loss_edge_cases() {
        assert!(matches!(
            loss(&[], &Array2::zeros((2, 2)), &Array2::zeros((4, 3)), &[]),
            Err(SgaError::EmptyTrainingSet)
        ));

        // uniform predictor on every sample: ln 3
        let z = Array2::from_elem((4, 2), 0.3);
        let theta = Array2::zeros((4, 3));
        let train = [
            EdgeSample::new(0, 1, Sign::Positive),
            EdgeSample::new(1, 2, Sign::Negative),
        ];
        let l = loss(&train, &z, &theta, &[(0, 3)]).unwrap();
        assert!((l - 3f64.ln()).abs() < 1e-15);

        // confident, correct prediction: loss 0
        let mut z = Array2::zeros((2, 1));
        z[[0, 0]] = 1.0;
        let mut theta = Array2::zeros((2, 3));
        theta[[0, 0]] = 800.0;
        let l = loss(&[EdgeSample::new(0, 1, Sign::Positive)], &z, &theta, &[]).unwrap();
        assert_eq!(l, 0.0);
    }

    #[test]
    fn loss_matches_scalar_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let z = random_matrix(&mut rng, 7, 4);
        let theta = random_matrix(&mut rng, 8, 3);
        let train = [
            EdgeSample::new(0, 1, Sign::Positive),
            EdgeSample::new(2, 5, Sign::Negative),
            EdgeSample::new(3, 6, Sign::Positive),
        ];
        let none = [(1, 4), (0, 6)];
        let mut expected = 0.0;
        for e in &train {
            let p = scalar_probs(&z, &theta, e.u, e.v);
            expected -= p[EdgeClass::from(e.sign) as usize].ln();
        }
        for &(u, v) in &none {
            expected -= scalar_probs(&z, &theta, u, v)[2].ln();
        }
        expected /= 5.0;
        let l = loss(&train, &z, &theta, &none).unwrap();
        assert!((l - expected).abs() < 1e-13, "{l} vs {expected}");
    }

    proptest! {
        #[test]
        fn probabilities_are_a_distribution(
            zs in prop::collection::vec(-50.0f64..50.0, 12),
            ts in prop::collection::vec(-5.0f64..5.0, 18),
        ) {
            let z = Array2::from_shape_vec((4, 3), zs).unwrap();
            let theta = Array2::from_shape_vec((6, 3), ts).unwrap();
            for u in 0..4 {
                for v in 0..4 {
                    let p = edge_class_probs(&z, &theta, u, v).as_array();
                    prop_assert!(p.iter().all(|x| (0.0..=1.0).contains(x)));
                    prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                }
            }
        }
    }
}
