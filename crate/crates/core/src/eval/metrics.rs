//! Link-sign metrics: AUC over the positive-class score and F1 variants.

use log::warn;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::encoder::PairScorer;
use crate::error::{Result, SgaError};
use crate::graph::{EdgeSample, Sign};

/// Test-time prediction for one edge. The no-edge class is ignored.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    /// `Pr+ / (Pr+ + Pr-)`.
    pub score: f64,
    pub label: Sign,
}

pub fn predict_signs(z: &Array2<f64>, theta: &Array2<f64>, test: &[EdgeSample]) -> Result<Vec<Prediction>> {
    let scorer = PairScorer::new(z, theta)?;
    Ok(test
        .iter()
        .map(|e| {
            let p = scorer.probs(e.u, e.v);
            let denom = p.positive + p.negative;
            let score = if denom > 0.0 { p.positive / denom } else { 0.5 };
            let label = if p.positive >= p.negative { Sign::Positive } else { Sign::Negative };
            Prediction { score, label }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Absent when the truth set has a single class.
    pub auc: Option<f64>,
    pub f1_binary: f64,
    pub f1_micro: f64,
    pub f1_macro: f64,
}

/// Mann-Whitney AUC with tied scores counted as half. `None` when either
/// class is missing.
pub fn auc(scores: &[f64], truths: &[Sign]) -> Option<f64> {
    let n_pos = truths.iter().filter(|s| s.is_positive()).count() as u64;
    let n_neg = truths.len() as u64 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // twice the rank sum of positives, with average ranks over ties
    let mut doubled_rank_sum: u64 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their mean, (i + j + 2) / 2
        let positives = order[i..=j].iter().filter(|&&k| truths[k].is_positive()).count() as u64;
        doubled_rank_sum += positives * (i + j + 2) as u64;
        i = j + 1;
    }
    let doubled_u = doubled_rank_sum - n_pos * (n_pos + 1);
    Some(doubled_u as f64 / (2 * n_pos * n_neg) as f64)
}

fn f1(tp: u64, fp: u64, fn_: u64) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        (2 * tp) as f64 / denom as f64
    }
}

pub fn compute_metrics(predictions: &[Prediction], truths: &[Sign]) -> Result<Metrics> {
    if predictions.is_empty() {
        return Err(SgaError::InvalidArgument("no test predictions".into()));
    }
    if predictions.len() != truths.len() {
        return Err(SgaError::InvalidArgument(format!(
            "{} predictions for {} truths",
            predictions.len(),
            truths.len()
        )));
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0u64, 0u64, 0u64, 0u64);
    for (p, &t) in predictions.iter().zip(truths) {
        match (p.label, t) {
            (Sign::Positive, Sign::Positive) => tp += 1,
            (Sign::Positive, Sign::Negative) => fp += 1,
            (Sign::Negative, Sign::Negative) => tn += 1,
            (Sign::Negative, Sign::Positive) => fn_ += 1,
        }
    }
    let scores: Vec<f64> = predictions.iter().map(|p| p.score).collect();
    let auc = auc(&scores, truths);
    if auc.is_none() {
        warn!("test set has a single class; AUC undefined");
    }
    let f1_pos = f1(tp, fp, fn_);
    let f1_neg = f1(tn, fn_, fp);
    // micro-averaged F1 over both classes is plain accuracy
    let f1_micro = (tp + tn) as f64 / predictions.len() as f64;
    Ok(Metrics {
        auc,
        f1_binary: f1_pos,
        f1_micro,
        f1_macro: (f1_pos + f1_neg) / 2.0,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub count: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        if values.is_empty() {
            return Summary::default();
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        Summary {
            mean,
            std: var.sqrt(),
            count: values.len(),
        }
    }
}

/// Mean and standard deviation of each metric across runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    pub auc: Summary,
    pub f1_binary: Summary,
    pub f1_micro: Summary,
    pub f1_macro: Summary,
}

impl AggregateMetrics {
    pub fn of<'a>(runs: impl IntoIterator<Item = &'a Metrics>) -> Self {
        let runs: Vec<&Metrics> = runs.into_iter().collect();
        let pick = |f: &dyn Fn(&Metrics) -> Option<f64>| -> Summary {
            Summary::of(&runs.iter().filter_map(|m| f(m)).collect::<Vec<_>>())
        };
        AggregateMetrics {
            auc: pick(&|m| m.auc),
            f1_binary: pick(&|m| Some(m.f1_binary)),
            f1_micro: pick(&|m| Some(m.f1_micro)),
            f1_macro: pick(&|m| Some(m.f1_macro)),
        }
    }
}
