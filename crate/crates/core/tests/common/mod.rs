//! Independent oracles shared by the integration suites.
#![allow(dead_code)]

use ndarray::Array2;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sga_core::encoder::{loss_and_gradients, loss_only, Activation, LabeledPair, ModelParams, NormalizedAdjacency};
use sga_core::augment::{Candidate, CandidateKind, CandidateSet};
use sga_core::graph::{balance_degree, EdgeSample, Sign, SignedGraph};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, density: f64, positive: f64) -> SignedGraph {
    let mut samples = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(density) {
                let sign = if rng.random_bool(positive) { Sign::Positive } else { Sign::Negative };
                samples.push(EdgeSample::new(u, v, sign));
            }
        }
    }
    SignedGraph::from_samples(n, &samples).unwrap()
}

/// Balanced / unbalanced triangle counts per node from all node triples.
pub fn brute_force_counts(g: &SignedGraph) -> (Vec<u64>, Vec<u64>) {
    let n = g.num_nodes();
    let mut bal = vec![0; n];
    let mut unbal = vec![0; n];
    for i in 0..n {
        for j in i + 1..n {
            let Some(a) = g.sign(i, j) else { continue };
            for k in j + 1..n {
                if let (Some(b), Some(c)) = (g.sign(j, k), g.sign(i, k)) {
                    let target = if a.value() * b.value() * c.value() > 0 { &mut bal } else { &mut unbal };
                    target[i] += 1;
                    target[j] += 1;
                    target[k] += 1;
                }
            }
        }
    }
    (bal, unbal)
}

/// Local balance degree of every node from brute-force counts.
pub fn brute_force_degrees(g: &SignedGraph, empty: f64) -> Vec<f64> {
    let (bal, unbal) = brute_force_counts(g);
    bal.iter().zip(&unbal).map(|(&b, &u)| balance_degree(b, u, empty)).collect()
}

/// Largest entry-wise relative error between analytic and central-difference
/// gradients, per parameter block. Entries are compared as
/// `|a - n| / max(|a|, |n|, 1e-6)`.
pub fn gradient_check(
    adj: &NormalizedAdjacency,
    params: &ModelParams,
    features: &Array2<f64>,
    activation: Activation,
    samples: &[LabeledPair],
    eps: f64,
) -> Vec<(String, f64)> {
    let (_, analytic) = loss_and_gradients(adj, params, features, activation, samples).unwrap();
    let names = params.block_names();
    let mut out = Vec::new();
    for (b, name) in names.into_iter().enumerate() {
        let mut worst: f64 = 0.0;
        let shape = params.blocks()[b].dim();
        for r in 0..shape.0 {
            for c in 0..shape.1 {
                let mut plus = params.clone();
                plus.blocks_mut()[b][[r, c]] += eps;
                let mut minus = params.clone();
                minus.blocks_mut()[b][[r, c]] -= eps;
                let lp = loss_only(adj, &plus, features, activation, samples).unwrap();
                let lm = loss_only(adj, &minus, features, activation, samples).unwrap();
                let numeric = (lp - lm) / (2.0 * eps);
                let a = analytic.blocks()[b][[r, c]];
                let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
                worst = worst.max(rel);
            }
        }
        out.push((name, worst));
    }
    out
}

/// A random 10-node instance: graph, params, features and labelled samples
/// (every edge plus as many random non-edges).
pub struct GradInstance {
    pub graph: SignedGraph,
    pub params: ModelParams,
    pub features: Array2<f64>,
    pub samples: Vec<LabeledPair>,
}

pub fn grad_instance(seed: u64, layers: usize) -> GradInstance {
    use sga_core::encoder::EdgeClass;
    let mut r = rng(seed);
    let graph = loop {
        let g = random_graph(&mut r, 10, 0.4, 0.6);
        if g.num_positive() > 0 && g.num_negative() > 0 {
            break g;
        }
    };
    let (input_dim, dim) = (3, 4);
    let params = ModelParams::init(input_dim, dim, layers, &mut r);
    let features = Array2::from_shape_fn((10, input_dim), |_| r.random_range(-1.0..1.0));
    let mut samples: Vec<LabeledPair> = graph.edges().iter().map(LabeledPair::from).collect();
    for u in 0..10 {
        for v in u + 1..10 {
            if !graph.has_edge(u, v) && r.random_bool(0.3) {
                samples.push(LabeledPair { u, v, class: EdgeClass::NoEdge });
            }
        }
    }
    GradInstance { graph, params, features, samples }
}

/// Exact comparison of two balance degrees given as triangle counts, with an
/// empty node counting as fully balanced. Returns `after >= before`.
pub fn degree_not_lower(before: (u64, u64), after: (u64, u64)) -> bool {
    let norm = |(b, u): (u64, u64)| if b + u == 0 { (1i128, 0i128) } else { (b as i128, u as i128) };
    let (b0, u0) = norm(before);
    let (b1, u1) = norm(after);
    // (b1 - u1) / (b1 + u1) >= (b0 - u0) / (b0 + u0), denominators positive
    (b1 - u1) * (b0 + u0) >= (b0 - u0) * (b1 + u1)
}

/// Edge-map graph rebuilt from scratch for every query.
#[derive(Clone)]
pub struct NaiveGraph {
    pub n: usize,
    pub edges: std::collections::BTreeMap<(usize, usize), Sign>,
}

impl NaiveGraph {
    pub fn of(g: &SignedGraph) -> Self {
        NaiveGraph {
            n: g.num_nodes(),
            edges: g.edges().iter().map(|e| (e.pair(), e.sign)).collect(),
        }
    }

    pub fn build(&self) -> SignedGraph {
        let samples: Vec<EdgeSample> = self.edges.iter().map(|(&(u, v), &sign)| EdgeSample { u, v, sign }).collect();
        SignedGraph::from_samples(self.n, &samples).unwrap()
    }

    /// (balanced, unbalanced) triangle counts of `v` by brute force.
    pub fn counts(&self, v: usize) -> (u64, u64) {
        let (bal, unbal) = brute_force_counts(&self.build());
        (bal[v], unbal[v])
    }
}

/// Mann-Whitney AUC by comparing every positive/negative pair.
pub fn pairwise_auc(scores: &[f64], truths: &[Sign]) -> Option<f64> {
    let pos: Vec<f64> = scores.iter().zip(truths).filter(|(_, t)| t.is_positive()).map(|(s, _)| *s).collect();
    let neg: Vec<f64> = scores.iter().zip(truths).filter(|(_, t)| !t.is_positive()).map(|(s, _)| *s).collect();
    if pos.is_empty() || neg.is_empty() {
        return None;
    }
    let mut twice_wins = 0u64;
    for p in &pos {
        for q in &neg {
            twice_wins += if p > q { 2 } else if p == q { 1 } else { 0 };
        }
    }
    Some(twice_wins as f64 / (2 * pos.len() * neg.len()) as f64)
}

/// (F1 positive, accuracy, macro F1) from an explicit confusion matrix.
pub fn confusion_f1(pred: &[Sign], truth: &[Sign]) -> (f64, f64, f64) {
    let mut m = [[0u64; 2]; 2]; // m[truth][pred], index 0 = positive
    for (p, t) in pred.iter().zip(truth) {
        m[usize::from(!t.is_positive())][usize::from(!p.is_positive())] += 1;
    }
    let f1 = |c: usize| {
        let tp = m[c][c];
        let fp = m[1 - c][c];
        let fn_ = m[c][1 - c];
        if 2 * tp + fp + fn_ == 0 {
            0.0
        } else {
            2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
        }
    };
    let acc = (m[0][0] + m[1][1]) as f64 / pred.len() as f64;
    (f1(0), acc, (f1(0) + f1(1)) / 2.0)
}

/// Random candidate set: additions on absent pairs, deletions on edges.
pub fn random_candidates(g: &SignedGraph, count: usize, r: &mut impl Rng) -> CandidateSet {
    let n = g.num_nodes();
    let mut additions = Vec::new();
    let mut deletions = Vec::new();
    let edges = g.edges();
    let mut seen = std::collections::HashSet::new();
    while additions.len() + deletions.len() < count {
        let margin = r.random_range(0.0..1.0);
        if r.random_bool(0.6) {
            let (u, v) = (r.random_range(0..n), r.random_range(0..n));
            let pair = (u.min(v), u.max(v));
            if u == v || g.has_edge(u, v) || !seen.insert(pair) {
                continue;
            }
            let sign = if r.random_bool(0.6) { Sign::Positive } else { Sign::Negative };
            additions.push(Candidate { kind: CandidateKind::Add, u: pair.0, v: pair.1, sign, prob: 0.9, margin });
        } else {
            let e = *edges.choose(r).unwrap();
            if !seen.insert(e.pair()) {
                continue;
            }
            deletions.push(Candidate { kind: CandidateKind::Delete, u: e.u, v: e.v, sign: e.sign, prob: 0.1, margin });
        }
    }
    CandidateSet { additions, deletions, ..CandidateSet::default() }
}
