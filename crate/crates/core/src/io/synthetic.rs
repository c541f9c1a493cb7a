//! Seeded synthetic signed graphs with a planted two-faction structure.
//!
//! Nodes split into a majority and a minority faction, the minority holding
//! about `1 - positive_ratio` of the nodes (between 5% and 50%). Edges inside
//! a faction are positive and edges across are negative, so every triangle
//! starts balanced and minority members collect most negative links. Endpoints
//! are drawn with heavy-tailed (Pareto) propensities to give a skewed degree
//! distribution. A `1 - planted_balance` fraction of edges then has its signs
//! shuffled among themselves, which breaks balance while keeping the number
//! of positive edges exact.

use std::collections::HashSet;

use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_distr::Pareto;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SgaError};
use crate::graph::{canonical_pair, EdgeSample, Sign, SignedGraph};
use crate::sampling::{rng_for, Stream};

const PARETO_SHAPE: f64 = 2.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub num_nodes: usize,
    /// Fraction of all node pairs that carry an edge.
    pub edge_density: f64,
    pub positive_ratio: f64,
    /// Fraction of edges whose sign follows the faction structure.
    pub planted_balance: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            num_nodes: 500,
            edge_density: 0.02,
            positive_ratio: 0.85,
            planted_balance: 0.9,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Vec<String> {
        let mut errors = Vec::new();
        if self.num_nodes < 3 {
            errors.push(format!("synthetic.num_nodes must be at least 3, got {}", self.num_nodes));
        }
        if !(self.edge_density > 0.0 && self.edge_density <= 1.0) {
            errors.push(format!("synthetic.edge_density must lie in (0, 1], got {}", self.edge_density));
        }
        for (name, value) in [("positive_ratio", self.positive_ratio), ("planted_balance", self.planted_balance)] {
            if !(0.0..=1.0).contains(&value) {
                errors.push(format!("synthetic.{name} must lie in [0, 1], got {value}"));
            }
        }
        errors
    }

    pub fn num_edges(&self) -> usize {
        let pairs = self.num_nodes * self.num_nodes.saturating_sub(1) / 2;
        (self.edge_density * pairs as f64).round() as usize
    }
}

/// Nodes `0..minority` form the minority faction.
fn minority_size(spec: &SyntheticSpec) -> usize {
    let share = (1.0 - spec.positive_ratio).clamp(0.05, 0.5);
    ((share * spec.num_nodes as f64).round() as usize).max(1)
}

/// Draws `need` new pairs with `faction(u) == faction(v)` equal to `same`.
fn draw_pairs(
    n: usize,
    faction: impl Fn(usize) -> bool,
    weights: &WeightedIndex<f64>,
    same: bool,
    need: usize,
    taken: &mut HashSet<(usize, usize)>,
    rng: &mut impl Rng,
) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(need);
    let mut attempts = 30 * need + 1000;
    while out.len() < need && attempts > 0 {
        attempts -= 1;
        let (a, b) = (weights.sample(rng), weights.sample(rng));
        if a == b || (faction(a) == faction(b)) != same {
            continue;
        }
        let p = canonical_pair(a, b);
        if taken.insert(p) {
            out.push(p);
        }
    }
    if out.len() < need {
        // Propensity sampling saturated: fill uniformly from what is left.
        let mut rest: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|&(u, v)| (faction(u) == faction(v)) == same && !taken.contains(&(u, v)))
            .collect();
        rest.shuffle(rng);
        for p in rest.into_iter().take(need - out.len()) {
            taken.insert(p);
            out.push(p);
        }
    }
    out
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SignedGraph> {
    let errors = spec.validate();
    if !errors.is_empty() {
        return Err(SgaError::InvalidConfig(errors));
    }
    let n = spec.num_nodes;
    let m = spec.num_edges();
    let m_pos = (spec.positive_ratio * m as f64).round() as usize;
    let m_neg = m - m_pos;
    let b = minority_size(spec);
    let a = n - b;
    let faction = |v: usize| v < b;
    let intra = a * (a - 1) / 2 + b * b.saturating_sub(1) / 2;
    let inter = a * b;
    if m_pos > intra || m_neg > inter {
        return Err(SgaError::InvalidArgument(format!(
            "cannot place {m_pos} positive / {m_neg} negative edges: only {intra} intra- and {inter} inter-faction pairs"
        )));
    }

    let mut rng = rng_for(spec.seed, Stream::Synthetic);
    let pareto = Pareto::new(1.0, PARETO_SHAPE).expect("valid pareto parameters");
    let propensity: Vec<f64> = (0..n).map(|_| pareto.sample(&mut rng)).collect();
    let weights = WeightedIndex::new(&propensity).expect("positive weights");

    let mut taken = HashSet::with_capacity(m);
    let positive = draw_pairs(n, faction, &weights, true, m_pos, &mut taken, &mut rng);
    let negative = draw_pairs(n, faction, &weights, false, m_neg, &mut taken, &mut rng);
    let mut edges: Vec<EdgeSample> = positive
        .into_iter()
        .map(|(u, v)| EdgeSample { u, v, sign: Sign::Positive })
        .chain(negative.into_iter().map(|(u, v)| EdgeSample { u, v, sign: Sign::Negative }))
        .collect();

    let noisy = ((1.0 - spec.planted_balance) * m as f64).round() as usize;
    let chosen: Vec<usize> = rand::seq::index::sample(&mut rng, m, noisy).into_vec();
    let mut signs: Vec<Sign> = chosen.iter().map(|&i| edges[i].sign).collect();
    signs.shuffle(&mut rng);
    for (&i, s) in chosen.iter().zip(signs) {
        edges[i].sign = s;
    }
    SignedGraph::from_samples(n, &edges)
}
