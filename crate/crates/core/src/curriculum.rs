//! Edge difficulty from endpoint balance, and an easy-to-hard training
//! schedule with a linear pacing function.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::encoder::{EncoderConfig, EpochSubset, TrainOutcome, TrainingProblem};
use crate::error::{Result, SgaError};
use crate::graph::{EdgeSample, SignedGraph};

/// Difficulty `1 - (D3(u) + D3(v)) / 2` of an edge.
pub fn difficulty(degree_u: f64, degree_v: f64) -> f64 {
    1.0 - (degree_u + degree_v) / 2.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredEdge {
    pub edge: EdgeSample,
    pub score: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DifficultyTable {
    entries: Vec<ScoredEdge>,
    index: HashMap<(usize, usize), usize>,
}

impl DifficultyTable {
    pub fn entries(&self) -> &[ScoredEdge] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn score(&self, u: usize, v: usize) -> Option<f64> {
        let key = if u <= v { (u, v) } else { (v, u) };
        self.index.get(&key).map(|&i| self.entries[i].score)
    }
}

/// Scores `edges` against the balance degrees of `graph`. Every edge must be
/// present in the graph.
pub fn score_edges(graph: &SignedGraph, edges: &[EdgeSample]) -> Result<DifficultyTable> {
    let mut table = DifficultyTable::default();
    for e in edges {
        if graph.sign(e.u, e.v) != Some(e.sign) {
            return Err(SgaError::EdgeMissing(e.u, e.v));
        }
        let score = difficulty(graph.local_balance_degree(e.u)?, graph.local_balance_degree(e.v)?);
        table.index.insert(e.pair(), table.entries.len());
        table.entries.push(ScoredEdge { edge: *e, score });
    }
    Ok(table)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurriculumConfig {
    /// Fraction of the easiest edges visible at epoch 0.
    pub lambda0: f64,
    /// Epoch at which every edge becomes visible.
    pub pacing_epochs: usize,
}

impl Default for CurriculumConfig {
    fn default() -> Self {
        CurriculumConfig {
            lambda0: 0.25,
            pacing_epochs: 150,
        }
    }
}

impl CurriculumConfig {
    pub fn validate(&self) -> Vec<String> {
        if self.lambda0 > 0.0 && self.lambda0 <= 1.0 {
            Vec::new()
        } else {
            vec![format!("curriculum.lambda0 must lie in (0, 1], got {}", self.lambda0)]
        }
    }
}

/// Number of edges visible at epoch `t`:
/// `floor(min(1, λ0 + (1 - λ0) t / T) * |E|)`, at least one. `T = 0` exposes
/// everything from the start.
pub fn pacing(t: usize, lambda0: f64, pacing_epochs: usize, num_edges: usize) -> usize {
    if num_edges == 0 {
        return 0;
    }
    if pacing_epochs == 0 || t >= pacing_epochs {
        return num_edges;
    }
    let fraction = (lambda0 + (1.0 - lambda0) * t as f64 / pacing_epochs as f64).min(1.0);
    // the slack absorbs representation error such as 0.3 * 10 = 2.9999999999999996
    let count = (fraction * num_edges as f64 + 1e-9).floor() as usize;
    count.clamp(1, num_edges)
}

/// Training edges ordered easiest first, plus the pacing parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct CurriculumSchedule {
    pub sorted_edges: Vec<EdgeSample>,
    pub lambda0: f64,
    pub pacing_epochs: usize,
    pub total_epochs: usize,
}

impl CurriculumSchedule {
    /// Sorts by ascending difficulty, ties broken by `(u, v)`.
    pub fn new(table: &DifficultyTable, config: &CurriculumConfig, total_epochs: usize) -> Self {
        let mut entries = table.entries().to_vec();
        entries.sort_by(|a, b| a.score.total_cmp(&b.score).then(a.edge.cmp(&b.edge)));
        CurriculumSchedule {
            sorted_edges: entries.into_iter().map(|s| s.edge).collect(),
            lambda0: config.lambda0,
            pacing_epochs: config.pacing_epochs,
            total_epochs,
        }
    }

    pub fn num_edges(&self) -> usize {
        self.sorted_edges.len()
    }

    pub fn pacing(&self, t: usize) -> usize {
        pacing(t, self.lambda0, self.pacing_epochs, self.num_edges())
    }

    /// The edges visible at epoch `t`.
    pub fn visible(&self, t: usize) -> &[EdgeSample] {
        &self.sorted_edges[..self.pacing(t)]
    }
}

/// Trains on the easiest `pacing(t)` edges at epoch `t`. No-edge samples
/// shrink in proportion, so the class mix stays stable. The message-passing
/// graph is the full `graph` throughout.
pub fn train_with_curriculum(
    graph: &SignedGraph,
    edges: &[EdgeSample],
    schedule: &CurriculumSchedule,
    config: &EncoderConfig,
    seed: u64,
) -> Result<TrainOutcome> {
    let rank: HashMap<(usize, usize), usize> = schedule
        .sorted_edges
        .iter()
        .enumerate()
        .map(|(i, e)| (e.pair(), i))
        .collect();
    if rank.len() != edges.len() {
        return Err(SgaError::InvalidArgument(format!(
            "schedule covers {} edges, training set has {}",
            rank.len(),
            edges.len()
        )));
    }
    let ranks: Vec<usize> = edges
        .iter()
        .map(|e| rank.get(&e.pair()).copied().ok_or(SgaError::EdgeMissing(e.u, e.v)))
        .collect::<Result<_>>()?;

    let problem = TrainingProblem {
        graph,
        edges,
        config,
        seed,
    };
    let total = edges.len();
    problem.fit(|epoch, num_none| {
        let budget = schedule.pacing(epoch);
        EpochSubset {
            edges: (0..total).filter(|&i| ranks[i] < budget).collect(),
            none: (num_none * budget + total / 2) / total.max(1),
        }
    })
}

/// Scores the training edges on `graph` and builds the schedule.
pub fn build_schedule(
    graph: &SignedGraph,
    edges: &[EdgeSample],
    config: &CurriculumConfig,
    total_epochs: usize,
) -> Result<CurriculumSchedule> {
    let table = score_edges(graph, edges)?;
    Ok(CurriculumSchedule::new(&table, config, total_epochs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::train_encoder;
    use crate::graph::Sign::{Negative as N, Positive as P};
    use proptest::prelude::*;

    #[test]
    fn difficulty_extremes() {
        assert_eq!(difficulty(1.0, 1.0), 0.0);
        assert_eq!(difficulty(-1.0, -1.0), 2.0);
        assert_eq!(difficulty(0.5, 0.0), 0.75);
    }

    #[test]
    fn lone_unbalanced_triangle() {
        let g = SignedGraph::load(&[(0, 1, P), (1, 2, P), (0, 2, N)]).unwrap();
        let table = score_edges(&g, &g.edges()).unwrap();
        for v in 0..3 {
            assert_eq!(g.local_balance_degree(v).unwrap(), -1.0);
        }
        assert!(table.entries().iter().all(|s| s.score == 2.0));
        assert_eq!(table.score(2, 0), Some(2.0));
    }

    #[test]
    fn scoring_unknown_edge_fails() {
        let g = SignedGraph::load(&[(0, 1, P), (1, 2, P)]).unwrap();
        assert!(matches!(
            score_edges(&g, &[EdgeSample::new(0, 2, P)]),
            Err(SgaError::EdgeMissing(0, 2))
        ));
        assert!(score_edges(&g, &[EdgeSample::new(0, 1, N)]).is_err());
    }

    #[test]
    fn pacing_examples() {
        assert_eq!(pacing(0, 0.25, 100, 1000), 250);
        assert_eq!(pacing(50, 0.25, 100, 1000), 625);
        assert_eq!(pacing(100, 0.25, 100, 1000), 1000);
        assert_eq!(pacing(250, 0.25, 100, 1000), 1000);
        assert_eq!(pacing(0, 0.01, 100, 10), 1);
        assert_eq!(pacing(0, 0.3, 10, 10), 3);
        assert_eq!(pacing(0, 0.25, 0, 8), 8);
    }

    #[test]
    fn hardest_edge_enters_last() {
        // triangle 0-1-2 balanced; triangle 0-2-3 unbalanced through (0,3,-)
        let g = SignedGraph::load(&[(0, 1, P), (1, 2, P), (0, 2, P), (2, 3, P), (0, 3, N)]).unwrap();
        let schedule = build_schedule(&g, &g.edges(), &CurriculumConfig { lambda0: 0.2, pacing_epochs: 4 }, 10).unwrap();
        let order: Vec<(usize, usize)> = schedule.sorted_edges.iter().map(|e| e.pair()).collect();
        // D3: node0 0, node1 1, node2 0, node3 -1
        assert_eq!(order, vec![(0, 1), (1, 2), (0, 2), (0, 3), (2, 3)]);
        let sizes: Vec<usize> = (0..6).map(|t| schedule.pacing(t)).collect();
        assert_eq!(sizes, vec![1, 2, 3, 4, 5, 5]);
        assert!(!schedule.visible(3).contains(&EdgeSample::new(2, 3, P)));
    }

    #[test]
    fn full_initial_fraction_reproduces_plain_training() {
        let g = SignedGraph::load(&[
            (0, 1, P),
            (1, 2, P),
            (0, 2, N),
            (2, 3, P),
            (3, 4, N),
            (4, 5, P),
            (1, 5, P),
            (0, 5, N),
        ])
        .unwrap();
        let edges = g.edges();
        let cfg = EncoderConfig {
            dim: 4,
            feature_dim: 4,
            epochs: 12,
            ..EncoderConfig::default()
        };
        let schedule = build_schedule(&g, &edges, &CurriculumConfig { lambda0: 1.0, pacing_epochs: 5 }, 12).unwrap();
        let plain = train_encoder(&g, &edges, &cfg, 4).unwrap();
        let curriculum = train_with_curriculum(&g, &edges, &schedule, &cfg, 4).unwrap();
        assert_eq!(plain.params, curriculum.params);
        assert_eq!(plain.history, curriculum.history);

        let ramp = build_schedule(&g, &edges, &CurriculumConfig { lambda0: 0.25, pacing_epochs: 6 }, 12).unwrap();
        let out = train_with_curriculum(&g, &edges, &ramp, &cfg, 4).unwrap();
        let sizes: Vec<usize> = out.history.iter().map(|r| r.edges_used).collect();
        assert!(sizes.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(sizes[0], 2);
        assert_eq!(*sizes.last().unwrap(), edges.len());
        assert_ne!(out.params, plain.params);
    }

    proptest! {
        #[test]
        fn pacing_is_monotone_and_saturates(lambda0 in 0.01f64..=1.0, t_max in 0usize..60, n in 1usize..500) {
            let mut prev = 0;
            for t in 0..=t_max + 5 {
                let k = pacing(t, lambda0, t_max, n);
                prop_assert!(k >= prev && k >= 1 && k <= n);
                if t >= t_max {
                    prop_assert_eq!(k, n);
                }
                prev = k;
            }
        }

        #[test]
        fn scores_bounded_symmetric_and_sorted(
            cells in prop::collection::vec(prop::option::weighted(0.6, any::<bool>()), 28),
        ) {
            let mut samples = Vec::new();
            let mut idx = 0;
            for u in 0..8 {
                for v in u + 1..8 {
                    if let Some(pos) = cells[idx] {
                        samples.push(EdgeSample::new(u, v, if pos { P } else { N }));
                    }
                    idx += 1;
                }
            }
            let g = SignedGraph::from_samples(8, &samples).unwrap();
            let edges = g.edges();
            let table = score_edges(&g, &edges).unwrap();
            for s in table.entries() {
                prop_assert!((0.0..=2.0).contains(&s.score));
                prop_assert_eq!(table.score(s.edge.v, s.edge.u), Some(s.score));
            }
            let schedule = CurriculumSchedule::new(&table, &CurriculumConfig::default(), 10);
            let mut sorted = schedule.sorted_edges.clone();
            sorted.sort();
            prop_assert_eq!(sorted, edges);
            let scores: Vec<f64> = schedule.sorted_edges.iter().map(|e| table.score(e.u, e.v).unwrap()).collect();
            prop_assert!(scores.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
