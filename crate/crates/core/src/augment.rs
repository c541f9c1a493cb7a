//! Candidate edge generation from classifier probabilities, and selection of
//! the candidates that keep local balance from dropping.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};

use log::{info, warn};
use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::encoder::{train_encoder, ClassProbs, EncoderConfig, PairScorer, TrainOutcome};
use crate::error::Result;
use crate::graph::{canonical_pair, Change, EdgeSample, Sign, SignedGraph};
use crate::sampling::{rng_for, Stream};

/// Probability thresholds and resource caps for augmentation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    /// Add a positive edge when `Pr+ > eps_add_pos`.
    pub eps_add_pos: f64,
    /// Add a negative edge when `Pr- > eps_add_neg`.
    pub eps_add_neg: f64,
    /// Delete a positive edge when `Pr+ < eps_del_pos`.
    pub eps_del_pos: f64,
    /// Delete a negative edge when `Pr- < eps_del_neg`.
    pub eps_del_neg: f64,
    /// Keep at most this many additions and this many deletions, ranked by
    /// margin past the threshold.
    pub max_candidates_per_kind: usize,
    /// Number of random non-adjacent pairs without a common neighbour that
    /// are scored alongside the two-hop pairs.
    pub distant_pairs: usize,
    pub screen_deletions: bool,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            eps_add_pos: 0.8,
            eps_add_neg: 0.8,
            eps_del_pos: 0.2,
            eps_del_neg: 0.2,
            max_candidates_per_kind: 2000,
            distant_pairs: 5000,
            screen_deletions: true,
        }
    }
}

impl AugmentConfig {
    /// Thresholds that can never fire.
    pub fn reject_all() -> Self {
        AugmentConfig {
            eps_add_pos: 1.0,
            eps_add_neg: 1.0,
            eps_del_pos: 0.0,
            eps_del_neg: 0.0,
            ..AugmentConfig::default()
        }
    }

    pub fn validate(&self) -> Vec<String> {
        let mut errors = Vec::new();
        for (name, value) in [
            ("eps_add_pos", self.eps_add_pos),
            ("eps_add_neg", self.eps_add_neg),
            ("eps_del_pos", self.eps_del_pos),
            ("eps_del_neg", self.eps_del_neg),
        ] {
            if !(0.0..=1.0).contains(&value) {
                errors.push(format!("augment.{name} must lie in [0, 1], got {value}"));
            }
        }
        errors
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateKind {
    Add,
    Delete,
}

/// A proposed modification with the probability that triggered it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub kind: CandidateKind,
    pub u: usize,
    pub v: usize,
    pub sign: Sign,
    /// `Pr+` or `Pr-` for the candidate's sign.
    pub prob: f64,
    /// Distance past the threshold (always positive).
    pub margin: f64,
}

impl Candidate {
    pub fn change(&self) -> Change {
        match self.kind {
            CandidateKind::Add => Change::Add {
                u: self.u,
                v: self.v,
                sign: self.sign,
            },
            CandidateKind::Delete => Change::Delete { u: self.u, v: self.v },
        }
    }

    pub fn sample(&self) -> EdgeSample {
        EdgeSample::new(self.u, self.v, self.sign)
    }
}

fn by_margin(a: &Candidate, b: &Candidate) -> Ordering {
    b.margin
        .total_cmp(&a.margin)
        .then(a.kind.cmp(&b.kind))
        .then((a.u, a.v).cmp(&(b.u, b.v)))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CandidateStats {
    pub two_hop_pairs: usize,
    pub distant_pairs: usize,
    pub additions_found: usize,
    pub deletions_found: usize,
    pub additions_kept: usize,
    pub deletions_kept: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub additions: Vec<Candidate>,
    pub deletions: Vec<Candidate>,
    pub stats: CandidateStats,
}

impl CandidateSet {
    pub fn is_empty(&self) -> bool {
        self.additions.is_empty() && self.deletions.is_empty()
    }

    /// All candidates in screening order: descending margin.
    pub fn ordered(&self) -> Vec<Candidate> {
        let mut all: Vec<Candidate> = self.additions.iter().chain(&self.deletions).copied().collect();
        all.sort_by(by_margin);
        all
    }
}

/// Applies the addition rule to one absent pair.
pub fn addition_rule(u: usize, v: usize, p: ClassProbs, cfg: &AugmentConfig) -> Option<Candidate> {
    let pos = p.positive > cfg.eps_add_pos;
    let neg = p.negative > cfg.eps_add_neg;
    let (sign, prob, eps) = match (pos, neg) {
        (false, false) => return None,
        (true, false) => (Sign::Positive, p.positive, cfg.eps_add_pos),
        (false, true) => (Sign::Negative, p.negative, cfg.eps_add_neg),
        (true, true) if p.positive >= p.negative => (Sign::Positive, p.positive, cfg.eps_add_pos),
        (true, true) => (Sign::Negative, p.negative, cfg.eps_add_neg),
    };
    let (u, v) = canonical_pair(u, v);
    Some(Candidate {
        kind: CandidateKind::Add,
        u,
        v,
        sign,
        prob,
        margin: prob - eps,
    })
}

/// Applies the deletion rule to one existing edge.
pub fn deletion_rule(edge: &EdgeSample, p: ClassProbs, cfg: &AugmentConfig) -> Option<Candidate> {
    let (prob, eps) = match edge.sign {
        Sign::Positive => (p.positive, cfg.eps_del_pos),
        Sign::Negative => (p.negative, cfg.eps_del_neg),
    };
    (prob < eps).then_some(Candidate {
        kind: CandidateKind::Delete,
        u: edge.u,
        v: edge.v,
        sign: edge.sign,
        prob,
        margin: eps - prob,
    })
}

/// Non-adjacent pairs sharing at least one neighbour, each once as `u < v`.
pub fn two_hop_pairs(graph: &SignedGraph) -> Vec<(usize, usize)> {
    let n = graph.num_nodes();
    let mut stamp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for u in 0..n {
        for &(w, _) in graph.neighbors(u) {
            for &(v, _) in graph.neighbors(w) {
                if v > u && stamp[v] != u {
                    stamp[v] = u;
                    if !graph.has_edge(u, v) {
                        out.push((u, v));
                    }
                }
            }
        }
    }
    out
}

fn distant_pairs(graph: &SignedGraph, count: usize, skip: &HashSet<(usize, usize)>, seed: u64) -> Vec<(usize, usize)> {
    let n = graph.num_nodes();
    if n < 2 || count == 0 {
        return Vec::new();
    }
    let total = n * (n - 1) / 2;
    let available = total.saturating_sub(graph.num_edges() + skip.len());
    let mut rng = rng_for(seed, Stream::CandidatePairs);
    if count >= available {
        return (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|&(u, v)| !graph.has_edge(u, v) && !skip.contains(&(u, v)))
            .collect();
    }
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    // bounded rejection sampling; dense graphs fall back to the exhaustive branch above
    let mut attempts = 0usize;
    while out.len() < count && attempts < count.saturating_mul(50) {
        attempts += 1;
        let pair = canonical_pair(rng.random_range(0..n), rng.random_range(0..n));
        if pair.0 == pair.1 || graph.has_edge(pair.0, pair.1) || skip.contains(&pair) || !seen.insert(pair) {
            continue;
        }
        out.push(pair);
    }
    out
}

/// Scores the pair universe (two-hop pairs plus a seeded sample of distant
/// pairs) and every existing edge, then keeps the candidates that pass their
/// threshold, capped per kind by margin. Pairs in `held_out` are never
/// scored.
pub fn generate_candidates(
    graph: &SignedGraph,
    z: &Array2<f64>,
    theta: &Array2<f64>,
    cfg: &AugmentConfig,
    held_out: &HashSet<(usize, usize)>,
    seed: u64,
) -> Result<CandidateSet> {
    let scorer = PairScorer::new(z, theta)?;
    let near: Vec<(usize, usize)> = two_hop_pairs(graph).into_iter().filter(|p| !held_out.contains(p)).collect();
    let mut skip: HashSet<(usize, usize)> = near.iter().copied().collect();
    skip.extend(held_out.iter().copied());
    let far = distant_pairs(graph, cfg.distant_pairs, &skip, seed);

    let mut additions: Vec<Candidate> = near
        .iter()
        .chain(far.iter())
        .filter_map(|&(u, v)| addition_rule(u, v, scorer.probs(u, v), cfg))
        .collect();
    let mut deletions: Vec<Candidate> = graph
        .edges()
        .iter()
        .filter_map(|e| deletion_rule(e, scorer.probs(e.u, e.v), cfg))
        .collect();

    let mut stats = CandidateStats {
        two_hop_pairs: near.len(),
        distant_pairs: far.len(),
        additions_found: additions.len(),
        deletions_found: deletions.len(),
        ..CandidateStats::default()
    };
    additions.sort_by(by_margin);
    deletions.sort_by(by_margin);
    additions.truncate(cfg.max_candidates_per_kind);
    deletions.truncate(cfg.max_candidates_per_kind);
    stats.additions_kept = additions.len();
    stats.deletions_kept = deletions.len();
    if stats.additions_found > stats.additions_kept || stats.deletions_found > stats.deletions_kept {
        info!(
            "candidate cap {} reached: {} / {} additions, {} / {} deletions kept",
            cfg.max_candidates_per_kind,
            stats.additions_kept,
            stats.additions_found,
            stats.deletions_kept,
            stats.deletions_found
        );
    }
    Ok(CandidateSet {
        additions,
        deletions,
        stats,
    })
}

/// Outcome of screening one candidate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub candidate: Candidate,
    pub delta_u: f64,
    pub delta_v: f64,
    /// Whether the balance rule was evaluated (unscreened deletions skip it).
    pub screened: bool,
}

#[derive(Clone, Debug)]
pub struct Selection {
    pub accepted: Vec<Decision>,
    pub rejected: Vec<Decision>,
    /// `graph` with every accepted change applied, in acceptance order.
    pub augmented: SignedGraph,
}

/// Screens candidates one at a time in descending-margin order against the
/// evolving graph: a candidate is accepted iff neither endpoint's local
/// balance degree decreases. The input graph is left untouched.
pub fn select_beneficial(graph: &SignedGraph, candidates: &CandidateSet, cfg: &AugmentConfig) -> Result<Selection> {
    let mut augmented = graph.clone();
    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    for candidate in candidates.ordered() {
        let change = candidate.change();
        let (delta_u, delta_v) = augmented.balance_delta(&change)?;
        let screened = candidate.kind == CandidateKind::Add || cfg.screen_deletions;
        let decision = Decision {
            candidate,
            delta_u,
            delta_v,
            screened,
        };
        if !screened || (delta_u >= 0.0 && delta_v >= 0.0) {
            augmented.apply_change(&change)?;
            accepted.push(decision);
        } else {
            rejected.push(decision);
        }
    }
    Ok(Selection {
        accepted,
        rejected,
        augmented,
    })
}

/// `train` plus accepted additions minus accepted deletions, sorted by pair.
/// A pair added with both signs keeps the more probable one.
pub fn build_augmented_trainset(train: &[EdgeSample], accepted: &[Candidate]) -> Vec<EdgeSample> {
    let mut edges: BTreeMap<(usize, usize), Sign> = train.iter().map(|e| (e.pair(), e.sign)).collect();
    let mut additions: BTreeMap<(usize, usize), Candidate> = BTreeMap::new();
    for c in accepted.iter().filter(|c| c.kind == CandidateKind::Add) {
        let key = canonical_pair(c.u, c.v);
        match additions.get(&key) {
            Some(prev) if prev.sign != c.sign => {
                warn!(
                    "pair ({}, {}) added with both signs; keeping the more probable one",
                    key.0, key.1
                );
                if c.prob > prev.prob {
                    additions.insert(key, *c);
                }
            }
            Some(_) => {}
            None => {
                additions.insert(key, *c);
            }
        }
    }
    for c in accepted.iter().filter(|c| c.kind == CandidateKind::Delete) {
        edges.remove(&canonical_pair(c.u, c.v));
    }
    for (key, c) in additions {
        edges.entry(key).or_insert(c.sign);
    }
    edges.into_iter().map(|((u, v), sign)| EdgeSample { u, v, sign }).collect()
}

/// One augmentation round: stage-one encoder, candidates, screening result
/// and the augmented training edges.
#[derive(Clone, Debug)]
pub struct Augmentation {
    pub candidates: CandidateSet,
    pub selection: Selection,
    pub edges: Vec<EdgeSample>,
}

/// Augments a training set from an already trained stage-one encoder. Only
/// the training graph is read. `held_out` lists pairs (canonical, `u < v`)
/// that must never be scored or modified; their signs are not needed.
pub fn augment_with_encoder(
    train_graph: &SignedGraph,
    train_edges: &[EdgeSample],
    encoder: &TrainOutcome,
    cfg: &AugmentConfig,
    held_out: &HashSet<(usize, usize)>,
    seed: u64,
) -> Result<Augmentation> {
    let candidates = generate_candidates(train_graph, &encoder.embeddings.z, &encoder.params.theta, cfg, held_out, seed)?;
    let selection = select_beneficial(train_graph, &candidates, cfg)?;
    let accepted: Vec<Candidate> = selection.accepted.iter().map(|d| d.candidate).collect();
    let edges = build_augmented_trainset(train_edges, &accepted);
    debug_assert_eq!(edges, selection.augmented.edges());
    Ok(Augmentation {
        candidates,
        selection,
        edges,
    })
}

/// Trains the stage-one encoder on the training graph, then augments.
pub fn augment_training_set(
    train_graph: &SignedGraph,
    train_edges: &[EdgeSample],
    encoder: &EncoderConfig,
    cfg: &AugmentConfig,
    held_out: &HashSet<(usize, usize)>,
    seed: u64,
) -> Result<(TrainOutcome, Augmentation)> {
    let stage_one = train_encoder(train_graph, train_edges, encoder, seed)?;
    let augmentation = augment_with_encoder(train_graph, train_edges, &stage_one, cfg, held_out, seed)?;
    Ok((stage_one, augmentation))
}

/// JSON-facing summary of an augmentation round.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AugmentReport {
    pub config: AugmentConfig,
    pub stats: CandidateStats,
    pub train_edges: usize,
    pub augmented_edges: usize,
    pub accepted_additions: usize,
    pub accepted_deletions: usize,
    pub accepted: Vec<Decision>,
    pub rejected: Vec<Decision>,
}

impl AugmentReport {
    pub fn new(cfg: &AugmentConfig, candidates: &CandidateSet, selection: &Selection, train_edges: usize) -> Self {
        let count = |kind| selection.accepted.iter().filter(|d| d.candidate.kind == kind).count();
        AugmentReport {
            config: cfg.clone(),
            stats: candidates.stats.clone(),
            train_edges,
            augmented_edges: selection.augmented.num_edges(),
            accepted_additions: count(CandidateKind::Add),
            accepted_deletions: count(CandidateKind::Delete),
            accepted: selection.accepted.clone(),
            rejected: selection.rejected.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Sign::{Negative as N, Positive as P};

    fn cand(kind: CandidateKind, u: usize, v: usize, sign: Sign, margin: f64) -> Candidate {
        Candidate {
            kind,
            u,
            v,
            sign,
            prob: 0.9,
            margin,
        }
    }

    fn probs(positive: f64, negative: f64) -> ClassProbs {
        ClassProbs {
            positive,
            negative,
            none: 1.0 - positive - negative,
        }
    }

    #[test]
    fn rules_follow_strict_thresholds() {
        let cfg = AugmentConfig {
            eps_add_pos: 0.6,
            eps_add_neg: 0.3,
            eps_del_pos: 0.4,
            eps_del_neg: 0.1,
            ..AugmentConfig::default()
        };
        assert!(addition_rule(0, 1, probs(0.6, 0.2), &cfg).is_none());
        let c = addition_rule(3, 1, probs(0.61, 0.2), &cfg).unwrap();
        assert_eq!((c.u, c.v, c.sign), (1, 3, P));
        // both fire: larger probability wins
        assert_eq!(addition_rule(0, 1, probs(0.35, 0.62), &AugmentConfig { eps_add_pos: 0.3, ..cfg.clone() }).unwrap().sign, N);
        // exact tie goes to positive
        let tie = AugmentConfig { eps_add_pos: 0.3, ..cfg.clone() };
        assert_eq!(addition_rule(0, 1, probs(0.45, 0.45), &tie).unwrap().sign, P);

        assert!(deletion_rule(&EdgeSample::new(0, 1, P), probs(0.39, 0.5), &cfg).is_some());
        assert!(deletion_rule(&EdgeSample::new(0, 1, P), probs(0.4, 0.5), &cfg).is_none());
        assert!(deletion_rule(&EdgeSample::new(0, 1, N), probs(0.9, 0.05), &cfg).is_some());
    }

    #[test]
    fn unreachable_thresholds_yield_nothing() {
        let cfg = AugmentConfig::reject_all();
        for p in [probs(1.0, 0.0), probs(0.0, 1.0), probs(0.5, 0.5)] {
            assert!(addition_rule(0, 1, p, &cfg).is_none());
            assert!(deletion_rule(&EdgeSample::new(0, 1, P), p, &cfg).is_none());
            assert!(deletion_rule(&EdgeSample::new(0, 1, N), p, &cfg).is_none());
        }
    }

    #[test]
    fn two_hop_pairs_exclude_edges() {
        let g = SignedGraph::load(&[(0, 1, P), (1, 2, N), (2, 3, P), (0, 2, P)]).unwrap();
        let mut pairs = two_hop_pairs(&g);
        pairs.sort();
        assert_eq!(pairs, vec![(0, 3), (1, 3)]);
    }

    #[test]
    fn balanced_closure_accepted_unbalanced_rejected() {
        // node 0 and node 2 share neighbour 1 through positive edges
        let g = SignedGraph::load(&[(0, 1, P), (1, 2, P), (2, 3, P), (3, 4, P), (2, 4, P)]).unwrap();
        let cands = CandidateSet {
            additions: vec![
                cand(CandidateKind::Add, 0, 2, P, 0.5),
                // closes 2-3-4 region with an unbalanced triangle at node 3
                cand(CandidateKind::Add, 1, 3, N, 0.4),
            ],
            ..CandidateSet::default()
        };
        let sel = select_beneficial(&g, &cands, &AugmentConfig::default()).unwrap();
        assert_eq!(sel.accepted.len(), 1);
        assert_eq!((sel.accepted[0].candidate.u, sel.accepted[0].candidate.v), (0, 2));
        assert_eq!(sel.rejected.len(), 1);
        assert!(sel.rejected[0].delta_u < 0.0 || sel.rejected[0].delta_v < 0.0);
        assert!(sel.augmented.has_edge(0, 2));
        assert!(!g.has_edge(0, 2), "input graph untouched");
    }

    #[test]
    fn screening_sees_earlier_acceptances() {
        // Each addition alone is harmless; together they close an unbalanced
        // triangle 0-1-2 with signs (+, +, -).
        let g = SignedGraph::load(&[(0, 1, P), (3, 4, P)]).unwrap();
        let cands = CandidateSet {
            additions: vec![cand(CandidateKind::Add, 1, 2, P, 0.9), cand(CandidateKind::Add, 0, 2, N, 0.8)],
            ..CandidateSet::default()
        };
        let sel = select_beneficial(&g, &cands, &AugmentConfig::default()).unwrap();
        assert_eq!(sel.accepted.len(), 1);
        assert_eq!(sel.rejected[0].candidate.sign, N);
    }

    #[test]
    fn unscreened_deletions_always_pass() {
        // deleting (0,1) removes the balanced triangle: node 0 keeps only an unbalanced one
        let g = SignedGraph::load(&[(0, 1, P), (1, 2, P), (0, 2, P), (0, 3, P), (2, 3, N)]).unwrap();
        let cands = CandidateSet {
            deletions: vec![cand(CandidateKind::Delete, 0, 1, P, 0.1)],
            ..CandidateSet::default()
        };
        let screened = select_beneficial(&g, &cands, &AugmentConfig::default()).unwrap();
        assert_eq!(screened.accepted.len(), 0);
        let loose = AugmentConfig {
            screen_deletions: false,
            ..AugmentConfig::default()
        };
        let unscreened = select_beneficial(&g, &cands, &loose).unwrap();
        assert_eq!(unscreened.accepted.len(), 1);
        assert!(!unscreened.accepted[0].screened);
        assert!(!unscreened.augmented.has_edge(0, 1));
    }

    #[test]
    fn empty_candidates_leave_graph_unchanged() {
        let g = SignedGraph::load(&[(0, 1, P), (1, 2, N)]).unwrap();
        let sel = select_beneficial(&g, &CandidateSet::default(), &AugmentConfig::default()).unwrap();
        assert!(sel.accepted.is_empty() && sel.rejected.is_empty());
        assert_eq!(sel.augmented.edges(), g.edges());
        assert_eq!(build_augmented_trainset(&g.edges(), &[]), g.edges());
    }

    #[test]
    fn trainset_applies_additions_and_deletions() {
        let train = vec![EdgeSample::new(0, 1, P), EdgeSample::new(1, 2, N), EdgeSample::new(2, 3, P)];
        let mut low = cand(CandidateKind::Add, 0, 3, P, 0.1);
        low.prob = 0.7;
        let mut high = cand(CandidateKind::Add, 3, 0, N, 0.1);
        high.prob = 0.8;
        let accepted = vec![cand(CandidateKind::Delete, 1, 2, N, 0.3), low, high];
        let out = build_augmented_trainset(&train, &accepted);
        assert_eq!(
            out,
            vec![EdgeSample::new(0, 1, P), EdgeSample::new(0, 3, N), EdgeSample::new(2, 3, P)]
        );
    }
}
