//! Multi-seed experiment runner: ablation arms and random-perturbation
//! baselines over the train/test protocol.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use log::info;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{compute_metrics, predict_signs, AggregateMetrics, Metrics, Summary};
use super::split::{split, SplitSpec};
use crate::augment::{augment_with_encoder, AugmentConfig, CandidateKind};
use crate::curriculum::{build_schedule, train_with_curriculum, CurriculumConfig};
use crate::encoder::{train_encoder, EncoderConfig, TrainOutcome};
use crate::error::{Result, SgaError};
use crate::graph::{Change, EdgeSample, Sign, SignedGraph};
use crate::sampling::{rng_for, sample_non_edges, Stream};

/// Everything an experiment needs besides the graph.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub encoder: EncoderConfig,
    pub augment: AugmentConfig,
    pub curriculum: CurriculumConfig,
    pub split: SplitSpec,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut errors = self.encoder.validate();
        errors.extend(self.augment.validate());
        errors.extend(self.curriculum.validate());
        errors.extend(self.split.validate());
        errors
    }

    fn check(&self) -> Result<()> {
        let errors = self.validate();
        if errors.is_empty() {
            Ok(())
        } else {
            Err(SgaError::InvalidConfig(errors))
        }
    }
}

/// Ablation arm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Arm {
    /// Plain training on the original training graph.
    #[serde(rename = "base")]
    Base,
    /// Augmented training graph, plain training.
    #[serde(rename = "+SA")]
    StructureAugmentation,
    /// Original training graph, curriculum training.
    #[serde(rename = "+TP")]
    TrainingPlan,
    /// Augmented training graph with curriculum training.
    #[serde(rename = "+SGA")]
    Full,
}

impl Arm {
    pub const ALL: [Arm; 4] = [Arm::Base, Arm::StructureAugmentation, Arm::TrainingPlan, Arm::Full];

    pub fn augments(self) -> bool {
        matches!(self, Arm::StructureAugmentation | Arm::Full)
    }

    pub fn uses_curriculum(self) -> bool {
        matches!(self, Arm::TrainingPlan | Arm::Full)
    }

    pub fn label(self) -> &'static str {
        match self {
            Arm::Base => "base",
            Arm::StructureAugmentation => "+SA",
            Arm::TrainingPlan => "+TP",
            Arm::Full => "+SGA",
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Arm {
    type Err = SgaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().trim_start_matches('+') {
            "base" | "sgcn" => Ok(Arm::Base),
            "sa" => Ok(Arm::StructureAugmentation),
            "tp" => Ok(Arm::TrainingPlan),
            "sga" => Ok(Arm::Full),
            _ => Err(SgaError::InvalidArgument(format!("unknown arm {s:?} (base, +SA, +TP, +SGA)"))),
        }
    }
}

/// Random structural perturbation applied to the training edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbMode {
    AddPositive,
    RemovePositive,
    AddNegative,
    RemoveNegative,
    Flip,
}

impl PerturbMode {
    pub const ALL: [PerturbMode; 5] = [
        PerturbMode::AddPositive,
        PerturbMode::RemovePositive,
        PerturbMode::AddNegative,
        PerturbMode::RemoveNegative,
        PerturbMode::Flip,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PerturbMode::AddPositive => "rand-pos-add",
            PerturbMode::RemovePositive => "rand-pos-remove",
            PerturbMode::AddNegative => "rand-neg-add",
            PerturbMode::RemoveNegative => "rand-neg-remove",
            PerturbMode::Flip => "rand-flip",
        }
    }

    /// Parses a mode name; `rand-pos` and `rand-neg` expand to both
    /// directions.
    pub fn parse_group(s: &str) -> Result<Vec<PerturbMode>> {
        Ok(match s {
            "rand-pos" => vec![PerturbMode::AddPositive, PerturbMode::RemovePositive],
            "rand-neg" => vec![PerturbMode::AddNegative, PerturbMode::RemoveNegative],
            "all" => PerturbMode::ALL.to_vec(),
            other => vec![PerturbMode::ALL
                .into_iter()
                .find(|m| m.label() == other)
                .ok_or_else(|| SgaError::InvalidArgument(format!("unknown perturbation mode {other:?}")))?],
        })
    }
}

impl fmt::Display for PerturbMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub const DEFAULT_PERTURB_RATIOS: [f64; 4] = [0.05, 0.10, 0.15, 0.20];

/// Applies a random perturbation to `train`. For additions and removals the
/// count is `ratio` times the number of training edges of that sign; flips
/// touch `ratio` of all training edges.
pub fn perturb(num_nodes: usize, train: &[EdgeSample], mode: PerturbMode, ratio: f64, seed: u64) -> Result<Vec<EdgeSample>> {
    if !(0.0..=0.5).contains(&ratio) {
        return Err(SgaError::InvalidArgument(format!("perturbation ratio must lie in [0, 0.5], got {ratio}")));
    }
    let mut rng = rng_for(seed, Stream::Perturbation);
    let graph = SignedGraph::from_samples(num_nodes, train)?;
    let of_sign = |s: Sign| train.iter().filter(|e| e.sign == s).count();
    let mut out = graph.clone();
    match mode {
        PerturbMode::AddPositive | PerturbMode::AddNegative => {
            let sign = if mode == PerturbMode::AddPositive { Sign::Positive } else { Sign::Negative };
            let k = (ratio * of_sign(sign) as f64).round() as usize;
            for (u, v) in sample_non_edges(&graph, k, &HashSet::new(), &mut rng) {
                out.apply_change(&Change::Add { u, v, sign })?;
            }
        }
        PerturbMode::RemovePositive | PerturbMode::RemoveNegative => {
            let sign = if mode == PerturbMode::RemovePositive { Sign::Positive } else { Sign::Negative };
            let mut pool: Vec<EdgeSample> = train.iter().filter(|e| e.sign == sign).copied().collect();
            let k = (ratio * pool.len() as f64).round() as usize;
            pool.shuffle(&mut rng);
            for e in &pool[..k] {
                out.apply_change(&Change::Delete { u: e.u, v: e.v })?;
            }
        }
        PerturbMode::Flip => {
            let mut pool = train.to_vec();
            let k = (ratio * pool.len() as f64).round() as usize;
            pool.shuffle(&mut rng);
            for e in &pool[..k] {
                out.apply_change(&Change::Flip { u: e.u, v: e.v })?;
            }
        }
    }
    Ok(out.edges())
}

/// Statistics of the augmentation step of one run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AugmentSummary {
    pub candidates_added: usize,
    pub candidates_deleted: usize,
    pub accepted_additions: usize,
    pub accepted_deletions: usize,
    pub rejected: usize,
    pub two_hop_pairs: usize,
    pub distant_pairs: usize,
}

/// One trained-and-evaluated model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub label: String,
    pub run: usize,
    pub seed: u64,
    pub train_edges: usize,
    pub test_edges: usize,
    pub final_loss: f64,
    pub metrics: Metrics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub augment: Option<AugmentSummary>,
}

/// The split of one run plus its training graph.
pub struct RunSplit {
    pub run: usize,
    pub seed: u64,
    pub train: Vec<EdgeSample>,
    pub test: Vec<EdgeSample>,
    pub train_graph: SignedGraph,
}

impl RunSplit {
    /// Test pairs, which augmentation must leave alone.
    pub fn held_out(&self) -> HashSet<(usize, usize)> {
        self.test.iter().map(EdgeSample::pair).collect()
    }
}

pub fn run_splits(graph: &SignedGraph, spec: &SplitSpec) -> Result<Vec<RunSplit>> {
    let edges = graph.edges();
    spec.seeds
        .iter()
        .take(spec.num_runs)
        .enumerate()
        .map(|(run, &seed)| {
            let (train, test) = split(&edges, spec.train_fraction, seed)?;
            let train_graph = SignedGraph::from_samples(graph.num_nodes(), &train)?;
            Ok(RunSplit {
                run,
                seed,
                train,
                test,
                train_graph,
            })
        })
        .collect()
}

fn evaluate(outcome: &TrainOutcome, test: &[EdgeSample]) -> Result<Metrics> {
    let predictions = predict_signs(&outcome.embeddings.z, &outcome.params.theta, test)?;
    let truths: Vec<Sign> = test.iter().map(|e| e.sign).collect();
    compute_metrics(&predictions, &truths)
}

fn record(label: &str, split: &RunSplit, train_edges: usize, outcome: &TrainOutcome, augment: Option<AugmentSummary>) -> Result<RunRecord> {
    Ok(RunRecord {
        label: label.to_string(),
        run: split.run,
        seed: split.seed,
        train_edges,
        test_edges: split.test.len(),
        final_loss: outcome.history.last().map(|r| r.loss).unwrap_or(f64::NAN),
        metrics: evaluate(outcome, &split.test)?,
        augment,
    })
}

/// Trains the final model for `arm` on `edges`, with the curriculum when the
/// arm uses one.
pub fn train_final(
    graph: &SignedGraph,
    edges: &[EdgeSample],
    arm: Arm,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<TrainOutcome> {
    if arm.uses_curriculum() {
        let schedule = build_schedule(graph, edges, &cfg.curriculum, cfg.encoder.epochs)?;
        train_with_curriculum(graph, edges, &schedule, &cfg.encoder, seed)
    } else {
        train_encoder(graph, edges, &cfg.encoder, seed)
    }
}

/// Runs the requested arms on one split. The base model doubles as the
/// stage-one encoder for the augmenting arms, so all arms share it.
pub fn run_arms_on_split(split: &RunSplit, arms: &[Arm], cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    let need_base = arms.iter().any(|a| *a == Arm::Base || a.augments());
    let base = if need_base {
        Some(train_encoder(&split.train_graph, &split.train, &cfg.encoder, split.seed)?)
    } else {
        None
    };
    let augmentation = if arms.iter().any(|a| a.augments()) {
        let stage_one = base.as_ref().expect("base trained");
        Some(augment_with_encoder(
            &split.train_graph,
            &split.train,
            stage_one,
            &cfg.augment,
            &split.held_out(),
            split.seed,
        )?)
    } else {
        None
    };

    let mut out = Vec::with_capacity(arms.len());
    for &arm in arms {
        let rec = match arm {
            Arm::Base => record(arm.label(), split, split.train.len(), base.as_ref().expect("base trained"), None)?,
            Arm::TrainingPlan => {
                let outcome = train_final(&split.train_graph, &split.train, arm, cfg, split.seed)?;
                record(arm.label(), split, split.train.len(), &outcome, None)?
            }
            Arm::StructureAugmentation | Arm::Full => {
                let aug = augmentation.as_ref().expect("augmented");
                let graph = &aug.selection.augmented;
                let outcome = train_final(graph, &aug.edges, arm, cfg, split.seed)?;
                let count = |kind| aug.selection.accepted.iter().filter(|d| d.candidate.kind == kind).count();
                let summary = AugmentSummary {
                    candidates_added: aug.candidates.additions.len(),
                    candidates_deleted: aug.candidates.deletions.len(),
                    accepted_additions: count(CandidateKind::Add),
                    accepted_deletions: count(CandidateKind::Delete),
                    rejected: aug.selection.rejected.len(),
                    two_hop_pairs: aug.candidates.stats.two_hop_pairs,
                    distant_pairs: aug.candidates.stats.distant_pairs,
                };
                record(arm.label(), split, aug.edges.len(), &outcome, Some(summary))?
            }
        };
        info!(
            "run {} seed {} {}: auc {:?} f1 {:.4}",
            split.run, split.seed, rec.label, rec.metrics.auc, rec.metrics.f1_binary
        );
        out.push(rec);
    }
    Ok(out)
}

/// Per-run records plus aggregates, and paired differences against a
/// reference label when one is given.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub records: Vec<RunRecord>,
    pub aggregate: BTreeMap<String, AggregateMetrics>,
    /// Mean/std of per-run `label - reference` differences (paired seeds).
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub paired_vs_reference: BTreeMap<String, AggregateMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
}

impl ExperimentReport {
    pub fn new(records: Vec<RunRecord>, reference: Option<&str>) -> Self {
        let mut labels: Vec<String> = Vec::new();
        for r in &records {
            if !labels.contains(&r.label) {
                labels.push(r.label.clone());
            }
        }
        let aggregate = labels
            .iter()
            .map(|l| {
                (
                    l.clone(),
                    AggregateMetrics::of(records.iter().filter(|r| &r.label == l).map(|r| &r.metrics)),
                )
            })
            .collect();
        let mut paired = BTreeMap::new();
        if let Some(reference) = reference {
            let base: BTreeMap<usize, &Metrics> = records
                .iter()
                .filter(|r| r.label == reference)
                .map(|r| (r.run, &r.metrics))
                .collect();
            for l in labels.iter().filter(|l| l.as_str() != reference) {
                let diffs: Vec<Metrics> = records
                    .iter()
                    .filter(|r| &r.label == l)
                    .filter_map(|r| {
                        let b = base.get(&r.run)?;
                        Some(Metrics {
                            auc: r.metrics.auc.zip(b.auc).map(|(x, y)| x - y),
                            f1_binary: r.metrics.f1_binary - b.f1_binary,
                            f1_micro: r.metrics.f1_micro - b.f1_micro,
                            f1_macro: r.metrics.f1_macro - b.f1_macro,
                        })
                    })
                    .collect();
                paired.insert(l.clone(), AggregateMetrics::of(diffs.iter()));
            }
        }
        ExperimentReport {
            records,
            aggregate,
            paired_vs_reference: paired,
            reference: reference.map(str::to_string),
        }
    }

    pub fn summary(&self, label: &str) -> Option<&AggregateMetrics> {
        self.aggregate.get(label)
    }

    /// Flat CSV: one row per run.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,run,seed,train_edges,test_edges,auc,f1_binary,f1_micro,f1_macro\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.label,
                r.run,
                r.seed,
                r.train_edges,
                r.test_edges,
                r.metrics.auc.map(|a| a.to_string()).unwrap_or_default(),
                r.metrics.f1_binary,
                r.metrics.f1_micro,
                r.metrics.f1_macro
            ));
        }
        out
    }
}

/// Runs every arm over every seed of the split spec. Runs execute in
/// parallel; each run is deterministic in its seed.
pub fn run_ablation(graph: &SignedGraph, arms: &[Arm], cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.check()?;
    let splits = run_splits(graph, &cfg.split)?;
    let per_run: Vec<Vec<RunRecord>> = splits
        .par_iter()
        .map(|s| run_arms_on_split(s, arms, cfg))
        .collect::<Result<_>>()?;
    let mut records: Vec<RunRecord> = per_run.into_iter().flatten().collect();
    let order = |label: &str| arms.iter().position(|a| a.label() == label).unwrap_or(usize::MAX);
    records.sort_by(|a, b| order(&a.label).cmp(&order(&b.label)).then(a.run.cmp(&b.run)));
    let reference = arms.contains(&Arm::Base).then_some(Arm::Base.label());
    Ok(ExperimentReport::new(records, reference))
}

/// Plain training on randomly perturbed training edges, for every mode and
/// ratio, alongside the unperturbed base (label `base`).
pub fn run_random_baseline(
    graph: &SignedGraph,
    modes: &[PerturbMode],
    ratios: &[f64],
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport> {
    cfg.check()?;
    for &r in ratios {
        if !(0.0..=0.5).contains(&r) {
            return Err(SgaError::InvalidArgument(format!("perturbation ratio must lie in [0, 0.5], got {r}")));
        }
    }
    let splits = run_splits(graph, &cfg.split)?;
    let mut jobs: Vec<(usize, Option<(PerturbMode, f64)>)> = Vec::new();
    for (i, _) in splits.iter().enumerate() {
        jobs.push((i, None));
        for &m in modes {
            for &r in ratios {
                jobs.push((i, Some((m, r))));
            }
        }
    }
    let mut records: Vec<RunRecord> = jobs
        .par_iter()
        .map(|&(i, job)| {
            let s = &splits[i];
            match job {
                None => {
                    let outcome = train_encoder(&s.train_graph, &s.train, &cfg.encoder, s.seed)?;
                    record("base", s, s.train.len(), &outcome, None)
                }
                Some((mode, ratio)) => {
                    let edges = perturb(graph.num_nodes(), &s.train, mode, ratio, s.seed)?;
                    let g = SignedGraph::from_samples(graph.num_nodes(), &edges)?;
                    let outcome = train_encoder(&g, &edges, &cfg.encoder, s.seed)?;
                    record(&format!("{}@{ratio}", mode.label()), s, edges.len(), &outcome, None)
                }
            }
        })
        .collect::<Result<_>>()?;
    records.sort_by(|a, b| a.label.cmp(&b.label).then(a.run.cmp(&b.run)));
    Ok(ExperimentReport::new(records, Some("base")))
}

/// Convenience accessor for the mean AUC of a label.
pub fn mean_auc(report: &ExperimentReport, label: &str) -> Option<f64> {
    report.summary(label).map(|s| s.auc.mean)
}

/// Paired mean difference of a metric summary.
pub fn paired(report: &ExperimentReport, label: &str) -> Option<Summary> {
    report.paired_vs_reference.get(label).map(|s| s.auc)
}
