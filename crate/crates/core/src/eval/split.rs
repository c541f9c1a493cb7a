use log::warn;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SgaError};
use crate::graph::{EdgeSample, Sign};
use crate::sampling::{rng_for, Stream};

/// Train/test protocol: fraction, number of runs and per-run seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub num_runs: usize,
    pub seeds: Vec<u64>,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.8,
            num_runs: 5,
            seeds: (0..5).collect(),
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Vec<String> {
        let mut errors = Vec::new();
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            errors.push(format!("split.train_fraction must lie in (0, 1), got {}", self.train_fraction));
        }
        if self.num_runs == 0 {
            errors.push("split.num_runs must be positive".to_string());
        }
        if self.seeds.len() != self.num_runs {
            errors.push(format!(
                "split.seeds has {} entries but split.num_runs is {}",
                self.seeds.len(),
                self.num_runs
            ));
        }
        errors
    }
}

fn take_train(group: &[EdgeSample], fraction: f64) -> usize {
    (fraction * group.len() as f64).round() as usize
}

/// Random train/test partition of `edges`, stratified by sign and
/// deterministic in `seed`. Both outputs are sorted by pair.
pub fn split(edges: &[EdgeSample], train_fraction: f64, seed: u64) -> Result<(Vec<EdgeSample>, Vec<EdgeSample>)> {
    if edges.len() < 5 {
        return Err(SgaError::InvalidArgument(format!(
            "need at least 5 edges to split, got {}",
            edges.len()
        )));
    }
    let mut rng = rng_for(seed, Stream::Split);
    let mut positive: Vec<EdgeSample> = edges.iter().filter(|e| e.sign == Sign::Positive).copied().collect();
    let mut negative: Vec<EdgeSample> = edges.iter().filter(|e| e.sign == Sign::Negative).copied().collect();
    positive.sort();
    negative.sort();

    let stratifiable = [&positive, &negative].iter().all(|g| {
        let k = (train_fraction * g.len() as f64).round() as usize;
        g.is_empty() || (k > 0 && k < g.len())
    });

    let (mut train, mut test) = (Vec::new(), Vec::new());
    if stratifiable {
        for group in [&mut positive, &mut negative] {
            group.shuffle(&mut rng);
            let k = take_train(group, train_fraction);
            train.extend_from_slice(&group[..k]);
            test.extend_from_slice(&group[k..]);
        }
    } else {
        warn!(
            "too few edges of one sign to stratify ({} positive, {} negative); splitting unstratified",
            positive.len(),
            negative.len()
        );
        let mut all: Vec<EdgeSample> = positive.into_iter().chain(negative).collect();
        all.shuffle(&mut rng);
        let k = take_train(&all, train_fraction);
        train.extend_from_slice(&all[..k]);
        test.extend_from_slice(&all[k..]);
    }
    train.sort();
    test.sort();
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn edges(n_pos: usize, n_neg: usize) -> Vec<EdgeSample> {
        (0..n_pos)
            .map(|i| EdgeSample::new(i, i + 1000, Sign::Positive))
            .chain((0..n_neg).map(|i| EdgeSample::new(i, i + 2000, Sign::Negative)))
            .collect()
    }

    #[test]
    fn partition_is_exhaustive_disjoint_and_stratified() {
        let all = edges(90, 10);
        let (train, test) = split(&all, 0.8, 3).unwrap();
        assert_eq!(train.len(), 80);
        assert_eq!(test.len(), 20);
        let a: HashSet<_> = train.iter().collect();
        let b: HashSet<_> = test.iter().collect();
        assert!(a.is_disjoint(&b));
        assert_eq!(a.len() + b.len(), 100);
        assert_eq!(test.iter().filter(|e| e.sign == Sign::Negative).count(), 2);
    }

    #[test]
    fn same_seed_same_split() {
        let all = edges(40, 12);
        assert_eq!(split(&all, 0.8, 7).unwrap(), split(&all, 0.8, 7).unwrap());
        assert_ne!(split(&all, 0.8, 7).unwrap(), split(&all, 0.8, 8).unwrap());
    }

    #[test]
    fn falls_back_when_a_sign_is_rare() {
        let all = edges(20, 1);
        let (train, test) = split(&all, 0.8, 1).unwrap();
        assert_eq!(train.len() + test.len(), 21);
    }

    #[test]
    fn rejects_tiny_inputs() {
        assert!(split(&edges(3, 1), 0.8, 0).is_err());
    }
}
