//! Undirected signed graph with sorted adjacency and incrementally maintained
//! per-node triangle balance counts.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SgaError};

/// Sign of an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
}

impl Sign {
    pub fn from_value(value: i64) -> Option<Sign> {
        match value {
            1 => Some(Sign::Positive),
            -1 => Some(Sign::Negative),
            _ => None,
        }
    }

    pub fn value(self) -> i8 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => -1,
        }
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }

    /// Sign of a product of two signed entries.
    pub fn times(self, other: Sign) -> Sign {
        if self == other {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    pub fn is_positive(self) -> bool {
        self == Sign::Positive
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// A signed, undirected edge record with `u < v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeSample {
    pub u: usize,
    pub v: usize,
    pub sign: Sign,
}

impl EdgeSample {
    /// Builds a canonical record (endpoints swapped so that `u < v`).
    pub fn new(a: usize, b: usize, sign: Sign) -> Self {
        let (u, v) = if a <= b { (a, b) } else { (b, a) };
        EdgeSample { u, v, sign }
    }

    pub fn pair(&self) -> (usize, usize) {
        (self.u, self.v)
    }
}

/// Canonical unordered node pair.
pub fn canonical_pair(a: usize, b: usize) -> (usize, usize) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A triangle `i < j < k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triangle {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub balanced: bool,
}

/// A structural modification of a single node pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Change {
    Add { u: usize, v: usize, sign: Sign },
    Delete { u: usize, v: usize },
    Flip { u: usize, v: usize },
}

impl Change {
    pub fn endpoints(&self) -> (usize, usize) {
        match *self {
            Change::Add { u, v, .. } | Change::Delete { u, v } | Change::Flip { u, v } => (u, v),
        }
    }
}

/// Local balance degree from raw triangle counts.
///
/// `empty_degree` is returned for a node contained in no triangle, where the
/// ratio is undefined.
pub fn balance_degree(balanced: u64, unbalanced: u64, empty_degree: f64) -> f64 {
    let total = balanced + unbalanced;
    if total == 0 {
        empty_degree
    } else {
        (balanced as f64 - unbalanced as f64) / total as f64
    }
}

/// Per-node counts of balanced and unbalanced triangles.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleStats {
    balanced: Vec<u64>,
    unbalanced: Vec<u64>,
    empty_degree: f64,
}

/// Third node, balance before, balance after.
type Transition = (usize, Option<bool>, Option<bool>);

pub const DEFAULT_EMPTY_DEGREE: f64 = 1.0;

impl TriangleStats {
    fn zeros(num_nodes: usize, empty_degree: f64) -> Self {
        TriangleStats {
            balanced: vec![0; num_nodes],
            unbalanced: vec![0; num_nodes],
            empty_degree,
        }
    }

    /// Counts computed from a full triangle listing.
    pub fn from_triangles(num_nodes: usize, triangles: &[Triangle]) -> Self {
        let mut stats = TriangleStats::zeros(num_nodes, DEFAULT_EMPTY_DEGREE);
        for t in triangles {
            let counts = if t.balanced {
                &mut stats.balanced
            } else {
                &mut stats.unbalanced
            };
            counts[t.i] += 1;
            counts[t.j] += 1;
            counts[t.k] += 1;
        }
        stats
    }

    pub fn num_nodes(&self) -> usize {
        self.balanced.len()
    }

    pub fn balanced(&self, v: usize) -> u64 {
        self.balanced[v]
    }

    pub fn unbalanced(&self, v: usize) -> u64 {
        self.unbalanced[v]
    }

    pub fn triangles(&self, v: usize) -> u64 {
        self.balanced[v] + self.unbalanced[v]
    }

    pub fn empty_degree(&self) -> f64 {
        self.empty_degree
    }

    /// Value reported for nodes outside every triangle. Must lie in `[-1, 1]`.
    pub fn set_empty_degree(&mut self, value: f64) {
        assert!((-1.0..=1.0).contains(&value), "empty degree must be in [-1, 1]");
        self.empty_degree = value;
    }

    /// Local balance degree `(|O+| - |O-|) / (|O+| + |O-|)` of node `v`.
    pub fn local_balance_degree(&self, v: usize) -> Result<f64> {
        if v >= self.num_nodes() {
            return Err(SgaError::UnknownNode {
                node: v,
                num_nodes: self.num_nodes(),
            });
        }
        Ok(balance_degree(
            self.balanced[v],
            self.unbalanced[v],
            self.empty_degree,
        ))
    }

    /// Counts match (the empty-triangle convention is ignored).
    pub fn same_counts(&self, other: &TriangleStats) -> bool {
        self.balanced == other.balanced && self.unbalanced == other.unbalanced
    }
}

/// Undirected signed graph.
///
/// Adjacency lists are kept sorted by neighbour id, and triangle balance
/// counts are kept consistent with the edge set across every mutation.
#[derive(Clone, Debug)]
pub struct SignedGraph {
    adjacency: Vec<Vec<(usize, Sign)>>,
    num_positive: usize,
    num_negative: usize,
    stats: TriangleStats,
}

impl SignedGraph {
    /// Empty graph on `num_nodes` nodes.
    pub fn new(num_nodes: usize) -> Self {
        SignedGraph {
            adjacency: vec![Vec::new(); num_nodes],
            num_positive: 0,
            num_negative: 0,
            stats: TriangleStats::zeros(num_nodes, DEFAULT_EMPTY_DEGREE),
        }
    }

    /// Loads raw `(u, v, sign)` records, sizing the node set from the largest id.
    ///
    /// Records are canonicalised to `u < v`; repeated records with the same
    /// sign collapse to one edge.
    pub fn load(records: &[(usize, usize, Sign)]) -> Result<Self> {
        let num_nodes = records
            .iter()
            .map(|&(u, v, _)| u.max(v) + 1)
            .max()
            .unwrap_or(0);
        Self::from_records(num_nodes, records)
    }

    /// Like [`SignedGraph::load`] with an explicit node count.
    pub fn from_records(num_nodes: usize, records: &[(usize, usize, Sign)]) -> Result<Self> {
        let mut edges: BTreeMap<(usize, usize), Sign> = BTreeMap::new();
        for &(a, b, sign) in records {
            if a == b {
                return Err(SgaError::SelfLoop(a));
            }
            for node in [a, b] {
                if node >= num_nodes {
                    return Err(SgaError::UnknownNode { node, num_nodes });
                }
            }
            let pair = canonical_pair(a, b);
            match edges.get(&pair) {
                Some(&existing) if existing != sign => {
                    return Err(SgaError::ConflictingSigns(pair.0, pair.1))
                }
                Some(_) => {}
                None => {
                    edges.insert(pair, sign);
                }
            }
        }
        let samples: Vec<EdgeSample> = edges
            .into_iter()
            .map(|((u, v), sign)| EdgeSample { u, v, sign })
            .collect();
        Self::from_samples(num_nodes, &samples)
    }

    /// Builds a graph from canonical edge samples. Duplicate pairs are rejected
    /// unless they carry the same sign.
    pub fn from_samples(num_nodes: usize, samples: &[EdgeSample]) -> Result<Self> {
        let mut adjacency: Vec<Vec<(usize, Sign)>> = vec![Vec::new(); num_nodes];
        for e in samples {
            if e.u == e.v {
                return Err(SgaError::SelfLoop(e.u));
            }
            for node in [e.u, e.v] {
                if node >= num_nodes {
                    return Err(SgaError::UnknownNode { node, num_nodes });
                }
            }
            adjacency[e.u].push((e.v, e.sign));
            adjacency[e.v].push((e.u, e.sign));
        }
        for (node, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            let mut deduped: Vec<(usize, Sign)> = Vec::with_capacity(list.len());
            for &(w, s) in list.iter() {
                match deduped.last() {
                    Some(&(prev, ps)) if prev == w => {
                        if ps != s {
                            let (a, b) = canonical_pair(node, w);
                            return Err(SgaError::ConflictingSigns(a, b));
                        }
                    }
                    _ => deduped.push((w, s)),
                }
            }
            *list = deduped;
        }

        let mut num_positive = 0;
        let mut num_negative = 0;
        for (u, list) in adjacency.iter().enumerate() {
            for &(v, s) in list {
                if u < v {
                    match s {
                        Sign::Positive => num_positive += 1,
                        Sign::Negative => num_negative += 1,
                    }
                }
            }
        }

        let mut graph = SignedGraph {
            adjacency,
            num_positive,
            num_negative,
            stats: TriangleStats::zeros(num_nodes, DEFAULT_EMPTY_DEGREE),
        };
        graph.recompute_stats();
        Ok(graph)
    }

    pub fn num_nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_edges(&self) -> usize {
        self.num_positive + self.num_negative
    }

    pub fn num_positive(&self) -> usize {
        self.num_positive
    }

    pub fn num_negative(&self) -> usize {
        self.num_negative
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Sorted `(neighbour, sign)` list of `v`.
    pub fn neighbors(&self, v: usize) -> &[(usize, Sign)] {
        &self.adjacency[v]
    }

    pub fn positive_neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[v]
            .iter()
            .filter(|(_, s)| s.is_positive())
            .map(|&(w, _)| w)
    }

    pub fn negative_neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[v]
            .iter()
            .filter(|(_, s)| !s.is_positive())
            .map(|&(w, _)| w)
    }

    pub fn sign(&self, u: usize, v: usize) -> Option<Sign> {
        let list = self.adjacency.get(u)?;
        list.binary_search_by(|&(w, _)| w.cmp(&v))
            .ok()
            .map(|idx| list[idx].1)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.sign(u, v).is_some()
    }

    /// All edges as canonical samples, ordered by `(u, v)`.
    pub fn edges(&self) -> Vec<EdgeSample> {
        let mut out = Vec::with_capacity(self.num_edges());
        for (u, list) in self.adjacency.iter().enumerate() {
            for &(v, sign) in list {
                if u < v {
                    out.push(EdgeSample { u, v, sign });
                }
            }
        }
        out
    }

    /// Common neighbours of `u` and `v` with the signs of the two connecting
    /// edges, by merge join over the sorted lists.
    pub fn common_neighbors(&self, u: usize, v: usize) -> Vec<(usize, Sign, Sign)> {
        let (a, b) = (&self.adjacency[u], &self.adjacency[v]);
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1, b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out
    }

    /// Lists every triangle once as `i < j < k`.
    pub fn enumerate_triangles(&self) -> Vec<Triangle> {
        let mut out = Vec::new();
        for (i, list_i) in self.adjacency.iter().enumerate() {
            for &(j, s_ij) in list_i.iter().filter(|&&(j, _)| j > i) {
                let list_j = &self.adjacency[j];
                // only third vertices above j
                let mut a = list_i.partition_point(|&(w, _)| w <= j);
                let mut b = list_j.partition_point(|&(w, _)| w <= j);
                while a < list_i.len() && b < list_j.len() {
                    match list_i[a].0.cmp(&list_j[b].0) {
                        Ordering::Less => a += 1,
                        Ordering::Greater => b += 1,
                        Ordering::Equal => {
                            let product = s_ij.times(list_i[a].1).times(list_j[b].1);
                            out.push(Triangle {
                                i,
                                j,
                                k: list_i[a].0,
                                balanced: product.is_positive(),
                            });
                            a += 1;
                            b += 1;
                        }
                    }
                }
            }
        }
        out
    }

    pub fn stats(&self) -> &TriangleStats {
        &self.stats
    }

    /// Sets the balance degree reported for nodes in no triangle.
    pub fn set_empty_degree(&mut self, value: f64) {
        self.stats.set_empty_degree(value);
    }

    pub fn local_balance_degree(&self, v: usize) -> Result<f64> {
        self.stats.local_balance_degree(v)
    }

    fn recompute_stats(&mut self) {
        let empty = self.stats.empty_degree;
        self.stats = TriangleStats::from_triangles(self.num_nodes(), &self.enumerate_triangles());
        self.stats.empty_degree = empty;
    }

    fn check_node(&self, node: usize) -> Result<()> {
        if node >= self.num_nodes() {
            Err(SgaError::UnknownNode {
                node,
                num_nodes: self.num_nodes(),
            })
        } else {
            Ok(())
        }
    }

    /// Validates the precondition of `change` and returns, for every triangle
    /// through the changed pair, the third node with the triangle's balance
    /// before and after the change (`None` when the triangle does not exist).
    fn triangle_transitions(&self, change: &Change) -> Result<Vec<Transition>> {
        let (u, v) = change.endpoints();
        self.check_node(u)?;
        self.check_node(v)?;
        if u == v {
            return Err(SgaError::SelfLoop(u));
        }
        let current = self.sign(u, v);
        let (before, after) = match *change {
            Change::Add { sign, .. } => match current {
                Some(_) => {
                    let (a, b) = canonical_pair(u, v);
                    return Err(SgaError::EdgeExists(a, b));
                }
                None => (None, Some(sign)),
            },
            Change::Delete { .. } | Change::Flip { .. } => match current {
                None => {
                    let (a, b) = canonical_pair(u, v);
                    return Err(SgaError::EdgeMissing(a, b));
                }
                Some(s) if matches!(change, Change::Delete { .. }) => (Some(s), None),
                Some(s) => (Some(s), Some(s.flipped())),
            },
        };
        Ok(self
            .common_neighbors(u, v)
            .into_iter()
            .map(|(w, s_uw, s_vw)| {
                let wedge = s_uw.times(s_vw);
                (
                    w,
                    before.map(|s| s.times(wedge).is_positive()),
                    after.map(|s| s.times(wedge).is_positive()),
                )
            })
            .collect())
    }

    /// Change in local balance degree of both endpoints if `change` were
    /// applied. The graph is not modified.
    pub fn balance_delta(&self, change: &Change) -> Result<(f64, f64)> {
        let transitions = self.triangle_transitions(change)?;
        let (mut gained_bal, mut gained_unbal, mut lost_bal, mut lost_unbal) = (0u64, 0u64, 0u64, 0u64);
        for &(_, before, after) in &transitions {
            match before {
                Some(true) => lost_bal += 1,
                Some(false) => lost_unbal += 1,
                None => {}
            }
            match after {
                Some(true) => gained_bal += 1,
                Some(false) => gained_unbal += 1,
                None => {}
            }
        }
        let (u, v) = change.endpoints();
        let empty = self.stats.empty_degree;
        let delta = |node: usize| {
            let b = self.stats.balanced[node];
            let ub = self.stats.unbalanced[node];
            let after = balance_degree(b + gained_bal - lost_bal, ub + gained_unbal - lost_unbal, empty);
            after - balance_degree(b, ub, empty)
        };
        Ok((delta(u), delta(v)))
    }

    /// Applies `change` in place, updating triangle counts only at the two
    /// endpoints and their common neighbours.
    pub fn apply_change(&mut self, change: &Change) -> Result<()> {
        let transitions = self.triangle_transitions(change)?;
        let (u, v) = change.endpoints();
        for &(w, before, after) in &transitions {
            for node in [u, v, w] {
                match before {
                    Some(true) => self.stats.balanced[node] -= 1,
                    Some(false) => self.stats.unbalanced[node] -= 1,
                    None => {}
                }
                match after {
                    Some(true) => self.stats.balanced[node] += 1,
                    Some(false) => self.stats.unbalanced[node] += 1,
                    None => {}
                }
            }
        }
        match *change {
            Change::Add { sign, .. } => {
                self.insert_half(u, v, sign);
                self.insert_half(v, u, sign);
                match sign {
                    Sign::Positive => self.num_positive += 1,
                    Sign::Negative => self.num_negative += 1,
                }
            }
            Change::Delete { .. } => {
                let sign = self.remove_half(u, v);
                self.remove_half(v, u);
                match sign {
                    Sign::Positive => self.num_positive -= 1,
                    Sign::Negative => self.num_negative -= 1,
                }
            }
            Change::Flip { .. } => {
                let old = self.set_half(u, v);
                self.set_half(v, u);
                match old {
                    Sign::Positive => {
                        self.num_positive -= 1;
                        self.num_negative += 1;
                    }
                    Sign::Negative => {
                        self.num_negative -= 1;
                        self.num_positive += 1;
                    }
                }
            }
        }
        Ok(())
    }

    /// Copy of the graph with `change` applied.
    pub fn with_change(&self, change: &Change) -> Result<SignedGraph> {
        let mut next = self.clone();
        next.apply_change(change)?;
        Ok(next)
    }

    fn insert_half(&mut self, from: usize, to: usize, sign: Sign) {
        let list = &mut self.adjacency[from];
        let idx = list.partition_point(|&(w, _)| w < to);
        list.insert(idx, (to, sign));
    }

    fn remove_half(&mut self, from: usize, to: usize) -> Sign {
        let list = &mut self.adjacency[from];
        let idx = list
            .binary_search_by(|&(w, _)| w.cmp(&to))
            .expect("edge checked present");
        list.remove(idx).1
    }

    fn set_half(&mut self, from: usize, to: usize) -> Sign {
        let list = &mut self.adjacency[from];
        let idx = list
            .binary_search_by(|&(w, _)| w.cmp(&to))
            .expect("edge checked present");
        let old = list[idx].1;
        list[idx].1 = old.flipped();
        old
    }
}
