//! Raw dataset ingestion: directed, possibly repeated records with arbitrary
//! integer ids become an undirected signed graph on dense ids.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::parse_sign;
use crate::error::{Result, SgaError};
use crate::graph::{canonical_pair, EdgeSample, Sign, SignedGraph};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormat {
    /// `u,v,sign` as written by this crate.
    #[default]
    Canonical,
    /// `source,target,rating,time`; the sign is the sign of the rating.
    Bitcoin,
    /// Whitespace-separated `source target sign`, `#` comments.
    Snap,
}

impl FromStr for DatasetFormat {
    type Err = SgaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "canonical" | "csv" => Ok(DatasetFormat::Canonical),
            "bitcoin" => Ok(DatasetFormat::Bitcoin),
            "snap" => Ok(DatasetFormat::Snap),
            _ => Err(SgaError::InvalidArgument(format!(
                "unknown dataset format {s:?} (canonical, bitcoin, snap)"
            ))),
        }
    }
}

/// Counts over the raw records, before symmetrisation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordCounts {
    pub records: usize,
    pub positive: usize,
    pub negative: usize,
    pub self_loops: usize,
}

#[derive(Clone, Debug)]
pub struct IngestedDataset {
    pub graph: SignedGraph,
    /// `id_map[dense] = raw id`.
    pub id_map: Vec<u64>,
    pub records: RecordCounts,
    /// Pairs whose records disagree with no majority; dropped.
    pub ties_dropped: usize,
    /// Pairs resolved by majority despite conflicting records.
    pub conflicts_resolved: usize,
}

impl IngestedDataset {
    pub fn stats(&self) -> DatasetStats {
        let triangles = self.graph.enumerate_triangles();
        DatasetStats {
            nodes: self.graph.num_nodes(),
            records: self.records.records,
            records_positive: self.records.positive,
            records_negative: self.records.negative,
            self_loops: self.records.self_loops,
            edges: self.graph.num_edges(),
            edges_positive: self.graph.num_positive(),
            edges_negative: self.graph.num_negative(),
            ties_dropped: self.ties_dropped,
            conflicts_resolved: self.conflicts_resolved,
            triangles: triangles.len(),
            balanced_triangles: triangles.iter().filter(|t| t.balanced).count(),
        }
    }

    pub fn write_id_map(&self, path: &Path) -> Result<()> {
        let file = fs::File::create(path).map_err(|e| SgaError::io(path, e))?;
        let mut w = BufWriter::new(file);
        let mut emit = || -> std::io::Result<()> {
            writeln!(w, "dense,raw")?;
            for (dense, raw) in self.id_map.iter().enumerate() {
                writeln!(w, "{dense},{raw}")?;
            }
            w.flush()
        };
        emit().map_err(|e| SgaError::io(path, e))
    }
}

/// Summary printed by `stats`. Link counts come in two flavours: raw records
/// (directed, as distributed) and undirected edges after symmetrisation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub nodes: usize,
    pub records: usize,
    pub records_positive: usize,
    pub records_negative: usize,
    pub self_loops: usize,
    pub edges: usize,
    pub edges_positive: usize,
    pub edges_negative: usize,
    pub ties_dropped: usize,
    pub conflicts_resolved: usize,
    pub triangles: usize,
    pub balanced_triangles: usize,
}

struct Record {
    src: u64,
    dst: u64,
    sign: Sign,
}

fn parse_line(format: DatasetFormat, line: &str) -> std::result::Result<Option<Record>, String> {
    let line = line.trim();
    if line.is_empty() || line.starts_with('#') {
        return Ok(None);
    }
    let fields: Vec<&str> = match format {
        DatasetFormat::Snap => line.split_whitespace().collect(),
        _ => line.split(',').map(str::trim).collect(),
    };
    if format == DatasetFormat::Canonical && line.eq_ignore_ascii_case("u,v,sign") {
        return Ok(None);
    }
    let expected = match format {
        DatasetFormat::Bitcoin => 4,
        _ => 3,
    };
    if fields.len() != expected {
        return Err(format!("expected {expected} fields, found {}", fields.len()));
    }
    let id = |s: &str| s.parse::<u64>().map_err(|_| format!("bad node id {s:?}"));
    let sign = match format {
        DatasetFormat::Bitcoin => {
            let rating: f64 = fields[2].parse().map_err(|_| format!("bad rating {:?}", fields[2]))?;
            if rating > 0.0 {
                Sign::Positive
            } else if rating < 0.0 {
                Sign::Negative
            } else {
                return Err("zero rating has no sign".to_string());
            }
        }
        _ => parse_sign(fields[2]).ok_or_else(|| format!("bad sign {:?}", fields[2]))?,
    };
    Ok(Some(Record {
        src: id(fields[0])?,
        dst: id(fields[1])?,
        sign,
    }))
}

/// Reads a dataset file. Records are symmetrised per unordered pair by
/// majority sign; ties are dropped and logged. Canonical files keep their
/// ids; other formats are remapped to dense ids in ascending raw-id order.
pub fn ingest_dataset(path: &Path, format: DatasetFormat) -> Result<IngestedDataset> {
    let file = fs::File::open(path).map_err(|e| SgaError::io(path, e))?;
    let mut counts = RecordCounts::default();
    let mut records = Vec::new();
    let mut declared_nodes = None;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| SgaError::io(path, e))?;
        if format == DatasetFormat::Canonical {
            if let Some(rest) = line.trim().strip_prefix(super::NODES_PREFIX) {
                declared_nodes = rest.trim().parse::<u64>().ok();
                continue;
            }
        }
        let record = parse_line(format, &line).map_err(|msg| SgaError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg,
        })?;
        let Some(r) = record else { continue };
        counts.records += 1;
        match r.sign {
            Sign::Positive => counts.positive += 1,
            Sign::Negative => counts.negative += 1,
        }
        if r.src == r.dst {
            counts.self_loops += 1;
            continue;
        }
        records.push(r);
    }

    let id_map: Vec<u64> = if format == DatasetFormat::Canonical {
        let max = records.iter().map(|r| r.src.max(r.dst) + 1).max().unwrap_or(0);
        (0..declared_nodes.unwrap_or(0).max(max)).collect()
    } else {
        let mut ids: Vec<u64> = records.iter().flat_map(|r| [r.src, r.dst]).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    };
    let dense = |raw: u64| id_map.binary_search(&raw).expect("id collected");

    let mut tallies: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
    for r in &records {
        let t = tallies.entry(canonical_pair(dense(r.src), dense(r.dst))).or_default();
        match r.sign {
            Sign::Positive => t.0 += 1,
            Sign::Negative => t.1 += 1,
        }
    }
    let mut ties = 0;
    let mut resolved = 0;
    let mut edges = Vec::with_capacity(tallies.len());
    for (&(u, v), &(pos, neg)) in &tallies {
        if pos == neg {
            ties += 1;
            warn!("dropping pair ({}, {}): {pos} positive vs {neg} negative records", id_map[u], id_map[v]);
            continue;
        }
        if pos > 0 && neg > 0 {
            resolved += 1;
        }
        let sign = if pos > neg { Sign::Positive } else { Sign::Negative };
        edges.push(EdgeSample { u, v, sign });
    }
    let graph = SignedGraph::from_samples(id_map.len(), &edges)?;
    info!(
        "ingested {}: {} records -> {} nodes, {} edges ({} ties dropped)",
        path.display(),
        counts.records,
        graph.num_nodes(),
        graph.num_edges(),
        ties
    );
    Ok(IngestedDataset {
        graph,
        id_map,
        records: counts,
        ties_dropped: ties,
        conflicts_resolved: resolved,
    })
}
