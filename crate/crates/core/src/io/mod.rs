//! Edge-list persistence, dataset ingestion and run configuration.

pub mod config;
pub mod ingest;
pub mod synthetic;

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Result, SgaError};
use crate::graph::{EdgeSample, Sign, SignedGraph};

pub use config::{DatasetSource, RunConfig};
pub use ingest::{ingest_dataset, DatasetFormat, DatasetStats, IngestedDataset};
pub use synthetic::{generate_synthetic, SyntheticSpec};

const NODES_PREFIX: &str = "# nodes:";

/// Parses a sign field: `+`, `-`, `1`, `-1`, `+1`.
pub fn parse_sign(field: &str) -> Option<Sign> {
    match field.trim() {
        "+" | "1" | "+1" => Some(Sign::Positive),
        "-" | "-1" => Some(Sign::Negative),
        _ => None,
    }
}

/// Writes `u,v,sign` rows. The node count goes in a leading comment so
/// isolated nodes survive a round trip.
pub fn write_edges(path: &Path, num_nodes: usize, edges: &[EdgeSample]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| SgaError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut emit = || -> std::io::Result<()> {
        writeln!(w, "{NODES_PREFIX} {num_nodes}")?;
        writeln!(w, "u,v,sign")?;
        for e in edges {
            let s = if e.sign.is_positive() { '+' } else { '-' };
            writeln!(w, "{},{},{s}", e.u, e.v)?;
        }
        w.flush()
    };
    emit().map_err(|e| SgaError::io(path, e))
}

pub fn write_graph(path: &Path, graph: &SignedGraph) -> Result<()> {
    write_edges(path, graph.num_nodes(), &graph.edges())
}

/// Reads the canonical edge CSV. Ids are taken as-is; the node count comes
/// from the `# nodes:` comment when present, else from the largest id.
pub fn read_edges(path: &Path) -> Result<(usize, Vec<EdgeSample>)> {
    let file = fs::File::open(path).map_err(|e| SgaError::io(path, e))?;
    let parse_err = |line: usize, msg: String| SgaError::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut declared = None;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| SgaError::io(path, e))?;
        let line = line.trim();
        if let Some(rest) = line.strip_prefix(NODES_PREFIX) {
            let n = rest
                .trim()
                .parse::<usize>()
                .map_err(|_| parse_err(lineno, format!("bad node count {:?}", rest.trim())))?;
            declared = Some(n);
            continue;
        }
        if line.is_empty() || line.starts_with('#') || line.eq_ignore_ascii_case("u,v,sign") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(parse_err(lineno, format!("expected 3 fields u,v,sign, found {}", fields.len())));
        }
        let id = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| parse_err(lineno, format!("bad node id {:?}", s.trim())))
        };
        let (u, v) = (id(fields[0])?, id(fields[1])?);
        let sign = parse_sign(fields[2]).ok_or_else(|| parse_err(lineno, format!("bad sign {:?}", fields[2].trim())))?;
        if u == v {
            return Err(parse_err(lineno, format!("self-loop on node {u}")));
        }
        records.push((lineno, EdgeSample::new(u, v, sign)));
    }
    let max_id = records.iter().map(|(_, e)| e.v + 1).max().unwrap_or(0);
    let num_nodes = match declared {
        Some(n) if n < max_id => {
            return Err(parse_err(1, format!("declared {n} nodes but ids reach {}", max_id - 1)));
        }
        Some(n) => n,
        None => max_id,
    };
    records.sort_by_key(|(_, e)| e.pair());
    let mut edges: Vec<EdgeSample> = Vec::with_capacity(records.len());
    for (lineno, e) in records {
        match edges.last() {
            Some(prev) if prev.pair() == e.pair() && prev.sign != e.sign => {
                return Err(parse_err(lineno, format!("conflicting sign for pair ({}, {})", e.u, e.v)));
            }
            Some(prev) if prev.pair() == e.pair() => {}
            _ => edges.push(e),
        }
    }
    Ok((num_nodes, edges))
}

pub fn read_graph(path: &Path) -> Result<SignedGraph> {
    let (n, edges) = read_edges(path)?;
    SignedGraph::from_samples(n, &edges)
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| SgaError::io(path, e))
}
