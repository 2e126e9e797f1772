use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::Graph;
use crate::error::{Error, Result};

/// Result of parsing an edge list.
#[derive(Debug, Clone)]
pub struct EdgeListImport {
    pub graph: Graph,
    /// Original token of each vertex id, in first-appearance order.
    pub labels: Vec<String>,
    pub duplicates_dropped: usize,
    pub self_loops_dropped: usize,
}

/// Parses a whitespace-separated edge list.
///
/// Blank lines and lines starting with `#` are skipped. Tokens are arbitrary
/// strings and are assigned ids `0..n` in order of first appearance.
/// Duplicate edges (in either orientation) and self-loops are dropped and
/// counted.
pub fn from_edge_list<R: BufRead>(reader: R) -> Result<EdgeListImport> {
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut adjacency: Vec<Vec<usize>> = Vec::new();
    let mut raw_edges = 0usize;
    let mut self_loops = 0usize;

    let mut intern = |token: &str, adjacency: &mut Vec<Vec<usize>>| -> usize {
        if let Some(&id) = ids.get(token) {
            return id;
        }
        let id = labels.len();
        ids.insert(token.to_owned(), id);
        labels.push(token.to_owned());
        adjacency.push(Vec::new());
        id
    };

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected 2 vertex tokens, found {}", tokens.len()),
            });
        }
        let u = intern(tokens[0], &mut adjacency);
        let v = intern(tokens[1], &mut adjacency);
        if u == v {
            self_loops += 1;
            continue;
        }
        raw_edges += 1;
        adjacency[u].push(v);
        adjacency[v].push(u);
    }

    let mut kept = 0usize;
    for list in &mut adjacency {
        list.sort_unstable();
        list.dedup();
        kept += list.len();
    }
    let graph = Graph::from_adjacency(adjacency)?;
    debug_assert_eq!(kept / 2, graph.edge_count());
    Ok(EdgeListImport {
        duplicates_dropped: raw_edges - graph.edge_count(),
        self_loops_dropped: self_loops,
        graph,
        labels,
    })
}

/// Writes one `u v` line per edge (`u < v`), readable by [`from_edge_list`].
pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    out.flush()?;
    Ok(())
}

/// Sidecar `token<TAB>id` mapping for an imported edge list.
pub fn write_label_tsv<W: Write>(labels: &[String], mut out: W) -> Result<()> {
    writeln!(out, "token\tid")?;
    for (id, token) in labels.iter().enumerate() {
        writeln!(out, "{token}\t{id}")?;
    }
    out.flush()?;
    Ok(())
}
