//! Simple undirected graphs, shortest paths and anchor-distance profiles.

mod io;
mod random;

pub use io::{from_edge_list, write_edge_list, write_label_tsv, EdgeListImport};
pub use random::random_regular;

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Immutable simple undirected graph on vertices `0..n`.
///
/// Neighbor lists are sorted and free of self-loops and duplicates; every
/// edge appears in both endpoint lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph from an edge list, rejecting self-loops, duplicate
    /// edges and out-of-range endpoints.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::param(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            if u == v {
                return Err(Error::param(format!("self-loop at vertex {u}")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        Self::from_adjacency(adjacency)
    }

    /// Builds a graph from neighbor lists, which are sorted in place. The
    /// lists must already be symmetric and simple.
    pub fn from_adjacency(mut adjacency: Vec<Vec<usize>>) -> Result<Self> {
        let n = adjacency.len();
        let mut degree_sum = 0;
        for (v, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::param(format!("duplicate neighbor at vertex {v}")));
            }
            if list.binary_search(&v).is_ok() {
                return Err(Error::param(format!("self-loop at vertex {v}")));
            }
            if list.last().is_some_and(|&u| u >= n) {
                return Err(Error::param(format!("neighbor of {v} out of range")));
            }
            degree_sum += list.len();
        }
        for (v, list) in adjacency.iter().enumerate() {
            for &u in list {
                if adjacency[u].binary_search(&v).is_err() {
                    return Err(Error::param(format!(
                        "asymmetric adjacency between {v} and {u}"
                    )));
                }
            }
        }
        Ok(Graph {
            adjacency,
            edge_count: degree_sum / 2,
        })
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Component label per vertex; labels are assigned in order of the
    /// smallest vertex id in each component.
    pub fn component_labels(&self) -> (Vec<usize>, usize) {
        let n = self.n();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = count;
            queue.push_back(start);
            while let Some(v) = queue.pop_front() {
                for &u in &self.adjacency[v] {
                    if label[u] == usize::MAX {
                        label[u] = count;
                        queue.push_back(u);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    pub fn is_connected(&self) -> bool {
        self.n() > 0 && self.component_labels().1 == 1
    }

    /// Subgraph induced on `vertices`, re-indexed in the order given.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Graph {
        let mut index = vec![usize::MAX; self.n()];
        for (new, &old) in vertices.iter().enumerate() {
            index[old] = new;
        }
        let adjacency = vertices
            .iter()
            .map(|&old| {
                let mut list: Vec<usize> = self.adjacency[old]
                    .iter()
                    .filter_map(|&u| (index[u] != usize::MAX).then_some(index[u]))
                    .collect();
                list.sort_unstable();
                list
            })
            .collect::<Vec<_>>();
        let edge_count = adjacency.iter().map(Vec::len).sum::<usize>() / 2;
        Graph {
            adjacency,
            edge_count,
        }
    }
}

/// Largest connected component, re-indexed in increasing original id.
///
/// Returns the component together with the original id of each new vertex.
/// Among components of equal size the one holding the smallest original id
/// wins.
pub fn largest_connected_component(g: &Graph) -> Result<(Graph, Vec<usize>)> {
    if g.n() == 0 {
        return Err(Error::param(
            "largest connected component of an empty graph",
        ));
    }
    let (labels, count) = g.component_labels();
    let mut sizes = vec![0usize; count];
    for &l in &labels {
        sizes[l] += 1;
    }
    // Labels are ordered by smallest member, so the first maximum is the tie winner.
    let best = (0..count).fold(0, |best, l| if sizes[l] > sizes[best] { l } else { best });
    let keep: Vec<usize> = (0..g.n()).filter(|&v| labels[v] == best).collect();
    Ok((g.induced_subgraph(&keep), keep))
}

/// Hop distances from `source` to every vertex.
pub fn bfs_distances(g: &Graph, source: usize) -> Result<Vec<u32>> {
    if source >= g.n() {
        return Err(Error::param(format!(
            "source {source} out of range for n = {}",
            g.n()
        )));
    }
    let mut dist = vec![u32::MAX; g.n()];
    let mut queue = VecDeque::with_capacity(g.n());
    dist[source] = 0;
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        let next = dist[v] + 1;
        for &u in g.neighbors(v) {
            if dist[u] == u32::MAX {
                dist[u] = next;
                queue.push_back(u);
            }
        }
    }
    if let Some(vertex) = dist.iter().position(|&d| d == u32::MAX) {
        return Err(Error::Disconnected {
            source_vertex: source,
            vertex,
        });
    }
    Ok(dist)
}

/// Ordered set of distinct anchor vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnchorSet {
    anchors: Vec<usize>,
}

impl AnchorSet {
    pub fn new(anchors: Vec<usize>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for &a in &anchors {
            if a >= n {
                return Err(Error::param(format!("anchor {a} out of range for n = {n}")));
            }
            if std::mem::replace(&mut seen[a], true) {
                return Err(Error::param(format!("duplicate anchor {a}")));
            }
        }
        Ok(AnchorSet { anchors })
    }

    pub fn empty() -> Self {
        AnchorSet {
            anchors: Vec::new(),
        }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.anchors
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }
}

/// Row-major `n x k` table of anchor distances; row `v` is `d_A(v)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceProfiles {
    n: usize,
    k: usize,
    data: Vec<u32>,
}

impl DistanceProfiles {
    /// Profiles with no coordinates: every vertex maps to the empty tuple.
    pub fn empty(n: usize) -> Self {
        DistanceProfiles {
            n,
            k: 0,
            data: Vec::new(),
        }
    }

    pub fn from_rows(n: usize, k: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != n * k {
            return Err(Error::param(format!(
                "profile data has {} entries, expected {n} x {k}",
                data.len()
            )));
        }
        Ok(DistanceProfiles { n, k, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row(&self, v: usize) -> &[u32] {
        &self.data[v * self.k..(v + 1) * self.k]
    }
}

/// Distance tuple of every vertex to the anchors, in anchor order.
pub fn anchor_profile(g: &Graph, anchors: &AnchorSet) -> Result<DistanceProfiles> {
    let n = g.n();
    let k = anchors.len();
    let mut data = vec![0u32; n * k];
    for (i, &a) in anchors.as_slice().iter().enumerate() {
        let dist = bfs_distances(g, a)?;
        for (v, d) in dist.into_iter().enumerate() {
            data[v * k + i] = d;
        }
    }
    Ok(DistanceProfiles { n, k, data })
}
