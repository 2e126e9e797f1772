//! Structural statistics of a connected graph.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{bfs_distances, Graph};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphStats {
    pub n: usize,
    pub edge_count: usize,
    pub avg_degree: f64,
    /// `2|E| / (n (n - 1))`
    pub density: f64,
    pub diameter: u32,
    /// Mean hop distance over unordered vertex pairs.
    pub avg_shortest_path_length: f64,
    /// Mean local clustering; vertices of degree < 2 count as 0.
    pub avg_clustering: f64,
    /// `3 * triangles / connected triples`
    pub transitivity: f64,
    /// Population variance of the degree sequence.
    pub degree_variance: f64,
    pub degree_gini: f64,
}

pub fn structural_stats(g: &Graph) -> Result<GraphStats> {
    let n = g.n();
    if n < 2 {
        return Err(Error::param(format!(
            "structural statistics need n >= 2, got {n}"
        )));
    }

    let mut diameter = 0u32;
    let mut distance_sum = 0u64;
    for s in 0..n {
        let dist = bfs_distances(g, s)?;
        for &d in &dist[s + 1..] {
            distance_sum += u64::from(d);
            diameter = diameter.max(d);
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;

    let triangles_at = triangles_per_vertex(g);
    let mut clustering_sum = 0.0;
    let mut closed = 0u64;
    let mut triples = 0u64;
    for v in 0..n {
        let d = g.degree(v) as u64;
        let wedges = d * d.saturating_sub(1) / 2;
        triples += wedges;
        closed += triangles_at[v];
        if wedges > 0 {
            clustering_sum += triangles_at[v] as f64 / wedges as f64;
        }
    }

    let degrees = g.degrees();
    let mean_degree = degrees.iter().sum::<usize>() as f64 / n as f64;
    let degree_variance = degrees
        .iter()
        .map(|&d| (d as f64 - mean_degree).powi(2))
        .sum::<f64>()
        / n as f64;

    Ok(GraphStats {
        n,
        edge_count: g.edge_count(),
        avg_degree: mean_degree,
        density: 2.0 * g.edge_count() as f64 / (n as f64 * (n - 1) as f64),
        diameter,
        avg_shortest_path_length: distance_sum as f64 / pairs,
        avg_clustering: clustering_sum / n as f64,
        transitivity: if triples == 0 {
            0.0
        } else {
            closed as f64 / triples as f64
        },
        degree_variance,
        degree_gini: gini(&degrees),
    })
}

/// Number of triangles through each vertex.
fn triangles_per_vertex(g: &Graph) -> Vec<u64> {
    let n = g.n();
    let mut mark = vec![false; n];
    let mut out = vec![0u64; n];
    for v in 0..n {
        for &u in g.neighbors(v) {
            mark[u] = true;
        }
        let mut links = 0u64;
        for &u in g.neighbors(v) {
            links += g.neighbors(u).iter().filter(|&&w| mark[w]).count() as u64;
        }
        out[v] = links / 2;
        for &u in g.neighbors(v) {
            mark[u] = false;
        }
    }
    out
}

/// Gini coefficient of a non-negative sequence; 0 for an all-zero sequence.
pub fn gini(values: &[usize]) -> f64 {
    let n = values.len();
    let total: usize = values.iter().sum();
    if n == 0 || total == 0 {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| (i + 1) as f64 * x as f64)
        .sum();
    let nf = n as f64;
    (2.0 * weighted / (nf * total as f64) - (nf + 1.0) / nf).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::random_regular;

    #[test]
    fn complete_graph_k4() {
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let s = structural_stats(&g).unwrap();
        assert_eq!(s.density, 1.0);
        assert_eq!(s.diameter, 1);
        assert_eq!(s.avg_shortest_path_length, 1.0);
        assert_eq!(s.avg_clustering, 1.0);
        assert_eq!(s.transitivity, 1.0);
        assert_eq!(s.degree_gini, 0.0);
        assert_eq!(s.degree_variance, 0.0);
    }

    #[test]
    fn regular_graph_has_zero_degree_dispersion() {
        let g = random_regular(100, 3, 5).unwrap();
        let s = structural_stats(&g).unwrap();
        assert_eq!(s.degree_variance, 0.0);
        assert_eq!(s.degree_gini, 0.0);
        assert_eq!(s.avg_degree, 3.0);
    }

    #[test]
    fn star_has_no_triangles() {
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let s = structural_stats(&g).unwrap();
        assert_eq!(s.transitivity, 0.0);
        assert_eq!(s.avg_clustering, 0.0);
        assert_eq!(s.diameter, 2);
        // degrees (1,1,1,3): G = 2*(1+2+3+12)/(4*6) - 5/4 = 0.25
        assert!((s.degree_gini - 0.25).abs() < 1e-15);
    }

    #[test]
    fn too_small_or_disconnected() {
        assert!(structural_stats(&Graph::from_edges(1, &[]).unwrap()).is_err());
        assert!(structural_stats(&Graph::from_edges(3, &[(0, 1)]).unwrap()).is_err());
    }
}
