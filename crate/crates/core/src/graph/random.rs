use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Graph;
use crate::error::{Error, Result};

const MAX_ATTEMPTS: usize = 1_000_000;

/// Samples a connected simple `r`-regular graph on `n` vertices.
///
/// Pairing model: `n * r` half-edges are shuffled and matched in consecutive
/// pairs. Any pairing with a self-loop or a repeated edge is discarded and
/// the whole pairing redrawn, as is any disconnected outcome. The generator
/// is ChaCha8 seeded from `seed`, so output is identical across platforms.
pub fn random_regular(n: usize, r: usize, seed: u64) -> Result<Graph> {
    if r < 3 {
        return Err(Error::param(format!(
            "regular degree must be at least 3, got {r}"
        )));
    }
    if n <= r {
        return Err(Error::param(format!("need n > r, got n = {n}, r = {r}")));
    }
    if !(n * r).is_multiple_of(2) {
        return Err(Error::param(format!(
            "n * r must be even, got n = {n}, r = {r}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<usize> = (0..n * r).map(|p| p / r).collect();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::with_capacity(r); n];

    for _ in 0..MAX_ATTEMPTS {
        points.shuffle(&mut rng);
        adjacency.iter_mut().for_each(Vec::clear);
        let simple = points.chunks_exact(2).all(|pair| {
            let (u, v) = (pair[0], pair[1]);
            if u == v || adjacency[u].contains(&v) {
                return false;
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
            true
        });
        if !simple {
            continue;
        }
        let g = Graph::from_adjacency(adjacency.clone())?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::param(format!(
        "no simple connected {r}-regular graph on {n} vertices after {MAX_ATTEMPTS} pairings"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::bfs_distances;

    #[test]
    fn four_vertices_cubic_is_k4() {
        for seed in 0..5 {
            let g = random_regular(4, 3, seed).unwrap();
            assert_eq!(g.edge_count(), 6);
            assert!((0..4).all(|v| g.degree(v) == 3));
        }
    }

    #[test]
    fn every_degree_is_r() {
        let g = random_regular(500, 3, 11).unwrap();
        assert!(g.degrees().iter().all(|&d| d == 3));
        assert_eq!(g.edge_count(), 750);
        assert!(g.is_connected());
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(
            random_regular(60, 4, 9).unwrap(),
            random_regular(60, 4, 9).unwrap()
        );
        assert_ne!(
            random_regular(60, 4, 9).unwrap(),
            random_regular(60, 4, 10).unwrap()
        );
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(random_regular(5, 3, 0).is_err());
        assert!(random_regular(3, 3, 0).is_err());
        assert!(random_regular(10, 2, 0).is_err());
    }

    #[test]
    fn large_samples_have_logarithmic_diameter() {
        // diameters of random cubic graphs at n = 1000 concentrate near
        // log_2(n) + small constant; record them and bound by 2 ln n
        let n = 1000;
        let mut diameters = Vec::new();
        for seed in 0..20 {
            let g = random_regular(n, 3, seed).unwrap();
            let ecc = (0..n)
                .map(|s| *bfs_distances(&g, s).unwrap().iter().max().unwrap())
                .max()
                .unwrap();
            diameters.push(ecc);
        }
        let bound = (2.0 * (n as f64).ln()).ceil() as u32;
        assert!(diameters.iter().all(|&d| d <= bound), "{diameters:?}");
    }
}
