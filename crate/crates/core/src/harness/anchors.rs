use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{bfs_distances, AnchorSet, Graph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnchorStrategy {
    /// Uniform sample without replacement.
    Random,
    /// Seeded uniform first anchor, then greedy max-min hop distance.
    Farthest,
    /// Highest degrees first.
    Degree,
}

impl fmt::Display for AnchorStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnchorStrategy::Random => "random",
            AnchorStrategy::Farthest => "farthest",
            AnchorStrategy::Degree => "degree",
        })
    }
}

impl FromStr for AnchorStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(AnchorStrategy::Random),
            "farthest" => Ok(AnchorStrategy::Farthest),
            "degree" => Ok(AnchorStrategy::Degree),
            other => Err(Error::param(format!("unknown anchor strategy '{other}'"))),
        }
    }
}

/// Picks `k` distinct anchors. Ties always go to the smaller vertex id.
pub fn select_anchors(
    g: &Graph,
    k: usize,
    strategy: AnchorStrategy,
    seed: u64,
) -> Result<AnchorSet> {
    let n = g.n();
    if k > n {
        return Err(Error::param(format!(
            "cannot pick {k} anchors from {n} vertices"
        )));
    }
    if k == 0 {
        return Ok(AnchorSet::empty());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let anchors = match strategy {
        AnchorStrategy::Random => rand::seq::index::sample(&mut rng, n, k).into_vec(),
        AnchorStrategy::Degree => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| g.degree(b).cmp(&g.degree(a)).then(a.cmp(&b)));
            order.truncate(k);
            order
        }
        AnchorStrategy::Farthest => {
            let first = rng.random_range(0..n);
            farthest_point(g, first, k)?
        }
    };
    AnchorSet::new(anchors, n)
}

/// Greedy farthest-point sequence of length `k` starting at `first`.
pub fn farthest_point(g: &Graph, first: usize, k: usize) -> Result<Vec<usize>> {
    let mut chosen = vec![first];
    let mut nearest = bfs_distances(g, first)?;
    while chosen.len() < k {
        // first maximum wins, i.e. the smallest id among ties
        let next = (0..g.n())
            .fold(None::<usize>, |best, v| match best {
                Some(b) if nearest[b] >= nearest[v] => Some(b),
                _ => Some(v),
            })
            .expect("non-empty graph");
        if nearest[next] == 0 {
            break;
        }
        chosen.push(next);
        for (slot, d) in nearest.iter_mut().zip(bfs_distances(g, next)?) {
            *slot = (*slot).min(d);
        }
    }
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::random_regular;

    #[test]
    fn degree_strategy_on_star() {
        let star = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let a = select_anchors(&star, 1, AnchorStrategy::Degree, 0).unwrap();
        assert_eq!(a.as_slice(), &[0]);
        let a = select_anchors(&star, 3, AnchorStrategy::Degree, 0).unwrap();
        assert_eq!(a.as_slice(), &[0, 1, 2]);
    }

    #[test]
    fn farthest_on_path() {
        let path = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        assert_eq!(farthest_point(&path, 0, 2).unwrap(), vec![0, 4]);
        // 0 and 4 chosen: vertex 2 is at distance 2 from both
        assert_eq!(farthest_point(&path, 0, 3).unwrap(), vec![0, 4, 2]);
    }

    #[test]
    fn random_is_seed_deterministic() {
        let g = random_regular(200, 3, 1).unwrap();
        let a = select_anchors(&g, 6, AnchorStrategy::Random, 42).unwrap();
        let b = select_anchors(&g, 6, AnchorStrategy::Random, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 6);
        let f1 = select_anchors(&g, 6, AnchorStrategy::Farthest, 42).unwrap();
        let f2 = select_anchors(&g, 6, AnchorStrategy::Farthest, 42).unwrap();
        assert_eq!(f1, f2);
    }

    #[test]
    fn too_many_anchors() {
        let g = random_regular(10, 3, 1).unwrap();
        assert!(select_anchors(&g, 11, AnchorStrategy::Random, 0).is_err());
        assert_eq!(
            select_anchors(&g, 10, AnchorStrategy::Farthest, 0)
                .unwrap()
                .len(),
            10
        );
        assert!(select_anchors(&g, 0, AnchorStrategy::Random, 0)
            .unwrap()
            .is_empty());
    }
}
