//! Stable seed derivation.
//!
//! A graph instance depends on `(master, n, r, trial)` only, so every
//! `(k, m, eta)` point of a sweep sees the same graphs. Anchor draws depend on
//! `(graph seed, k, resample)`, so every `(m, eta)` point sees the same
//! anchors. Any CSV row can be reproduced from its `seed`, `k` and
//! `resample` columns alone.

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds `parts` into `state` one word at a time.
pub fn combine(state: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(mix64(state), |acc, &p| mix64(acc ^ mix64(p)))
}

pub fn graph_seed(master: u64, n: usize, r: usize, trial: usize) -> u64 {
    combine(master, &[0x67, n as u64, r as u64, trial as u64])
}

pub fn anchor_seed(graph_seed: u64, k: usize, resample: usize) -> u64 {
    combine(graph_seed, &[0x61, k as u64, resample as u64])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values_are_stable() {
        // SplitMix64 of 0 from the reference implementation
        assert_eq!(mix64(0), 0xe220_a839_7b1d_cdaf);
        assert_eq!(graph_seed(1, 500, 3, 0), graph_seed(1, 500, 3, 0));
    }

    #[test]
    fn coordinates_separate_seeds() {
        let base = graph_seed(7, 500, 3, 0);
        assert_ne!(base, graph_seed(7, 500, 3, 1));
        assert_ne!(base, graph_seed(7, 1000, 3, 0));
        assert_ne!(base, graph_seed(8, 500, 3, 0));
        assert_ne!(anchor_seed(base, 2, 0), anchor_seed(base, 2, 1));
        assert_ne!(anchor_seed(base, 2, 0), anchor_seed(base, 3, 0));
    }
}
