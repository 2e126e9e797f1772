//! The observation map `F(v) = (d_A(v), spectral code of v)`, its fibers and
//! distance buckets, and the counting statistics built on them.
//!
//! All keys are exact integer tuples, so every count here is exact.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{anchor_profile, AnchorSet, DistanceProfiles, Graph};
use crate::spectral::QuantizedCodes;

/// One distance bucket: vertices sharing a distance tuple, split into the
/// fibers of the full code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bucket {
    /// Sorted vertex ids.
    pub vertices: Vec<usize>,
    /// Indices into [`ObservationTable::fibers`].
    pub fibers: std::ops::Range<usize>,
}

#[derive(Debug, Clone)]
pub struct ObservationTable {
    profiles: DistanceProfiles,
    codes: QuantizedCodes,
    fibers: Vec<Vec<usize>>,
    fiber_of: Vec<usize>,
    buckets: Vec<Bucket>,
}

/// Observation table for `g` under `anchors` and precomputed spectral codes.
pub fn build_observation(
    g: &Graph,
    anchors: &AnchorSet,
    codes: &QuantizedCodes,
) -> Result<ObservationTable> {
    if codes.n() != g.n() {
        return Err(Error::param(format!(
            "code table has {} rows for a {}-vertex graph",
            codes.n(),
            g.n()
        )));
    }
    let profiles = anchor_profile(g, anchors)?;
    ObservationTable::new(profiles, codes.clone())
}

impl ObservationTable {
    pub fn new(profiles: DistanceProfiles, codes: QuantizedCodes) -> Result<Self> {
        let n = profiles.n();
        if codes.n() != n {
            return Err(Error::param(format!(
                "{} distance rows but {} code rows",
                n,
                codes.n()
            )));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_unstable_by(|&a, &b| {
            profiles
                .row(a)
                .cmp(profiles.row(b))
                .then_with(|| codes.row(a).cmp(codes.row(b)))
                .then(a.cmp(&b))
        });

        let mut fibers: Vec<Vec<usize>> = Vec::new();
        let mut buckets: Vec<Bucket> = Vec::new();
        let mut fiber_of = vec![0usize; n];
        for (pos, &v) in order.iter().enumerate() {
            let prev = pos.checked_sub(1).map(|p| order[p]);
            let same_bucket = prev.is_some_and(|u| profiles.row(u) == profiles.row(v));
            let same_fiber = same_bucket && prev.is_some_and(|u| codes.row(u) == codes.row(v));
            if !same_bucket {
                buckets.push(Bucket {
                    vertices: Vec::new(),
                    fibers: fibers.len()..fibers.len(),
                });
            }
            if !same_fiber {
                fibers.push(Vec::new());
            }
            let f = fibers.len() - 1;
            fibers[f].push(v);
            fiber_of[v] = f;
            let bucket = buckets.last_mut().expect("bucket opened above");
            bucket.vertices.push(v);
            bucket.fibers.end = f + 1;
        }
        for bucket in &mut buckets {
            bucket.vertices.sort_unstable();
        }
        Ok(ObservationTable {
            profiles,
            codes,
            fibers,
            fiber_of,
            buckets,
        })
    }

    pub fn n(&self) -> usize {
        self.fiber_of.len()
    }

    pub fn profiles(&self) -> &DistanceProfiles {
        &self.profiles
    }

    pub fn codes(&self) -> &QuantizedCodes {
        &self.codes
    }

    /// Preimages of the attained codes, each sorted by vertex id. Fibers are
    /// ordered by code.
    pub fn fibers(&self) -> &[Vec<usize>] {
        &self.fibers
    }

    pub fn fiber_of(&self, v: usize) -> usize {
        self.fiber_of[v]
    }

    /// Distance buckets ordered by distance tuple.
    pub fn buckets(&self) -> &[Bucket] {
        &self.buckets
    }

    /// `|Im F|`
    pub fn image_size(&self) -> usize {
        self.fibers.len()
    }

    /// Number of attained distance tuples, `D(G, A)`.
    pub fn profile_count(&self) -> usize {
        self.buckets.len()
    }

    /// Full code of `v`: distance tuple and spectral bin indices.
    pub fn code(&self, v: usize) -> (&[u32], &[i64]) {
        (self.profiles.row(v), self.codes.row(v))
    }

    /// Same distance tuples, spectral part dropped.
    pub fn distance_only(&self) -> ObservationTable {
        ObservationTable::new(self.profiles.clone(), QuantizedCodes::empty(self.n()))
            .expect("shapes already validated")
    }

    /// Same spectral codes, distance part dropped.
    pub fn spectral_only(&self) -> ObservationTable {
        ObservationTable::new(DistanceProfiles::empty(self.n()), self.codes.clone())
            .expect("shapes already validated")
    }
}

/// Exact image statistics of a table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiberStats {
    pub image_size: usize,
    /// `|Im F| / n`
    pub success: f64,
    /// `1 - success`
    pub error: f64,
    /// Mean fiber size seen from a uniform vertex: `sum |P|^2 / n`.
    pub vertex_mean_preimage: f64,
    /// Fraction of vertices whose code is unique.
    pub singleton_fraction: f64,
}

pub fn fiber_stats(t: &ObservationTable) -> FiberStats {
    let n = t.n() as f64;
    let image_size = t.image_size();
    let square_sum: usize = t.fibers.iter().map(|f| f.len() * f.len()).sum();
    let singletons = t.fibers.iter().filter(|f| f.len() == 1).count();
    let success = image_size as f64 / n;
    FiberStats {
        image_size,
        success,
        error: 1.0 - success,
        vertex_mean_preimage: square_sum as f64 / n,
        singleton_fraction: singletons as f64 / n,
    }
}

/// Smallest error any decoder from codes back to vertices can reach:
/// `1 - |Im F| / n`.
pub fn optimal_error(t: &ObservationTable) -> f64 {
    1.0 - t.image_size() as f64 / t.n() as f64
}

/// Decoder that returns the smallest vertex id carrying each code, indexed
/// by fiber.
pub fn min_id_section(t: &ObservationTable) -> Vec<usize> {
    t.fibers.iter().map(|f| f[0]).collect()
}

/// Success probability of a decoder over a uniformly random vertex, where
/// `decoder[f]` is the vertex guessed for fiber `f`.
pub fn section_success(t: &ObservationTable, decoder: &[usize]) -> f64 {
    let hits = (0..t.n()).filter(|&v| decoder[t.fiber_of(v)] == v).count();
    hits as f64 / t.n() as f64
}

/// Exact non-negative fraction, compared by cross-multiplication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Frac {
    pub num: u128,
    pub den: u128,
}

impl Frac {
    pub fn new(num: u128, den: u128) -> Self {
        assert!(den > 0, "zero denominator");
        Frac { num, den }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialOrd for Frac {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frac {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

/// Occupancy counts `N(B; z)` of the spectral codes attained in `bucket`.
pub fn code_occupancy(bucket: &[usize], codes: &QuantizedCodes) -> Vec<usize> {
    let mut rows: Vec<&[i64]> = bucket.iter().map(|&v| codes.row(v)).collect();
    rows.sort_unstable();
    let mut counts = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if i > 0 && rows[i - 1] == *row {
            *counts.last_mut().unwrap() += 1;
        } else {
            counts.push(1);
        }
    }
    counts
}

/// Counting summary of one bucket, with exact collision and balance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BucketSummary {
    pub size: usize,
    /// `M(B)`: distinct spectral codes in the bucket.
    pub code_count: usize,
    pub max_occupancy: usize,
    /// `sum_z N (N - 1)`: ordered pairs with equal codes.
    pub colliding_pairs: u64,
}

impl BucketSummary {
    pub fn from_occupancy(occupancy: &[usize]) -> Self {
        BucketSummary {
            size: occupancy.iter().sum(),
            code_count: occupancy.len(),
            max_occupancy: occupancy.iter().copied().max().unwrap_or(0),
            colliding_pairs: occupancy
                .iter()
                .map(|&c| (c * c.saturating_sub(1)) as u64)
                .sum(),
        }
    }

    /// `Coll(B)`; defined for `|B| >= 2`.
    pub fn collision_frac(&self) -> Option<Frac> {
        (self.size >= 2).then(|| {
            let b = self.size as u128;
            Frac::new(u128::from(self.colliding_pairs), b * (b - 1))
        })
    }

    /// `Bal(B) = M(B) / |B| * max_z N(B; z)`
    pub fn balance_frac(&self) -> Frac {
        Frac::new(
            (self.code_count * self.max_occupancy) as u128,
            self.size as u128,
        )
    }

    pub fn collision(&self) -> Option<f64> {
        self.collision_frac().map(Frac::to_f64)
    }

    pub fn balance(&self) -> f64 {
        self.balance_frac().to_f64()
    }

    pub fn code_ratio(&self) -> f64 {
        self.code_count as f64 / self.size as f64
    }

    /// `M(B) <= Bal(B) |B| / (1 + (|B| - 1) Coll(B))`, evaluated in exact
    /// rational arithmetic.
    ///
    /// With `Q = sum_z N^2` the right side is `M maxN |B| / Q`.
    pub fn refined_inequality_holds(&self) -> bool {
        let m = self.code_count as u128;
        let b = self.size as u128;
        let q = u128::from(self.colliding_pairs) + b;
        m * q <= m * self.max_occupancy as u128 * b
    }

    /// Right-hand side of [`Self::refined_inequality_holds`] in floating point.
    pub fn refined_inequality_rhs(&self) -> f64 {
        let b = self.size as f64;
        let coll = self.collision().unwrap_or(0.0);
        self.balance() * b / (1.0 + (b - 1.0) * coll)
    }
}

/// Fraction of ordered pairs of distinct vertices in `bucket` with identical
/// code rows. Requires `|B| >= 2`.
pub fn bucket_collision(bucket: &[usize], codes: &QuantizedCodes) -> Result<f64> {
    if bucket.len() < 2 {
        return Err(Error::param(format!(
            "collision density needs at least 2 vertices, got {}",
            bucket.len()
        )));
    }
    let summary = BucketSummary::from_occupancy(&code_occupancy(bucket, codes));
    Ok(summary.collision().expect("size >= 2"))
}

pub fn bucket_balance(bucket: &[usize], codes: &QuantizedCodes) -> Result<f64> {
    if bucket.is_empty() {
        return Err(Error::param("balance of an empty bucket"));
    }
    Ok(BucketSummary::from_occupancy(&code_occupancy(bucket, codes)).balance())
}

/// Aggregates over the non-singleton buckets passing a size cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BucketAggregate {
    pub bucket_count: usize,
    /// `sum b(b-1) Coll(B) / sum b(b-1)`
    pub weighted_collision: f64,
    pub mean_collision: f64,
    pub median_collision: f64,
    /// Median of `M(B) / |B|`.
    pub median_code_ratio: f64,
    pub median_balance: f64,
    /// Nearest-rank 0.9 quantile of `Bal(B)`.
    pub q90_balance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BucketDiagnostics {
    pub n: usize,
    /// Number of attained distance tuples.
    pub bucket_count: usize,
    /// Fraction of vertices sitting alone in their distance bucket.
    pub singleton_bucket_fraction: f64,
    /// Summaries of the non-singleton buckets, in bucket order.
    pub buckets: Vec<BucketSummary>,
    /// `|B| >= 2`; `None` when every bucket is a singleton.
    pub all: Option<BucketAggregate>,
    /// `|B| >= 3`
    pub large3: Option<BucketAggregate>,
    /// `|B| >= 10`
    pub large10: Option<BucketAggregate>,
}

impl BucketDiagnostics {
    /// Exact check of the per-bucket refined inequality over every
    /// non-singleton bucket.
    pub fn refined_inequality_holds(&self) -> bool {
        self.buckets
            .iter()
            .all(BucketSummary::refined_inequality_holds)
    }
}

pub fn bucket_diagnostics(t: &ObservationTable) -> BucketDiagnostics {
    let n = t.n();
    let mut singleton_vertices = 0usize;
    let mut buckets = Vec::new();
    for bucket in t.buckets() {
        if bucket.vertices.len() == 1 {
            singleton_vertices += 1;
            continue;
        }
        // fibers of a bucket are exactly its spectral code classes
        let occupancy: Vec<usize> = t.fibers[bucket.fibers.clone()]
            .iter()
            .map(Vec::len)
            .collect();
        buckets.push(BucketSummary::from_occupancy(&occupancy));
    }
    let aggregate = |cutoff: usize| {
        let chosen: Vec<&BucketSummary> = buckets.iter().filter(|b| b.size >= cutoff).collect();
        aggregate_buckets(&chosen)
    };
    BucketDiagnostics {
        n,
        bucket_count: t.profile_count(),
        singleton_bucket_fraction: singleton_vertices as f64 / n as f64,
        all: aggregate(2),
        large3: aggregate(3),
        large10: aggregate(10),
        buckets,
    }
}

fn aggregate_buckets(buckets: &[&BucketSummary]) -> Option<BucketAggregate> {
    if buckets.is_empty() {
        return None;
    }
    let pair_total: u64 = buckets.iter().map(|b| (b.size * (b.size - 1)) as u64).sum();
    let colliding: u64 = buckets.iter().map(|b| b.colliding_pairs).sum();
    let collisions: Vec<f64> = buckets
        .iter()
        .map(|b| b.collision().expect("size >= 2"))
        .collect();
    let ratios: Vec<f64> = buckets.iter().map(|b| b.code_ratio()).collect();
    let balances: Vec<f64> = buckets.iter().map(|b| b.balance()).collect();
    Some(BucketAggregate {
        bucket_count: buckets.len(),
        weighted_collision: colliding as f64 / pair_total as f64,
        mean_collision: collisions.iter().sum::<f64>() / collisions.len() as f64,
        median_collision: median(collisions),
        median_code_ratio: median(ratios),
        median_balance: median(balances.clone()),
        q90_balance: nearest_rank(balances, 0.9),
    })
}

/// Median; the mean of the two middle values for even lengths.
pub fn median(mut values: Vec<f64>) -> f64 {
    assert!(!values.is_empty(), "median of an empty list");
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

/// Nearest-rank quantile: the `ceil(q * len)`-th smallest value.
pub fn nearest_rank(mut values: Vec<f64>, q: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of an empty list");
    values.sort_by(f64::total_cmp);
    let rank = ((q * values.len() as f64).ceil() as usize).clamp(1, values.len());
    values[rank - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::AnchorSet;

    fn star() -> Graph {
        Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap()
    }

    fn codes(rows: &[&[i64]]) -> QuantizedCodes {
        let m = rows.first().map_or(0, |r| r.len());
        QuantizedCodes::from_rows(rows.len(), m, rows.concat()).unwrap()
    }

    #[test]
    fn star_with_center_anchor() {
        let t = build_observation(
            &star(),
            &AnchorSet::new(vec![0], 4).unwrap(),
            &QuantizedCodes::empty(4),
        )
        .unwrap();
        assert_eq!(t.image_size(), 2);
        let s = fiber_stats(&t);
        assert_eq!(s.success, 0.5);
        assert_eq!(s.error, 0.5);
        assert_eq!(s.vertex_mean_preimage, 2.5);
        assert_eq!(s.singleton_fraction, 0.25);
        assert_eq!(optimal_error(&t), 0.5);
    }

    #[test]
    fn injective_path() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let t = build_observation(
            &g,
            &AnchorSet::new(vec![0, 3], 4).unwrap(),
            &QuantizedCodes::empty(4),
        )
        .unwrap();
        let s = fiber_stats(&t);
        assert_eq!(s.image_size, 4);
        assert_eq!(s.error, 0.0);
        assert_eq!(s.vertex_mean_preimage, 1.0);
        assert_eq!(s.singleton_fraction, 1.0);
        assert_eq!(optimal_error(&t), 0.0);
    }

    #[test]
    fn without_spectral_part_fibers_are_buckets() {
        let t = build_observation(
            &star(),
            &AnchorSet::new(vec![1], 4).unwrap(),
            &QuantizedCodes::empty(4),
        )
        .unwrap();
        assert_eq!(t.image_size(), t.profile_count());
        for b in t.buckets() {
            assert_eq!(b.fibers.len(), 1);
            assert_eq!(t.fibers()[b.fibers.start], b.vertices);
        }
    }

    #[test]
    fn mismatched_dimensions_rejected() {
        assert!(
            build_observation(&star(), &AnchorSet::empty(), &QuantizedCodes::empty(3)).is_err()
        );
    }

    #[test]
    fn collision_and_balance_definitions() {
        let q = codes(&[&[1], &[1], &[2]]);
        assert!((bucket_collision(&[0, 1, 2], &q).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((bucket_balance(&[0, 1, 2], &q).unwrap() - 4.0 / 3.0).abs() < 1e-15);

        let same = codes(&[&[5], &[5], &[5]]);
        assert_eq!(bucket_collision(&[0, 1, 2], &same).unwrap(), 1.0);
        let distinct = codes(&[&[1], &[2], &[3]]);
        assert_eq!(bucket_collision(&[0, 1, 2], &distinct).unwrap(), 0.0);
        assert_eq!(bucket_balance(&[0, 1, 2], &distinct).unwrap(), 1.0);

        let skewed = codes(&[&[1], &[1], &[1], &[2]]);
        assert_eq!(bucket_balance(&[0, 1, 2, 3], &skewed).unwrap(), 1.5);

        assert!(bucket_collision(&[0], &q).is_err());
        assert!(bucket_balance(&[], &q).is_err());
    }

    #[test]
    fn refined_inequality_example() {
        let s = BucketSummary::from_occupancy(&[2, 1]);
        assert!(s.refined_inequality_holds());
        assert!((s.refined_inequality_rhs() - 2.4).abs() < 1e-12);
        // uniform occupancy is the equality case
        let uniform = BucketSummary::from_occupancy(&[3, 3, 3]);
        assert!(uniform.refined_inequality_holds());
        let m = uniform.code_count as u128;
        let q = u128::from(uniform.colliding_pairs) + uniform.size as u128;
        assert_eq!(
            m * q,
            m * uniform.max_occupancy as u128 * uniform.size as u128
        );
    }

    #[test]
    fn diagnostics_all_singletons() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let t = build_observation(
            &g,
            &AnchorSet::new(vec![0], 4).unwrap(),
            &QuantizedCodes::empty(4),
        )
        .unwrap();
        let d = bucket_diagnostics(&t);
        assert_eq!(d.singleton_bucket_fraction, 1.0);
        assert!(d.all.is_none() && d.large3.is_none() && d.large10.is_none());
    }

    #[test]
    fn diagnostics_single_bucket_aggregate() {
        // one bucket {0,1,2} with codes [z1,z1,z2] plus singletons 3, 4
        let profiles = DistanceProfiles::from_rows(5, 1, vec![1, 1, 1, 2, 3]).unwrap();
        let q = codes(&[&[7], &[7], &[8], &[0], &[0]]);
        let t = ObservationTable::new(profiles, q).unwrap();
        let d = bucket_diagnostics(&t);
        assert!((d.singleton_bucket_fraction - 0.4).abs() < 1e-15);
        let all = d.all.unwrap();
        assert!((all.weighted_collision - 1.0 / 3.0).abs() < 1e-15);
        assert!((all.median_code_ratio - 2.0 / 3.0).abs() < 1e-15);
        assert!((all.q90_balance - 4.0 / 3.0).abs() < 1e-15);
        assert!(d.large3.is_some());
        assert!(d.large10.is_none());
        assert_eq!(t.image_size(), 4);
    }

    #[test]
    fn quantiles() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(nearest_rank(v.clone(), 0.9), 9.0);
        assert_eq!(nearest_rank(v, 1.0), 10.0);
        assert_eq!(nearest_rank(vec![4.0], 0.9), 4.0);
    }

    #[test]
    fn min_id_section_reaches_image_fraction() {
        let t = build_observation(
            &star(),
            &AnchorSet::new(vec![0], 4).unwrap(),
            &QuantizedCodes::empty(4),
        )
        .unwrap();
        let section = min_id_section(&t);
        assert_eq!(section_success(&t, &section), 0.5);
    }
}
