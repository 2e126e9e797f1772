use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::anchors::{select_anchors, AnchorStrategy};
use super::seed::{anchor_seed, graph_seed};
use crate::error::{Error, Result};
use crate::graph::{anchor_profile, random_regular, DistanceProfiles, Graph};
use crate::observation::{bucket_diagnostics, fiber_stats, BucketAggregate, ObservationTable};
use crate::spectral::{
    energy_embedding, low_frequency_basis, normalized_laplacian, quantize, EnergyEmbedding,
    QuantizedCodes, Quantizer, DEGENERACY_TOL,
};
use crate::theory::refined_image_bound_with;

/// Quantization resolution carried with the exact text it was given as, so
/// grouping keys and CSV cells never drift through float formatting.
#[derive(Debug, Clone)]
pub struct Eta {
    text: String,
    value: f64,
}

impl Eta {
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

impl FromStr for Eta {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let text = s.trim().to_owned();
        let value: f64 = text
            .parse()
            .map_err(|_| Error::param(format!("eta '{text}' is not a number")))?;
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::param(format!("eta must be positive, got '{text}'")));
        }
        Ok(Eta { text, value })
    }
}

impl fmt::Display for Eta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl PartialEq for Eta {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}

impl Eq for Eta {}

impl PartialOrd for Eta {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Eta {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then_with(|| self.text.cmp(&other.text))
    }
}

impl std::hash::Hash for Eta {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.text.hash(state);
    }
}

/// Which parts of the code enter the observation map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feature {
    /// Constant code.
    Nope,
    Distance,
    Spectral,
    Full,
}

impl Feature {
    pub fn uses_distance(self) -> bool {
        matches!(self, Feature::Distance | Feature::Full)
    }

    pub fn uses_spectral(self) -> bool {
        matches!(self, Feature::Spectral | Feature::Full)
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Feature::Nope => "nope",
            Feature::Distance => "distance",
            Feature::Spectral => "spectral",
            Feature::Full => "full",
        })
    }
}

impl FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nope" => Ok(Feature::Nope),
            "distance" => Ok(Feature::Distance),
            "spectral" => Ok(Feature::Spectral),
            "full" => Ok(Feature::Full),
            other => Err(Error::param(format!("unknown feature '{other}'"))),
        }
    }
}

/// One configuration of the grid. Field order is the row order of sweep
/// output.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrialPoint {
    pub n: usize,
    pub r: usize,
    pub k: usize,
    pub m: usize,
    pub eta: Eta,
    pub quantizer: Quantizer,
    pub scaled: bool,
    pub feature: Feature,
    pub anchor_strategy: AnchorStrategy,
}

/// Measured outcome of one (graph, anchor draw, configuration).
#[derive(Debug, Clone, PartialEq)]
pub struct TrialMetrics {
    pub image_size: usize,
    pub error: f64,
    pub image_frac: f64,
    pub mean_preimage: f64,
    pub singleton_frac: f64,
    pub codebook_size: usize,
    pub profile_count: usize,
    pub singleton_bucket_frac: f64,
    pub weighted_collision: Option<f64>,
    pub median_code_ratio: Option<f64>,
    pub q90_balance: Option<f64>,
    pub generic_bound: usize,
    pub refined_bound: Option<f64>,
    /// Generic, refined and per-bucket inequalities all hold.
    pub bounds_ok: bool,
    /// Large-bucket aggregates; not part of the CSV schema.
    pub large3: Option<BucketAggregate>,
    pub large10: Option<BucketAggregate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub point: TrialPoint,
    pub trial: usize,
    pub resample: usize,
    /// Graph seed; anchors derive from it together with `k` and `resample`.
    pub seed: u64,
    pub metrics: Option<TrialMetrics>,
    pub failure: Option<String>,
    pub wall_time_ms: Option<f64>,
}

/// Measures a fully specified observation table.
pub fn measure(table: &ObservationTable) -> TrialMetrics {
    let fibers = fiber_stats(table);
    let diagnostics = bucket_diagnostics(table);
    let bounds = refined_image_bound_with(table, table.codes(), &diagnostics);
    let all = diagnostics.all;
    TrialMetrics {
        image_size: fibers.image_size,
        error: fibers.error,
        image_frac: fibers.success,
        mean_preimage: fibers.vertex_mean_preimage,
        singleton_frac: fibers.singleton_fraction,
        codebook_size: bounds.codebook_size,
        profile_count: bounds.profile_count,
        singleton_bucket_frac: diagnostics.singleton_bucket_fraction,
        weighted_collision: all.map(|a| a.weighted_collision),
        median_code_ratio: all.map(|a| a.median_code_ratio),
        q90_balance: all.map(|a| a.q90_balance),
        generic_bound: bounds.generic_bound,
        refined_bound: bounds.refined_bound,
        bounds_ok: bounds.all_ok() && diagnostics.refined_inequality_holds(),
        large3: diagnostics.large3,
        large10: diagnostics.large10,
    }
}

/// A sampled graph with its spectral embedding, shared by every
/// configuration evaluated on it.
pub struct GraphInstance {
    pub graph: Graph,
    pub seed: u64,
    embedding: Option<EnergyEmbedding>,
}

impl GraphInstance {
    /// Wraps a graph, computing an energy embedding with `m_max` columns
    /// when `m_max > 0`.
    pub fn new(graph: Graph, seed: u64, m_max: usize, scaled: bool) -> Result<Self> {
        let embedding = if m_max > 0 {
            let op = normalized_laplacian(&graph)?;
            let basis = low_frequency_basis(&op, m_max, DEGENERACY_TOL)?;
            Some(energy_embedding(&basis, m_max, scaled)?)
        } else {
            None
        };
        Ok(GraphInstance {
            graph,
            seed,
            embedding,
        })
    }

    /// Samples the regular graph of a sweep cell.
    pub fn regular(n: usize, r: usize, seed: u64, m_max: usize, scaled: bool) -> Result<Self> {
        Self::new(random_regular(n, r, seed)?, seed, m_max, scaled)
    }

    /// Spectral codes for `m` columns. Returns the empty code table for
    /// `m = 0`.
    pub fn codes(&self, m: usize, quantizer: Quantizer, eta: f64) -> Result<QuantizedCodes> {
        if m == 0 {
            return Ok(QuantizedCodes::empty(self.graph.n()));
        }
        let emb = self
            .embedding
            .as_ref()
            .ok_or_else(|| Error::param("graph instance carries no spectral embedding"))?;
        quantize(&emb.truncate(m)?, quantizer, eta)
    }

    pub fn profiles(
        &self,
        k: usize,
        strategy: AnchorStrategy,
        resample: usize,
    ) -> Result<DistanceProfiles> {
        let anchors = select_anchors(
            &self.graph,
            k,
            strategy,
            anchor_seed(self.seed, k, resample),
        )?;
        anchor_profile(&self.graph, &anchors)
    }
}

/// Observation table for `point` on an instance, honoring the feature
/// selection.
pub fn observe(
    instance: &GraphInstance,
    point: &TrialPoint,
    resample: usize,
) -> Result<ObservationTable> {
    let n = instance.graph.n();
    let profiles = if point.feature.uses_distance() {
        instance.profiles(point.k, point.anchor_strategy, resample)?
    } else {
        DistanceProfiles::empty(n)
    };
    let codes = if point.feature.uses_spectral() {
        instance.codes(point.m, point.quantizer, point.eta.value())?
    } else {
        QuantizedCodes::empty(n)
    };
    ObservationTable::new(profiles, codes)
}

pub fn validate_point(point: &TrialPoint) -> Result<()> {
    if point.k > point.n {
        return Err(Error::param(format!(
            "k = {} exceeds n = {}",
            point.k, point.n
        )));
    }
    if point.m + 1 > point.n {
        return Err(Error::param(format!(
            "m = {} needs n > m, got n = {}",
            point.m, point.n
        )));
    }
    Ok(())
}

/// Runs one trial from scratch: samples the graph from `seed`, solves the
/// spectral problem, draws anchors and measures the observation map.
pub fn run_trial(point: &TrialPoint, trial: usize, resample: usize, seed: u64) -> TrialRecord {
    let started = Instant::now();
    let outcome = validate_point(point).and_then(|_| {
        let m_max = if point.feature.uses_spectral() {
            point.m
        } else {
            0
        };
        let instance = GraphInstance::regular(point.n, point.r, seed, m_max, point.scaled)?;
        let table = observe(&instance, point, resample)?;
        Ok(measure(&table))
    });
    finish(point.clone(), trial, resample, seed, outcome, started)
}

/// Evaluates one configuration on a fixed graph over `resamples` anchor
/// draws. Unlike a sweep, any failure aborts the analysis.
pub fn analyze_graph(
    instance: &GraphInstance,
    point: &TrialPoint,
    resamples: usize,
) -> Result<Vec<TrialRecord>> {
    if point.n != instance.graph.n() {
        return Err(Error::param(format!(
            "point has n = {} but the graph has {} vertices",
            point.n,
            instance.graph.n()
        )));
    }
    if point.feature.uses_distance() && point.k == 0 {
        return Err(Error::param("at least one anchor is required"));
    }
    if resamples == 0 {
        return Err(Error::param("resamples must be at least 1"));
    }
    validate_point(point)?;
    (0..resamples)
        .map(|resample| {
            let started = Instant::now();
            let table = observe(instance, point, resample)?;
            Ok(TrialRecord {
                point: point.clone(),
                trial: 0,
                resample,
                seed: instance.seed,
                metrics: Some(measure(&table)),
                failure: None,
                wall_time_ms: Some(started.elapsed().as_secs_f64() * 1e3),
            })
        })
        .collect()
}

/// Same as [`run_trial`] with the seed derived from the sweep's master seed.
pub fn run_trial_from_master(
    point: &TrialPoint,
    master: u64,
    trial: usize,
    resample: usize,
) -> TrialRecord {
    run_trial(
        point,
        trial,
        resample,
        graph_seed(master, point.n, point.r, trial),
    )
}

pub(crate) fn finish(
    point: TrialPoint,
    trial: usize,
    resample: usize,
    seed: u64,
    outcome: Result<TrialMetrics>,
    started: Instant,
) -> TrialRecord {
    let elapsed = started.elapsed().as_secs_f64() * 1e3;
    match outcome {
        Ok(metrics) => TrialRecord {
            point,
            trial,
            resample,
            seed,
            metrics: Some(metrics),
            failure: None,
            wall_time_ms: Some(elapsed),
        },
        Err(err) => failure_record(point, trial, resample, seed, &err),
    }
}

/// Error row for `point`; the message carries the configuration context.
pub(crate) fn failure_record(
    point: TrialPoint,
    trial: usize,
    resample: usize,
    seed: u64,
    err: &Error,
) -> TrialRecord {
    let message = format!(
        "n={} k={} m={} eta={} trial={trial} resample={resample}: {err}",
        point.n, point.k, point.m, point.eta
    );
    log::warn!("{message}");
    TrialRecord {
        point,
        trial,
        resample,
        seed,
        metrics: None,
        failure: Some(message),
        wall_time_ms: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(feature: Feature, k: usize, m: usize) -> TrialPoint {
        TrialPoint {
            n: 200,
            r: 3,
            k,
            m,
            eta: "0.1".parse().unwrap(),
            quantizer: Quantizer::Relative,
            scaled: true,
            feature,
            anchor_strategy: AnchorStrategy::Random,
        }
    }

    #[test]
    fn eta_keeps_text() {
        let e: Eta = "0.10".parse().unwrap();
        assert_eq!(e.to_string(), "0.10");
        assert_eq!(e.value(), 0.1);
        assert!("0".parse::<Eta>().is_err());
        assert!("x".parse::<Eta>().is_err());
        let small: Eta = "5e-4".parse().unwrap();
        assert!(small < e);
    }

    #[test]
    fn nope_has_single_code() {
        let rec = run_trial(&point(Feature::Nope, 3, 2), 0, 0, 5);
        let m = rec.metrics.unwrap();
        assert_eq!(m.image_size, 1);
        assert!((m.error - (1.0 - 1.0 / 200.0)).abs() < 1e-15);
    }

    #[test]
    fn full_with_m0_equals_distance() {
        let full = run_trial(&point(Feature::Full, 4, 0), 0, 0, 9)
            .metrics
            .unwrap();
        let dist = run_trial(&point(Feature::Distance, 4, 0), 0, 0, 9)
            .metrics
            .unwrap();
        assert_eq!(full, dist);
    }

    #[test]
    fn error_is_one_minus_image_fraction() {
        for feature in [
            Feature::Nope,
            Feature::Distance,
            Feature::Spectral,
            Feature::Full,
        ] {
            let m = run_trial(&point(feature, 2, 3), 1, 2, 77).metrics.unwrap();
            assert_eq!(m.error, 1.0 - m.image_frac);
            assert!(m.bounds_ok);
        }
    }

    #[test]
    fn invalid_point_becomes_failure_record() {
        let mut p = point(Feature::Full, 300, 2);
        let rec = run_trial(&p, 0, 0, 1);
        assert!(rec.metrics.is_none());
        assert!(rec.failure.unwrap().contains("exceeds"));
        p.k = 2;
        p.r = 2;
        assert!(run_trial(&p, 0, 0, 1).failure.is_some());
    }

    #[test]
    fn deterministic_for_seed() {
        let p = point(Feature::Full, 2, 2);
        let a = run_trial(&p, 0, 3, 123).metrics;
        let b = run_trial(&p, 0, 3, 123).metrics;
        assert_eq!(a, b);
    }
}
