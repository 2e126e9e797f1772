use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Deserialize;

use super::anchors::AnchorStrategy;
use super::seed::graph_seed;
use super::trial::{
    failure_record, finish, measure, validate_point, Eta, Feature, GraphInstance, TrialPoint,
    TrialRecord,
};
use crate::error::{Error, Result};
use crate::graph::DistanceProfiles;
use crate::observation::ObservationTable;
use crate::spectral::{QuantizedCodes, Quantizer};
use crate::theory::{rho_eng, BudgetInputs};

/// Grid, replication counts and fixed settings of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub n_list: Vec<usize>,
    pub k_list: Vec<usize>,
    pub m_list: Vec<usize>,
    pub eta_list: Vec<Eta>,
    /// Graphs per `n`.
    pub trials: usize,
    /// Anchor draws per graph and `k`.
    pub anchor_resamples: usize,
    pub r: usize,
    pub quantizer: Quantizer,
    pub scaled: bool,
    pub feature: Feature,
    pub anchor_strategy: AnchorStrategy,
    pub seed: u64,
    pub error_threshold: f64,
    /// Record per-row wall time. Off by default since timings make the CSV
    /// irreproducible.
    pub timing: bool,
}

impl SweepConfig {
    /// A one-trial, one-resample config with default settings.
    pub fn new(
        n_list: Vec<usize>,
        k_list: Vec<usize>,
        m_list: Vec<usize>,
        eta_list: Vec<Eta>,
    ) -> Self {
        SweepConfig {
            n_list,
            k_list,
            m_list,
            eta_list,
            trials: 1,
            anchor_resamples: 1,
            r: 3,
            quantizer: Quantizer::Relative,
            scaled: true,
            feature: Feature::Full,
            anchor_strategy: AnchorStrategy::Random,
            seed: 0,
            error_threshold: 0.1,
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, empty) in [
            ("n_list", self.n_list.is_empty()),
            ("k_list", self.k_list.is_empty()),
            ("m_list", self.m_list.is_empty()),
            ("eta_list", self.eta_list.is_empty()),
        ] {
            if empty {
                return Err(Error::param(format!("{name} must not be empty")));
            }
        }
        if self.trials == 0 || self.anchor_resamples == 0 {
            return Err(Error::param(
                "trials and anchor_resamples must be at least 1",
            ));
        }
        if !(self.error_threshold > 0.0 && self.error_threshold < 1.0) {
            return Err(Error::param(format!(
                "error_threshold must lie in (0, 1), got {}",
                self.error_threshold
            )));
        }
        Ok(())
    }

    /// Parses the TOML form; see the README for the recognized keys.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::param(format!("sweep config: {e}")))?;
        let eta_list = raw
            .eta_list
            .into_iter()
            .map(|e| match e {
                RawEta::Text(s) => s.parse(),
                RawEta::Number(x) => x.to_string().parse(),
            })
            .collect::<Result<Vec<Eta>>>()?;
        let defaults = SweepConfig::new(Vec::new(), Vec::new(), Vec::new(), Vec::new());
        let cfg = SweepConfig {
            n_list: raw.n_list,
            k_list: raw.k_list,
            m_list: raw.m_list,
            eta_list,
            trials: raw.trials,
            anchor_resamples: raw.anchor_resamples.unwrap_or(defaults.anchor_resamples),
            r: raw.r.unwrap_or(defaults.r),
            quantizer: raw.quantizer.unwrap_or(defaults.quantizer),
            scaled: raw.scaled.unwrap_or(defaults.scaled),
            feature: raw.feature.unwrap_or(defaults.feature),
            anchor_strategy: raw.anchor_strategy.unwrap_or(defaults.anchor_strategy),
            seed: raw.seed.unwrap_or(defaults.seed),
            error_threshold: raw.error_threshold.unwrap_or(defaults.error_threshold),
            timing: raw.timing.unwrap_or(defaults.timing),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    /// Every grid point, in output order.
    pub fn points(&self) -> Vec<TrialPoint> {
        let mut points = Vec::new();
        for &n in &self.n_list {
            for &k in &self.k_list {
                for &m in &self.m_list {
                    for eta in &self.eta_list {
                        points.push(TrialPoint {
                            n,
                            r: self.r,
                            k,
                            m,
                            eta: eta.clone(),
                            quantizer: self.quantizer,
                            scaled: self.scaled,
                            feature: self.feature,
                            anchor_strategy: self.anchor_strategy,
                        });
                    }
                }
            }
        }
        points.sort();
        points.dedup();
        points
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n_list: Vec<usize>,
    k_list: Vec<usize>,
    m_list: Vec<usize>,
    eta_list: Vec<RawEta>,
    trials: usize,
    anchor_resamples: Option<usize>,
    r: Option<usize>,
    quantizer: Option<Quantizer>,
    scaled: Option<bool>,
    feature: Option<Feature>,
    anchor_strategy: Option<AnchorStrategy>,
    seed: Option<u64>,
    error_threshold: Option<f64>,
    timing: Option<bool>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawEta {
    Text(String),
    Number(f64),
}

/// Mean and sample standard deviation of one metric over a point's rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSummary {
    pub count: usize,
    pub mean: f64,
    /// Zero for a single observation.
    pub stdev: f64,
}

impl MetricSummary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let count = values.len();
        let mean = values.iter().sum::<f64>() / count as f64;
        let stdev = if count > 1 {
            let ss: f64 = values.iter().map(|x| (x - mean).powi(2)).sum();
            (ss / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(MetricSummary { count, mean, stdev })
    }
}

/// Aggregates of one grid point. Metric summaries run over successful rows
/// only; `weighted_collision` further skips rows without non-singleton
/// buckets.
#[derive(Debug, Clone, PartialEq)]
pub struct PointAggregate {
    /// Rows recorded for the point, failed ones included.
    pub count: usize,
    pub failed: usize,
    pub error: Option<MetricSummary>,
    pub image_frac: Option<MetricSummary>,
    pub mean_preimage: Option<MetricSummary>,
    pub singleton_frac: Option<MetricSummary>,
    pub codebook_size: Option<MetricSummary>,
    pub profile_count: Option<MetricSummary>,
    pub weighted_collision: Option<MetricSummary>,
    pub bounds_ok: bool,
}

impl PointAggregate {
    fn of(records: &[&TrialRecord]) -> Self {
        let ok: Vec<_> = records.iter().filter_map(|r| r.metrics.as_ref()).collect();
        let summary = |f: &dyn Fn(&super::trial::TrialMetrics) -> Option<f64>| {
            MetricSummary::of(&ok.iter().filter_map(|m| f(m)).collect::<Vec<_>>())
        };
        PointAggregate {
            count: records.len(),
            failed: records.len() - ok.len(),
            error: summary(&|m| Some(m.error)),
            image_frac: summary(&|m| Some(m.image_frac)),
            mean_preimage: summary(&|m| Some(m.mean_preimage)),
            singleton_frac: summary(&|m| Some(m.singleton_frac)),
            codebook_size: summary(&|m| Some(m.codebook_size as f64)),
            profile_count: summary(&|m| Some(m.profile_count as f64)),
            weighted_collision: summary(&|m| m.weighted_collision),
            bounds_ok: ok.iter().all(|m| m.bounds_ok),
        }
    }

    /// Mean error when every row succeeded.
    pub fn complete_mean_error(&self) -> Option<f64> {
        (self.failed == 0).then_some(self.error?.mean)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    /// Sorted by point, then trial, then resample.
    pub records: Vec<TrialRecord>,
    pub aggregates: BTreeMap<TrialPoint, PointAggregate>,
}

impl SweepResult {
    pub fn from_records(mut records: Vec<TrialRecord>) -> Self {
        records
            .sort_by(|a, b| (&a.point, a.trial, a.resample).cmp(&(&b.point, b.trial, b.resample)));
        let mut groups: BTreeMap<&TrialPoint, Vec<&TrialRecord>> = BTreeMap::new();
        for r in &records {
            groups.entry(&r.point).or_default().push(r);
        }
        let aggregates = groups
            .into_iter()
            .map(|(p, rs)| (p.clone(), PointAggregate::of(&rs)))
            .collect();
        SweepResult {
            records,
            aggregates,
        }
    }

    pub fn failed_count(&self) -> usize {
        self.records.iter().filter(|r| r.metrics.is_none()).count()
    }

    /// Aggregate of the unique point matching the given coordinates.
    pub fn aggregate(&self, n: usize, k: usize, m: usize, eta: f64) -> Option<&PointAggregate> {
        let mut hits = self
            .aggregates
            .iter()
            .filter(|(p, _)| p.n == n && p.k == k && p.m == m && p.eta.value() == eta);
        let first = hits.next()?.1;
        hits.next().is_none().then_some(first)
    }
}

/// Runs a sweep on the global rayon pool.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let points = cfg.points();
    let jobs: Vec<(usize, usize)> = cfg
        .n_list
        .iter()
        .copied()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .flat_map(|n| (0..cfg.trials).map(move |t| (n, t)))
        .collect();
    let total = jobs.len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let records: Vec<TrialRecord> = jobs
        .par_iter()
        .flat_map_iter(|&(n, trial)| {
            let at_n: Vec<&TrialPoint> = points.iter().filter(|p| p.n == n).collect();
            let rows = run_graph(cfg, &at_n, n, trial);
            let finished = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
            log::info!("graph {finished}/{total} done (n={n}, trial={trial})");
            rows
        })
        .collect();
    Ok(SweepResult::from_records(records))
}

/// Runs a sweep on a dedicated pool of `jobs` workers, or the global pool
/// when `jobs` is `None`.
pub fn run_sweep_with_jobs(cfg: &SweepConfig, jobs: Option<usize>) -> Result<SweepResult> {
    match jobs {
        None => run_sweep(cfg),
        Some(0) => Err(Error::param("worker count must be at least 1")),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build()
                .map_err(|e| Error::param(format!("cannot start worker pool: {e}")))?;
            pool.install(|| run_sweep(cfg))
        }
    }
}

/// All rows of one sampled graph.
fn run_graph(
    cfg: &SweepConfig,
    points: &[&TrialPoint],
    n: usize,
    trial: usize,
) -> Vec<TrialRecord> {
    let seed = graph_seed(cfg.seed, n, cfg.r, trial);
    let m_max = if cfg.feature.uses_spectral() {
        points
            .iter()
            .map(|p| p.m)
            .filter(|&m| m < n)
            .max()
            .unwrap_or(0)
    } else {
        0
    };
    let instance = match GraphInstance::regular(n, cfg.r, seed, m_max, cfg.scaled) {
        Ok(instance) => instance,
        Err(err) => {
            return points
                .iter()
                .flat_map(|p| (0..cfg.anchor_resamples).map(move |s| (*p, s)))
                .map(|(p, s)| failure_record(p.clone(), trial, s, seed, &err))
                .collect();
        }
    };
    let draws: Vec<(usize, usize)> = cfg
        .k_list
        .iter()
        .copied()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .flat_map(|k| (0..cfg.anchor_resamples).map(move |s| (k, s)))
        .collect();
    draws
        .par_iter()
        .flat_map_iter(|&(k, resample)| {
            let profiles = if cfg.feature.uses_distance() && k <= n {
                instance.profiles(k, cfg.anchor_strategy, resample)
            } else {
                Ok(DistanceProfiles::empty(n))
            };
            points
                .iter()
                .filter(|p| p.k == k)
                .map(|p| evaluate(cfg, &instance, p, trial, resample, &profiles))
                .collect::<Vec<_>>()
        })
        .collect()
}

fn evaluate(
    cfg: &SweepConfig,
    instance: &GraphInstance,
    point: &TrialPoint,
    trial: usize,
    resample: usize,
    profiles: &Result<DistanceProfiles>,
) -> TrialRecord {
    let started = Instant::now();
    if let Err(err) = validate_point(point) {
        return failure_record(point.clone(), trial, resample, instance.seed, &err);
    }
    let profiles = match profiles {
        Ok(p) => p.clone(),
        Err(err) => return failure_record(point.clone(), trial, resample, instance.seed, err),
    };
    let outcome = (|| {
        let codes = if point.feature.uses_spectral() {
            instance.codes(point.m, point.quantizer, point.eta.value())?
        } else {
            QuantizedCodes::empty(instance.graph.n())
        };
        Ok(measure(&ObservationTable::new(profiles, codes)?))
    })();
    let mut record = finish(
        point.clone(),
        trial,
        resample,
        instance.seed,
        outcome,
        started,
    );
    if !cfg.timing {
        record.wall_time_ms = None;
    }
    record
}

/// Smallest `k` of the swept grid at `(n, m, eta)` whose mean error is at
/// most `threshold`; `None` when no tested `k` qualifies.
pub fn k_emp(
    result: &SweepResult,
    n: usize,
    m: usize,
    eta: f64,
    threshold: f64,
) -> Result<Option<usize>> {
    check_threshold(threshold)?;
    let curve = error_curve(result, |p| p.n == n && p.m == m && p.eta.value() == eta)?
        .ok_or_else(|| Error::param(format!("sweep has no rows at n={n}, m={m}, eta={eta}")))?;
    Ok(first_below(&curve, threshold))
}

fn check_threshold(threshold: f64) -> Result<()> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::param(format!(
            "threshold must lie in (0, 1], got {threshold}"
        )));
    }
    Ok(())
}

/// `(k, mean error)` over the points selected by `keep`, sorted by `k`.
/// Errors if some selected point has failed rows or `k` repeats, i.e. the
/// selection spans more than one curve.
fn error_curve(
    result: &SweepResult,
    keep: impl Fn(&TrialPoint) -> bool,
) -> Result<Option<Vec<(usize, f64)>>> {
    let mut curve = Vec::new();
    for (p, agg) in result.aggregates.iter().filter(|(p, _)| keep(p)) {
        let mean = agg.complete_mean_error().ok_or_else(|| {
            Error::param(format!(
                "point n={} k={} m={} eta={} has failed trials",
                p.n, p.k, p.m, p.eta
            ))
        })?;
        curve.push((p.k, mean));
    }
    if curve.is_empty() {
        return Ok(None);
    }
    curve.sort_by_key(|&(k, _)| k);
    if curve.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::param("selection mixes several configurations per k"));
    }
    Ok(Some(curve))
}

fn first_below(curve: &[(usize, f64)], threshold: f64) -> Option<usize> {
    curve
        .iter()
        .find(|&&(_, e)| e <= threshold)
        .map(|&(k, _)| k)
}

/// One row of the threshold table: a `k` curve and its statistics at
/// `k_emp`.
#[derive(Debug, Clone, PartialEq)]
pub struct KempRow {
    pub n: usize,
    pub r: usize,
    pub m: usize,
    pub eta: Eta,
    pub quantizer: Quantizer,
    pub scaled: bool,
    pub feature: Feature,
    pub anchor_strategy: AnchorStrategy,
    pub k_emp: Option<usize>,
    /// `None` also when `n < 16`.
    pub rho_eng: Option<f64>,
    pub mean_image_frac: Option<f64>,
    pub mean_preimage: Option<f64>,
    pub mean_codebook: Option<f64>,
}

/// `k_emp` for every `k` curve of the sweep, in point order.
pub fn kemp_table(result: &SweepResult, threshold: f64) -> Result<Vec<KempRow>> {
    check_threshold(threshold)?;
    let mut curves: BTreeMap<TrialPoint, ()> = BTreeMap::new();
    for p in result.aggregates.keys() {
        curves.insert(TrialPoint { k: 0, ..p.clone() }, ());
    }
    let mut rows = Vec::new();
    for key in curves.keys() {
        let same = |p: &TrialPoint| TrialPoint { k: 0, ..p.clone() } == *key;
        let curve = error_curve(result, same)?.expect("key comes from an aggregate");
        let k_emp = first_below(&curve, threshold);
        let at = k_emp.map(|k| &result.aggregates[&TrialPoint { k, ..key.clone() }]);
        let rho = k_emp.and_then(|k| {
            BudgetInputs::new(key.n, k, key.m, key.eta.value())
                .ok()
                .map(|b| rho_eng(&b))
        });
        rows.push(KempRow {
            n: key.n,
            r: key.r,
            m: key.m,
            eta: key.eta.clone(),
            quantizer: key.quantizer,
            scaled: key.scaled,
            feature: key.feature,
            anchor_strategy: key.anchor_strategy,
            k_emp,
            rho_eng: rho,
            mean_image_frac: at.and_then(|a| a.image_frac).map(|s| s.mean),
            mean_preimage: at.and_then(|a| a.mean_preimage).map(|s| s.mean),
            mean_codebook: at.and_then(|a| a.codebook_size).map(|s| s.mean),
        });
    }
    Ok(rows)
}
