//! Trials, sweeps and their CSV form.
//!
//! A sweep evaluates every point of a `(n, k, m, eta)` grid on `trials`
//! sampled graphs and `anchor_resamples` anchor draws per graph. Graph
//! sampling and the eigensolve happen once per `(n, trial)` and are shared
//! by every point of the grid; see [`seed`] for how randomness is derived.

mod anchors;
mod csv;
pub mod seed;
mod sweep;
mod trial;

pub use self::csv::{format_float, read_csv, read_csv_from, write_csv, write_csv_to, CSV_HEADER};
pub use anchors::{farthest_point, select_anchors, AnchorStrategy};
pub use sweep::{
    k_emp, kemp_table, run_sweep, run_sweep_with_jobs, KempRow, MetricSummary, PointAggregate,
    SweepConfig, SweepResult,
};
pub use trial::{
    analyze_graph, measure, observe, run_trial, run_trial_from_master, validate_point, Eta,
    Feature, GraphInstance, TrialMetrics, TrialPoint, TrialRecord,
};
