use anchorcode::harness::{
    k_emp, read_csv_from, run_sweep, run_sweep_with_jobs, run_trial, write_csv, write_csv_to, Eta,
    Feature, SweepConfig, SweepResult, CSV_HEADER,
};
use anchorcode::spectral::Quantizer;

fn etas(list: &[&str]) -> Vec<Eta> {
    list.iter().map(|e| e.parse().unwrap()).collect()
}

fn csv_bytes(result: &SweepResult) -> Vec<u8> {
    let mut buf = Vec::new();
    write_csv_to(result, &mut buf).unwrap();
    buf
}

fn small_config() -> SweepConfig {
    let mut cfg = SweepConfig::new(vec![80, 150], vec![1, 3], vec![0, 2], etas(&["0.5", "0.1"]));
    cfg.trials = 2;
    cfg.anchor_resamples = 2;
    cfg.seed = 99;
    cfg
}

#[test]
fn csv_is_byte_identical_across_runs_and_worker_counts() {
    let cfg = small_config();
    let a = csv_bytes(&run_sweep_with_jobs(&cfg, Some(1)).unwrap());
    let b = csv_bytes(&run_sweep_with_jobs(&cfg, Some(3)).unwrap());
    let c = csv_bytes(&run_sweep(&cfg).unwrap());
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_eq!(
        String::from_utf8(a).unwrap().lines().count(),
        1 + 2 * 2 * 2 * 2 * 2 * 2
    );
}

#[test]
fn csv_file_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let result = run_sweep(&small_config()).unwrap();
    write_csv(&result, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with(&CSV_HEADER.join(",")));
    let back = read_csv_from(text.as_bytes()).unwrap();
    assert_eq!(csv_bytes(&back), text.as_bytes());
    for (x, y) in back.records.iter().zip(&result.records) {
        let (mx, my) = (x.metrics.as_ref().unwrap(), y.metrics.as_ref().unwrap());
        assert_eq!(mx.error.to_bits(), my.error.to_bits());
        assert_eq!(mx.image_size, my.image_size);
    }
}

#[test]
fn two_trials_give_two_rows() {
    let mut cfg = SweepConfig::new(vec![100], vec![2], vec![1], etas(&["0.2"]));
    cfg.trials = 2;
    let text = String::from_utf8(csv_bytes(&run_sweep(&cfg).unwrap())).unwrap();
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn unwritable_path_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = write_csv(
        &SweepResult::default(),
        &dir.path().join("missing/dir/out.csv"),
    )
    .unwrap_err();
    assert!(!err.is_parameter());
}

#[test]
fn rows_match_isolated_trials() {
    let cfg = small_config();
    let result = run_sweep(&cfg).unwrap();
    for rec in result.records.iter().filter(|r| r.point.n == 80) {
        let single = run_trial(&rec.point, rec.trial, rec.resample, rec.seed);
        assert_eq!(single.metrics, rec.metrics);
    }
}

#[test]
fn failed_rows_keep_the_schema() {
    let mut cfg = SweepConfig::new(vec![9, 30], vec![2, 40], vec![1], etas(&["0.3"]));
    cfg.quantizer = Quantizer::Absolute;
    let result = run_sweep(&cfg).unwrap();
    // n = 9 is odd for r = 3; k = 40 exceeds n = 30
    assert_eq!(result.records.len(), 4);
    assert_eq!(result.failed_count(), 3);
    let text = String::from_utf8(csv_bytes(&result)).unwrap();
    for line in text.lines().skip(1) {
        assert_eq!(line.split(',').count(), CSV_HEADER.len());
    }
    let failed: Vec<&str> = text
        .lines()
        .skip(1)
        .filter(|l| l.contains(",error,"))
        .collect();
    assert_eq!(failed.len(), 3);
    assert!(failed.iter().all(|l| l.contains(",n/a,")));
}

#[test]
fn every_row_satisfies_identity_and_bounds() {
    let mut cfg = small_config();
    for feature in [
        Feature::Nope,
        Feature::Distance,
        Feature::Spectral,
        Feature::Full,
    ] {
        cfg.feature = feature;
        for rec in run_sweep(&cfg).unwrap().records {
            let m = rec.metrics.unwrap();
            assert_eq!(m.error, 1.0 - m.image_frac);
            assert!(m.bounds_ok);
            if feature == Feature::Nope {
                assert_eq!(m.image_size, 1);
            }
        }
    }
}

#[test]
fn error_is_nearly_monotone_in_k_and_kemp_is_consistent() {
    let mut cfg = SweepConfig::new(
        vec![300],
        vec![1, 2, 3, 4, 6, 8],
        vec![0, 2],
        etas(&["0.1"]),
    );
    cfg.trials = 20;
    cfg.seed = 5;
    let result = run_sweep(&cfg).unwrap();
    for m in [0, 2] {
        let curve: Vec<(usize, f64)> = result
            .aggregates
            .iter()
            .filter(|(p, _)| p.m == m)
            .map(|(p, a)| (p.k, a.error.unwrap().mean))
            .collect();
        for w in curve.windows(2) {
            assert!(w[1].1 <= w[0].1 + 0.05, "m={m}: {curve:?}");
        }
        let kstar = k_emp(&result, 300, m, 0.1, 0.1)
            .unwrap()
            .expect("threshold reached");
        for &(k, e) in &curve {
            if k < kstar {
                assert!(e > 0.1);
            }
        }
    }
}
