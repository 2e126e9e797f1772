use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::sweep::SweepResult;
use super::trial::{TrialMetrics, TrialPoint, TrialRecord};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 26] = [
    "n",
    "r",
    "k",
    "m",
    "eta",
    "quantizer",
    "scaled",
    "feature",
    "anchor_strategy",
    "trial",
    "resample",
    "seed",
    "error",
    "image_frac",
    "mean_preimage",
    "singleton_frac",
    "codebook_size",
    "profile_count",
    "singleton_bucket_frac",
    "weighted_collision",
    "median_code_ratio",
    "q90_balance",
    "generic_bound",
    "refined_bound",
    "bounds_ok",
    "wall_time_ms",
];

const NA: &str = "n/a";
const FAILED: &str = "error";

/// C `%.17g`: 17 significant digits, trailing zeros removed, exponent form
/// below `1e-4` and from `1e17` on.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!(
            "{}e{}{:02}",
            trim_zeros(mantissa.to_owned()),
            sign,
            exp.abs()
        )
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_owned()
}

fn opt_float(x: Option<f64>) -> String {
    x.map_or_else(|| NA.to_owned(), format_float)
}

fn row(rec: &TrialRecord) -> Vec<String> {
    let p = &rec.point;
    let mut cells = vec![
        p.n.to_string(),
        p.r.to_string(),
        p.k.to_string(),
        p.m.to_string(),
        p.eta.to_string(),
        p.quantizer.to_string(),
        p.scaled.to_string(),
        p.feature.to_string(),
        p.anchor_strategy.to_string(),
        rec.trial.to_string(),
        rec.resample.to_string(),
        rec.seed.to_string(),
    ];
    match &rec.metrics {
        Some(m) => cells.extend([
            format_float(m.error),
            format_float(m.image_frac),
            format_float(m.mean_preimage),
            format_float(m.singleton_frac),
            m.codebook_size.to_string(),
            m.profile_count.to_string(),
            format_float(m.singleton_bucket_frac),
            opt_float(m.weighted_collision),
            opt_float(m.median_code_ratio),
            opt_float(m.q90_balance),
            m.generic_bound.to_string(),
            opt_float(m.refined_bound),
            m.bounds_ok.to_string(),
        ]),
        None => {
            cells.extend(std::iter::repeat_n(NA.to_owned(), 12));
            cells.push(FAILED.to_owned());
        }
    }
    cells.push(opt_float(rec.wall_time_ms));
    cells
}

/// Header plus one row per record, in the result's order.
pub fn write_csv_to<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for rec in &result.records {
        w.write_record(row(rec))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let file = File::create(path)
        .map_err(|e| Error::from(e).context(format!("cannot create {}", path.display())))?;
    write_csv_to(result, BufWriter::new(file))
}

pub fn read_csv(path: &Path) -> Result<SweepResult> {
    let file = File::open(path)
        .map_err(|e| Error::from(e).context(format!("cannot open {}", path.display())))?;
    read_csv_from(file)
}

/// Parses a sweep CSV. Failed rows come back without metrics; columns that
/// the schema does not carry (large-bucket aggregates) are left empty.
pub fn read_csv_from<R: Read>(input: R) -> Result<SweepResult> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Csv("header does not match the sweep schema".into()));
    }
    let mut records = Vec::new();
    for (i, line) in reader.records().enumerate() {
        let line = line?;
        records.push(parse_row(&line).map_err(|e| Error::Csv(format!("data row {}: {e}", i + 1)))?);
    }
    if records.is_empty() {
        return Err(Error::Csv("no data rows".into()));
    }
    Ok(SweepResult::from_records(records))
}

fn parse_row(line: &csv::StringRecord) -> std::result::Result<TrialRecord, String> {
    let cell = |i: usize| {
        line.get(i)
            .ok_or_else(|| format!("missing column {}", CSV_HEADER[i]))
    };
    fn parse<T: std::str::FromStr>(name: &str, s: &str) -> std::result::Result<T, String> {
        s.parse().map_err(|_| format!("bad {name} '{s}'"))
    }
    let get = |i: usize| -> std::result::Result<&str, String> { cell(i) };
    let num = |i: usize| -> std::result::Result<usize, String> { parse(CSV_HEADER[i], get(i)?) };
    let float = |i: usize| -> std::result::Result<f64, String> { parse(CSV_HEADER[i], get(i)?) };
    let opt = |i: usize| -> std::result::Result<Option<f64>, String> {
        match get(i)? {
            NA => Ok(None),
            s => parse(CSV_HEADER[i], s).map(Some),
        }
    };
    let point = TrialPoint {
        n: num(0)?,
        r: num(1)?,
        k: num(2)?,
        m: num(3)?,
        eta: get(4)?.parse().map_err(|e: Error| e.to_string())?,
        quantizer: get(5)?.parse().map_err(|e: Error| e.to_string())?,
        scaled: parse("scaled", get(6)?)?,
        feature: get(7)?.parse().map_err(|e: Error| e.to_string())?,
        anchor_strategy: get(8)?.parse().map_err(|e: Error| e.to_string())?,
    };
    let metrics = match get(24)? {
        FAILED => None,
        ok => {
            let image_frac = float(13)?;
            Some(TrialMetrics {
                image_size: (image_frac * point.n as f64).round() as usize,
                error: float(12)?,
                image_frac,
                mean_preimage: float(14)?,
                singleton_frac: float(15)?,
                codebook_size: num(16)?,
                profile_count: num(17)?,
                singleton_bucket_frac: float(18)?,
                weighted_collision: opt(19)?,
                median_code_ratio: opt(20)?,
                q90_balance: opt(21)?,
                generic_bound: num(22)?,
                refined_bound: opt(23)?,
                bounds_ok: parse("bounds_ok", ok)?,
                large3: None,
                large10: None,
            })
        }
    };
    Ok(TrialRecord {
        failure: metrics
            .is_none()
            .then(|| "failed in the recorded sweep".to_owned()),
        point,
        trial: num(9)?,
        resample: num(10)?,
        seed: parse("seed", get(11)?)?,
        metrics,
        wall_time_ms: opt(25)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_matches_printf_g17() {
        let cases = [
            (0.1, "0.10000000000000001"),
            (1.0, "1"),
            (0.5, "0.5"),
            (1.0 - 1.0 / 3.0, "0.66666666666666674"),
            (1e-5, "1.0000000000000001e-05"),
            (123456.0, "123456"),
            (1e17, "1e+17"),
            (2.5e-4, "0.00025000000000000001"),
            (-3.25, "-3.25"),
            (0.0, "0"),
        ];
        for (x, expected) in cases {
            assert_eq!(format_float(x), expected, "{x}");
        }
    }

    #[test]
    fn floats_roundtrip() {
        for x in [0.1, 1.0 / 3.0, 0.992, 1e-300, 6.02e23, 0.5 - 1e-17] {
            assert_eq!(
                format_float(x).parse::<f64>().unwrap().to_bits(),
                x.to_bits()
            );
        }
    }

    #[test]
    fn empty_result_is_header_only() {
        let mut buf = Vec::new();
        write_csv_to(&SweepResult::default(), &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            format!("{}\r\n", CSV_HEADER.join(","))
        );
    }

    #[test]
    fn rejects_foreign_header() {
        assert!(read_csv_from("a,b\n1,2\n".as_bytes()).is_err());
        let header_only = format!("{}\n", CSV_HEADER.join(","));
        assert!(read_csv_from(header_only.as_bytes()).is_err());
    }
}
