use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::embedding::EnergyEmbedding;
use crate::error::{Error, Result};

/// Coordinatewise quantization rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantizer {
    /// `floor(x / eta)`: fixed step `eta`.
    Absolute,
    /// `round(x / delta)` with `delta = eta * max |x|` over the whole matrix.
    Relative,
}

impl fmt::Display for Quantizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantizer::Absolute => "absolute",
            Quantizer::Relative => "relative",
        })
    }
}

impl FromStr for Quantizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "absolute" | "abs" => Ok(Quantizer::Absolute),
            "relative" | "rel" => Ok(Quantizer::Relative),
            other => Err(Error::param(format!("unknown quantizer '{other}'"))),
        }
    }
}

/// Integer bin indices of a quantized embedding, row-major `n x m`.
///
/// Codes are compared as integers only; the representative value of bin
/// `c` is `c * delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedCodes {
    n: usize,
    m: usize,
    codes: Vec<i64>,
    rule: Quantizer,
    eta: f64,
    delta: f64,
}

impl QuantizedCodes {
    /// Codes with no coordinates: every vertex gets the empty tuple.
    pub fn empty(n: usize) -> Self {
        QuantizedCodes {
            n,
            m: 0,
            codes: Vec::new(),
            rule: Quantizer::Absolute,
            eta: 1.0,
            delta: 1.0,
        }
    }

    /// Wraps precomputed bin indices.
    pub fn from_rows(n: usize, m: usize, codes: Vec<i64>) -> Result<Self> {
        if codes.len() != n * m {
            return Err(Error::param(format!(
                "code matrix has {} entries, expected {n} x {m}",
                codes.len()
            )));
        }
        Ok(QuantizedCodes {
            n,
            m,
            codes,
            rule: Quantizer::Absolute,
            eta: 1.0,
            delta: 1.0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn row(&self, v: usize) -> &[i64] {
        &self.codes[v * self.m..(v + 1) * self.m]
    }

    pub fn rule(&self) -> Quantizer {
        self.rule
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Effective bin width.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn representative(&self, v: usize, j: usize) -> f64 {
        self.row(v)[j] as f64 * self.delta
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!(
            "quantization step must be positive, got {eta}"
        )))
    }
}

pub fn quantize_absolute(emb: &EnergyEmbedding, eta: f64) -> Result<QuantizedCodes> {
    check_eta(eta)?;
    let codes = emb
        .values()
        .iter()
        .map(|&x| (x / eta).floor() as i64)
        .collect();
    Ok(QuantizedCodes {
        n: emb.n(),
        m: emb.m(),
        codes,
        rule: Quantizer::Absolute,
        eta,
        delta: eta,
    })
}

/// Relative rule. Ties round away from zero. An all-zero (or empty)
/// embedding maps every coordinate to bin 0 without dividing.
pub fn quantize_relative(emb: &EnergyEmbedding, eta: f64) -> Result<QuantizedCodes> {
    check_eta(eta)?;
    let max = emb.max_abs();
    let delta = eta * max;
    let codes = if max == 0.0 {
        vec![0; emb.values().len()]
    } else {
        emb.values()
            .iter()
            .map(|&x| (x / delta).round() as i64)
            .collect()
    };
    Ok(QuantizedCodes {
        n: emb.n(),
        m: emb.m(),
        codes,
        rule: Quantizer::Relative,
        eta,
        delta,
    })
}

pub fn quantize(emb: &EnergyEmbedding, rule: Quantizer, eta: f64) -> Result<QuantizedCodes> {
    match rule {
        Quantizer::Absolute => quantize_absolute(emb, eta),
        Quantizer::Relative => quantize_relative(emb, eta),
    }
}

/// Number of distinct code rows.
pub fn codebook_size(codes: &QuantizedCodes) -> usize {
    if codes.n == 0 {
        return 0;
    }
    (0..codes.n)
        .map(|v| codes.row(v))
        .collect::<HashSet<_>>()
        .len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column(values: &[f64]) -> EnergyEmbedding {
        EnergyEmbedding::from_rows(values.len(), 1, values.to_vec(), false).unwrap()
    }

    #[test]
    fn absolute_bins() {
        let q = quantize_absolute(&column(&[0.74]), 0.5).unwrap();
        assert_eq!(q.row(0), &[1]);
        assert_eq!(q.representative(0, 0), 0.5);
        let q = quantize_absolute(&column(&[0.9]), 1.5).unwrap();
        assert_eq!(q.row(0), &[0]);
    }

    #[test]
    fn absolute_bin_count_on_unit_interval() {
        for &eta in &[0.9, 0.5, 0.3, 0.25, 0.1, 0.07] {
            let grid: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
            let q = quantize_absolute(&column(&grid), eta).unwrap();
            let bins = codebook_size(&q) as f64;
            assert!(bins <= (1.0 / eta).floor() + 1.0);
            assert!(bins <= 2.0 / eta);
        }
    }

    #[test]
    fn relative_step_and_rounding() {
        let q = quantize_relative(&column(&[0.8, 0.2, 0.6, 0.0]), 0.5).unwrap();
        assert!((q.delta() - 0.4).abs() < 1e-15);
        assert_eq!(q.row(0), &[2]);
        // 0.2 / 0.4 = 0.5 rounds away from zero
        assert_eq!(q.row(1), &[1]);
        assert_eq!(q.row(3), &[0]);
    }

    #[test]
    fn relative_all_zero_embedding() {
        let q = quantize_relative(&column(&[0.0, 0.0, 0.0]), 0.1).unwrap();
        assert!((0..3).all(|v| q.row(v) == [0]));
        assert_eq!(codebook_size(&q), 1);
    }

    #[test]
    fn non_positive_eta_rejected() {
        let e = column(&[0.1]);
        assert!(quantize_absolute(&e, 0.0).is_err());
        assert!(quantize_relative(&e, -1.0).is_err());
        assert!(quantize_absolute(&e, f64::NAN).is_err());
    }

    #[test]
    fn empty_rows_form_a_single_code() {
        let e = EnergyEmbedding::from_rows(5, 0, vec![], true).unwrap();
        assert_eq!(codebook_size(&quantize_relative(&e, 0.1).unwrap()), 1);
        assert_eq!(codebook_size(&quantize_absolute(&e, 0.1).unwrap()), 1);
        assert_eq!(codebook_size(&QuantizedCodes::empty(7)), 1);
    }

    #[test]
    fn identical_rows_share_a_code() {
        let e =
            EnergyEmbedding::from_rows(3, 2, vec![0.3, 0.1, 0.3, 0.1, 0.3, 0.1], false).unwrap();
        assert_eq!(codebook_size(&quantize_absolute(&e, 0.05).unwrap()), 1);
    }

    #[test]
    fn quantizer_names_round_trip() {
        for q in [Quantizer::Absolute, Quantizer::Relative] {
            assert_eq!(q.to_string().parse::<Quantizer>().unwrap(), q);
        }
        assert!("exact".parse::<Quantizer>().is_err());
    }
}
