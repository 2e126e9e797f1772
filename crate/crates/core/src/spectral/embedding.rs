use super::eigen::SpectralBasis;
use crate::error::{Error, Result};

/// Row-major `n x m` energy signature: squared entries of the first `m`
/// non-trivial eigenvectors, multiplied by `n` when `scaled`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyEmbedding {
    n: usize,
    m: usize,
    values: Vec<f64>,
    scaled: bool,
}

impl EnergyEmbedding {
    pub fn from_rows(n: usize, m: usize, values: Vec<f64>, scaled: bool) -> Result<Self> {
        if values.len() != n * m {
            return Err(Error::param(format!(
                "embedding has {} values, expected {n} x {m}",
                values.len()
            )));
        }
        Ok(EnergyEmbedding {
            n,
            m,
            values,
            scaled,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_scaled(&self) -> bool {
        self.scaled
    }

    pub fn row(&self, v: usize) -> &[f64] {
        &self.values[v * self.m..(v + 1) * self.m]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    /// Leading `m` columns as a new embedding.
    pub fn truncate(&self, m: usize) -> Result<EnergyEmbedding> {
        if m > self.m {
            return Err(Error::param(format!(
                "cannot take {m} of {} columns",
                self.m
            )));
        }
        let values = (0..self.n)
            .flat_map(|v| self.row(v)[..m].iter().copied())
            .collect();
        Ok(EnergyEmbedding {
            n: self.n,
            m,
            values,
            scaled: self.scaled,
        })
    }
}

/// Energy signature from the non-trivial vectors `1..=m` of `basis`; the
/// trivial eigenvector is never used.
pub fn energy_embedding(basis: &SpectralBasis, m: usize, scaled: bool) -> Result<EnergyEmbedding> {
    if m > basis.nontrivial_count() {
        return Err(Error::param(format!(
            "basis holds {} non-trivial vectors, {m} requested",
            basis.nontrivial_count()
        )));
    }
    let n = basis.n();
    let factor = if scaled { n as f64 } else { 1.0 };
    let vectors = basis.vectors();
    let mut values = Vec::with_capacity(n * m);
    for v in 0..n {
        for j in 1..=m {
            let x = vectors[(v, j)];
            values.push(factor * (x * x));
        }
    }
    Ok(EnergyEmbedding {
        n,
        m,
        values,
        scaled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{random_regular, Graph};
    use crate::spectral::{low_frequency_basis, normalized_laplacian, DEGENERACY_TOL};

    fn basis_of(g: &Graph, m: usize) -> SpectralBasis {
        low_frequency_basis(&normalized_laplacian(g).unwrap(), m, DEGENERACY_TOL).unwrap()
    }

    #[test]
    fn single_edge_values() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let b = basis_of(&g, 1);
        let plain = energy_embedding(&b, 1, false).unwrap();
        let scaled = energy_embedding(&b, 1, true).unwrap();
        for v in 0..2 {
            assert!((plain.row(v)[0] - 0.5).abs() < 1e-15);
            assert!((scaled.row(v)[0] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn columns_sum_to_one_and_stay_in_unit_interval() {
        let g = random_regular(120, 3, 3).unwrap();
        let e = energy_embedding(&basis_of(&g, 5), 5, false).unwrap();
        for j in 0..5 {
            let sum: f64 = (0..120).map(|v| e.row(v)[j]).sum();
            assert!((sum - 1.0).abs() < 1e-10);
        }
        assert!(e.values().iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn scaled_is_n_times_plain() {
        let g = random_regular(64, 3, 1).unwrap();
        let b = basis_of(&g, 3);
        let plain = energy_embedding(&b, 3, false).unwrap();
        let scaled = energy_embedding(&b, 3, true).unwrap();
        for (p, s) in plain.values().iter().zip(scaled.values()) {
            assert!((64.0 * p - s).abs() <= 1e-12 * s.abs().max(1.0));
        }
    }

    #[test]
    fn zero_dimensions_and_overrequest() {
        let g = random_regular(20, 3, 1).unwrap();
        let b = basis_of(&g, 2);
        let e = energy_embedding(&b, 0, true).unwrap();
        assert_eq!(e.m(), 0);
        assert!(e.row(3).is_empty());
        assert!(energy_embedding(&b, 3, false).is_err());
        assert_eq!(
            energy_embedding(&b, 2, false)
                .unwrap()
                .truncate(1)
                .unwrap()
                .m(),
            1
        );
    }
}
