use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Sparse symmetric normalized Laplacian `I - D^{-1/2} A D^{-1/2}`.
///
/// Stored in CSR form without the diagonal, which is identically 1.
#[derive(Debug, Clone)]
pub struct NormalizedLaplacian {
    offsets: Vec<usize>,
    columns: Vec<usize>,
    weights: Vec<f64>,
}

pub fn normalized_laplacian(g: &Graph) -> Result<NormalizedLaplacian> {
    let n = g.n();
    if let Some(v) = (0..n).find(|&v| g.degree(v) == 0) {
        return Err(Error::param(format!("vertex {v} is isolated")));
    }
    let inv_sqrt: Vec<f64> = (0..n).map(|v| 1.0 / (g.degree(v) as f64).sqrt()).collect();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut columns = Vec::with_capacity(2 * g.edge_count());
    let mut weights = Vec::with_capacity(2 * g.edge_count());
    offsets.push(0);
    for v in 0..n {
        for &u in g.neighbors(v) {
            columns.push(u);
            weights.push(-inv_sqrt[v] * inv_sqrt[u]);
        }
        offsets.push(columns.len());
    }
    Ok(NormalizedLaplacian {
        offsets,
        columns,
        weights,
    })
}

impl NormalizedLaplacian {
    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    /// `y = L x`
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (v, out) in y.iter_mut().enumerate() {
            let range = self.offsets[v]..self.offsets[v + 1];
            let off: f64 = self.columns[range.clone()]
                .iter()
                .zip(&self.weights[range])
                .map(|(&u, &w)| w * x[u])
                .sum();
            *out = x[v] + off;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::identity(n, n);
        for v in 0..n {
            for idx in self.offsets[v]..self.offsets[v + 1] {
                m[(v, self.columns[idx])] = self.weights[idx];
            }
        }
        m
    }

    /// `||L x - lambda x||_2`
    pub fn residual(&self, x: &[f64], lambda: f64) -> f64 {
        let mut y = vec![0.0; x.len()];
        self.apply(x, &mut y);
        y.iter()
            .zip(x)
            .map(|(&a, &b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}
