use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::laplacian::NormalizedLaplacian;
use crate::error::{Error, Result};

/// Largest operator size solved by a full dense decomposition under
/// [`EigenMethod::Auto`].
pub const DENSE_LIMIT: usize = 400;
/// Required `||L x - lambda x||_2` for every retained pair.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Default gap below which two retained eigenvalues count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

const LANCZOS_SEED: u64 = 0x6c61_6e63_7a6f_7331;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum EigenMethod {
    #[default]
    Auto,
    Dense,
    Lanczos,
}

/// Smallest `m + 1` eigenpairs of a normalized Laplacian.
///
/// Eigenvalues ascend; column `j` of `vectors` belongs to `eigenvalues[j]`.
/// Each vector's first entry with magnitude above `1e-12` is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis {
    eigenvalues: Vec<f64>,
    vectors: DMatrix<f64>,
    degenerate: bool,
    max_residual: f64,
}

impl SpectralBasis {
    pub fn n(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Number of retained non-trivial vectors (`m`).
    pub fn nontrivial_count(&self) -> usize {
        self.eigenvalues.len().saturating_sub(1)
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn vector(&self, j: usize) -> nalgebra::DVectorView<'_, f64> {
        self.vectors.column(j)
    }

    /// True when two retained non-trivial eigenvalues are closer than the
    /// requested tolerance. Inside such an eigenspace the per-vertex energy
    /// signature depends on the solver's choice of basis.
    pub fn degeneracy_flag(&self) -> bool {
        self.degenerate
    }

    pub fn max_residual(&self) -> f64 {
        self.max_residual
    }

    /// Copy with the selected columns negated. Everything downstream must be
    /// invariant under this.
    pub fn with_sign_flips(&self, flips: &[bool]) -> SpectralBasis {
        let mut out = self.clone();
        for (j, &flip) in flips.iter().enumerate().take(out.vectors.ncols()) {
            if flip {
                out.vectors.column_mut(j).neg_mut();
            }
        }
        out
    }
}

/// Smallest `m + 1` eigenpairs of `op`, solver chosen by size.
pub fn low_frequency_basis(op: &NormalizedLaplacian, m: usize, tol: f64) -> Result<SpectralBasis> {
    low_frequency_basis_with(op, m, tol, EigenMethod::Auto)
}

pub fn low_frequency_basis_with(
    op: &NormalizedLaplacian,
    m: usize,
    tol: f64,
    method: EigenMethod,
) -> Result<SpectralBasis> {
    let n = op.n();
    let nev = m + 1;
    if nev > n {
        return Err(Error::param(format!(
            "requested {nev} eigenpairs of a {n}-vertex operator"
        )));
    }
    let dense = match method {
        EigenMethod::Auto => n <= DENSE_LIMIT,
        EigenMethod::Dense => true,
        EigenMethod::Lanczos => false,
    };
    let (eigenvalues, mut vectors) = if dense {
        dense_smallest(op, nev)
    } else {
        lanczos_smallest(op, nev)?
    };

    for mut col in vectors.column_iter_mut() {
        if let Some(first) = col.iter().copied().find(|x| x.abs() > 1e-12) {
            if first < 0.0 {
                col.neg_mut();
            }
        }
    }

    let mut max_residual = 0.0f64;
    for (j, &lambda) in eigenvalues.iter().enumerate() {
        let x: Vec<f64> = vectors.column(j).iter().copied().collect();
        max_residual = max_residual.max(op.residual(&x, lambda));
    }
    if max_residual.is_nan() || max_residual > RESIDUAL_TOL {
        return Err(Error::Numeric {
            message: format!("{nev} eigenpairs of a {n}-vertex Laplacian did not reach tolerance"),
            residual: max_residual,
        });
    }

    let degenerate = eigenvalues
        .windows(2)
        .skip(1)
        .any(|w| (w[1] - w[0]).abs() < tol * w[1].abs().max(1.0));
    if degenerate {
        log::warn!("degenerate retained eigenvalues; energy signature is basis dependent");
    }

    Ok(SpectralBasis {
        eigenvalues,
        vectors,
        degenerate,
        max_residual,
    })
}

fn dense_smallest(op: &NormalizedLaplacian, nev: usize) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(op.to_dense());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order.truncate(nev);
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = eig.eigenvectors.select_columns(&order);
    (values, vectors)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Two passes of classical Gram-Schmidt against every stored basis vector.
fn reorthogonalize(basis: &[Vec<f64>], w: &mut [f64]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, w);
            axpy(-c, q, w);
        }
    }
}

/// Lanczos with full reorthogonalization.
///
/// The Krylov space grows until the `nev` smallest Ritz pairs have true
/// residuals below [`RESIDUAL_TOL`], or until it spans the whole space. On
/// breakdown the iteration continues from a fresh vector orthogonal to the
/// current basis, so repeated eigenvalues are still found.
fn lanczos_smallest(op: &NormalizedLaplacian, nev: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = op.n();
    let mut rng = ChaCha8Rng::seed_from_u64(LANCZOS_SEED);
    let mut random_unit = |basis: &[Vec<f64>]| -> Option<Vec<f64>> {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        reorthogonalize(basis, &mut v);
        let norm = dot(&v, &v).sqrt();
        (norm > 1e-8).then(|| v.into_iter().map(|x| x / norm).collect())
    };

    let mut basis: Vec<Vec<f64>> = vec![random_unit(&[]).expect("n > 0")];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut next_check = (4 * nev + 40).min(n);
    let mut w = vec![0.0; n];
    let mut best_residual = f64::INFINITY;

    loop {
        let j = basis.len() - 1;
        op.apply(&basis[j], &mut w);
        let a = dot(&basis[j], &w);
        alpha.push(a);
        axpy(-a, &basis[j], &mut w);
        if j > 0 {
            axpy(-beta[j - 1], &basis[j - 1], &mut w);
        }
        reorthogonalize(&basis, &mut w);
        let b = dot(&w, &w).sqrt();
        let size = basis.len();

        if size >= next_check || size == n {
            let tri = tridiagonal(&alpha, &beta);
            let eig = SymmetricEigen::new(tri);
            let mut order: Vec<usize> = (0..size).collect();
            order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
            order.truncate(nev);
            let estimate = order
                .iter()
                .map(|&i| (b * eig.eigenvectors[(size - 1, i)]).abs())
                .fold(0.0, f64::max);
            if estimate <= RESIDUAL_TOL || size == n {
                let mut values = Vec::with_capacity(nev);
                let mut vectors = DMatrix::zeros(n, nev);
                let mut worst = 0.0f64;
                for (col, &i) in order.iter().enumerate() {
                    let mut x = vec![0.0; n];
                    for (row, q) in basis.iter().enumerate() {
                        axpy(eig.eigenvectors[(row, i)], q, &mut x);
                    }
                    let norm = dot(&x, &x).sqrt();
                    x.iter_mut().for_each(|xi| *xi /= norm);
                    let mut lx = vec![0.0; n];
                    op.apply(&x, &mut lx);
                    let theta = dot(&x, &lx);
                    worst = worst.max(op.residual(&x, theta));
                    values.push(theta);
                    vectors.column_mut(col).copy_from_slice(&x);
                }
                best_residual = best_residual.min(worst);
                if worst <= RESIDUAL_TOL {
                    return Ok((values, vectors));
                }
                if size == n {
                    return Err(Error::Numeric {
                        message: "Krylov space exhausted".into(),
                        residual: best_residual,
                    });
                }
            }
            next_check = (size + (size / 4).max(20)).min(n);
        }

        let next = if b > 1e-10 {
            beta.push(b);
            w.iter().map(|x| x / b).collect()
        } else {
            beta.push(0.0);
            match random_unit(&basis) {
                Some(v) => v,
                None => {
                    return Err(Error::Numeric {
                        message: "breakdown without a fresh direction".into(),
                        residual: best_residual,
                    })
                }
            }
        };
        basis.push(next);
    }
}

fn tridiagonal(alpha: &[f64], beta: &[f64]) -> DMatrix<f64> {
    let k = alpha.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    t
}
