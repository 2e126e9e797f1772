//! Normalized Laplacian, low-frequency eigenbasis, energy embeddings and
//! the two quantizers.

mod eigen;
mod embedding;
mod laplacian;
mod quantize;

pub use eigen::{
    low_frequency_basis, low_frequency_basis_with, EigenMethod, SpectralBasis, DEGENERACY_TOL,
    DENSE_LIMIT, RESIDUAL_TOL,
};
pub use embedding::{energy_embedding, EnergyEmbedding};
pub use laplacian::{normalized_laplacian, NormalizedLaplacian};
pub use quantize::{
    codebook_size, quantize, quantize_absolute, quantize_relative, QuantizedCodes, Quantizer,
};

use std::io::Write;

use crate::error::Result;

/// Dumps `vertex<TAB>index<TAB>value` rows for every retained eigenvector
/// (index 0 is the trivial one), preceded by one `eigenvalue` row per index
/// with vertex column `-`.
pub fn write_basis_tsv<W: Write>(basis: &SpectralBasis, mut out: W) -> Result<()> {
    writeln!(out, "vertex\tindex\tvalue")?;
    for (j, lambda) in basis.eigenvalues().iter().enumerate() {
        writeln!(out, "-\t{j}\t{lambda:.17e}")?;
    }
    for v in 0..basis.n() {
        for j in 0..basis.eigenvalues().len() {
            writeln!(out, "{v}\t{j}\t{:.17e}", basis.vectors()[(v, j)])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Dumps `vertex<TAB>index<TAB>value` rows of an energy embedding; index `j`
/// refers to non-trivial eigenvector `j` (1-based).
pub fn write_embedding_tsv<W: Write>(emb: &EnergyEmbedding, mut out: W) -> Result<()> {
    writeln!(out, "vertex\tindex\tvalue")?;
    for v in 0..emb.n() {
        for (j, x) in emb.row(v).iter().enumerate() {
            writeln!(out, "{v}\t{}\t{x:.17e}", j + 1)?;
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    #[test]
    fn tsv_dumps_have_one_row_per_entry() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let basis =
            low_frequency_basis(&normalized_laplacian(&g).unwrap(), 2, DEGENERACY_TOL).unwrap();
        let mut buf = Vec::new();
        write_basis_tsv(&basis, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 3 + 9);

        let emb = energy_embedding(&basis, 2, false).unwrap();
        let mut buf = Vec::new();
        write_embedding_tsv(&emb, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 6);
        assert!(text.lines().nth(1).unwrap().starts_with("0\t1\t"));
    }
}
