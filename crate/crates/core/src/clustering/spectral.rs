use nalgebra::DMatrix;

use super::kmeans::{kmeans, KMeansConfig};
use crate::error::{Error, Result};
use crate::linalg;
use crate::partition::Partition;

/// Which end of the spectrum carries the cluster structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectralInput {
    /// Use the c eigenvectors with the smallest eigenvalues.
    Laplacian,
    /// Use the c eigenvectors with the largest eigenvalues.
    Similarity,
}

/// The c selected eigenvectors as columns (n×c).
pub fn spectral_vectors(matrix: &DMatrix<f64>, kind: SpectralInput, c: usize) -> Result<DMatrix<f64>> {
    let n = matrix.nrows();
    if !matrix.is_square() {
        return Err(Error::dim("spectral_partition", "matrix is not square"));
    }
    if c == 0 || c > n {
        return Err(Error::invalid(format!("c = {c} must be in 1..={n}")));
    }
    let scale = linalg::max_abs(matrix).max(f64::MIN_POSITIVE);
    if linalg::max_abs(&(matrix - matrix.transpose())) > 1e-12 * scale {
        return Err(Error::invalid("spectral partitioning needs a symmetric matrix"));
    }
    let (_, vecs) = linalg::sym_eigen_desc(matrix);
    let cols: Vec<usize> = match kind {
        SpectralInput::Similarity => (0..c).collect(),
        SpectralInput::Laplacian => (0..c).map(|k| n - 1 - k).collect(),
    };
    Ok(vecs.select_columns(cols.iter()))
}

pub fn spectral_partition(matrix: &DMatrix<f64>, kind: SpectralInput, c: usize, k: usize, seed: u64) -> Result<Partition> {
    let n = matrix.nrows();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k = {k} must be in 1..={n}")));
    }
    let v = spectral_vectors(matrix, kind, c)?;
    Ok(kmeans(&v, k, seed, &KMeansConfig::default())?.partition)
}
