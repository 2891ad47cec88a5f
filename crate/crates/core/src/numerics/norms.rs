//! Matrix measures used as identification cost functions.
//!
//! `‖·‖₂`, `‖·‖₁` and `‖·‖∞` are the induced operator norms. The entrywise
//! two-norm is the Frobenius norm.

use super::eigen::symmetric_eigen;
use super::matrix::DenseMatrix;

pub fn frobenius_norm(m: &DenseMatrix) -> f64 {
    m.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest singular value, from the largest eigenvalue of the smaller Gram
/// matrix.
pub fn spectral_norm(m: &DenseMatrix) -> f64 {
    let gram = if m.rows() <= m.cols() { m.outer_gram() } else { m.gram() };
    let eig = symmetric_eigen(&gram).expect("Gram matrices are square and symmetric");
    eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Maximum absolute column sum.
pub fn induced_one_norm(m: &DenseMatrix) -> f64 {
    (0..m.cols())
        .map(|j| (0..m.rows()).map(|i| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Maximum absolute row sum.
pub fn induced_inf_norm(m: &DenseMatrix) -> f64 {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn max_row_sumsq(m: &DenseMatrix) -> f64 {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|x| x * x).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn max_abs_entry(m: &DenseMatrix) -> f64 {
    m.as_slice().iter().map(|x| x.abs()).fold(0.0, f64::max)
}
