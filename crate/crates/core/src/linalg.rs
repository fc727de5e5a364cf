//! Small dense helpers over nalgebra's SVD.

use nalgebra::{DMatrix, DVector};

pub(crate) fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Count of singular values above `rel` times the largest.
pub(crate) fn numeric_rank(sv: &[f64], rel: f64) -> usize {
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > rel * max).count()
}

/// Minimum-norm least-squares solution of `a x = b`.
pub(crate) fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    let max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = (1e-12 * max).max(f64::MIN_POSITIVE);
    svd.solve(b, eps).expect("both factors were computed")
}

/// `|a x - b|` at the least-squares solution.
pub(crate) fn least_squares_residual(a: &DMatrix<f64>, b: &DVector<f64>) -> f64 {
    let x = least_squares(a, b);
    (a * x - b).norm()
}
