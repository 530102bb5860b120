//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};

/// Relative cutoff on singular values used for every rank decision.
pub const RANK_TOL: f64 = 1e-10;

pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank with tolerance `RANK_TOL * largest singular value`.
pub fn rank(m: &DMatrix<f64>) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().filter(|&&d| d > RANK_TOL * top).count(),
        _ => 0,
    }
}

pub fn is_symmetric(m: &DMatrix<f64>) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let n = m.nrows();
    (0..n).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= 1e-10 * scale))
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Symmetric positive-definite inverse square root `M^{-1/2} = V diag(1/√λ) Vᵀ`.
///
/// Returns `None` if any eigenvalue is not strictly positive.
pub fn sym_inv_sqrt(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let eig = SymmetricEigen::new(symmetrize(m));
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return None;
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    let v = &eig.eigenvectors;
    Some(symmetrize(&(v * d * v.transpose())))
}

pub fn rel_frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inv_sqrt_squares_to_inverse() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let r = sym_inv_sqrt(&m).unwrap();
        let inv = m.clone().try_inverse().unwrap();
        assert!(rel_frobenius(&(&r * &r), &inv) < 1e-12);
        assert!(is_symmetric(&r));
    }

    #[test]
    fn inv_sqrt_rejects_indefinite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(sym_inv_sqrt(&m).is_none());
    }

    #[test]
    fn rank_of_duplicated_column() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        assert_eq!(rank(&x), 1);
        assert_eq!(rank(&DMatrix::zeros(3, 2)), 0);
    }
}
