//! Dense complex linear algebra helpers on top of nalgebra.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

pub type CMatrix = DMatrix<C64>;

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Smallest singular value.
pub fn min_singular_value(m: &CMatrix) -> f64 {
    m.singular_values().iter().cloned().fold(f64::INFINITY, f64::min)
}

/// max |M - M*|.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues of the Hermitian part (M + M*)/2, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().cloned().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Largest ‖tC‖₂ accepted before scaling-and-squaring (e^{40} overflows nothing
/// but destroys relative accuracy of the small eigen-directions).
pub const EXPM_MAX_NORM: f64 = 40.0;

/// Matrix exponential by scaling and squaring: halve until ‖C/2^s‖₂ ≤ 0.5, sum
/// the Taylor series to machine precision, then square s times.
pub fn expm(c: &CMatrix) -> Result<CMatrix> {
    let norm = spectral_norm(c);
    if !norm.is_finite() || norm > EXPM_MAX_NORM {
        return Err(Error::ExpOverflow { norm });
    }
    let mut s = 0u32;
    while norm / 2f64.powi(s as i32) > 0.5 {
        s += 1;
    }
    let scaled = c * C64::new(2f64.powi(-(s as i32)), 0.0);
    let n = c.nrows();
    let mut result = CMatrix::identity(n, n);
    let mut term = CMatrix::identity(n, n);
    for k in 1..=30 {
        term = &term * &scaled * C64::new(1.0 / k as f64, 0.0);
        result += &term;
        if max_abs(&term) <= 1e-18 * max_abs(&result) {
            break;
        }
    }
    for _ in 0..s {
        result = &result * &result;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_diagonal_and_nilpotent() {
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(-2.0, 1.0)]));
        let e = expm(&d).unwrap();
        assert!((e[(0, 0)] - C64::new(1f64.exp(), 0.0)).norm() < 1e-13);
        assert!((e[(1, 1)] - C64::new(-2.0, 1.0).exp()).norm() < 1e-14);
        let mut n = CMatrix::zeros(2, 2);
        n[(0, 1)] = C64::new(3.0, 0.0);
        let e = expm(&n).unwrap();
        assert!((e[(0, 1)] - C64::new(3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn expm_rejects_huge_norm() {
        let m = CMatrix::identity(3, 3) * C64::new(1e3, 0.0);
        assert!(matches!(expm(&m), Err(Error::ExpOverflow { .. })));
    }
}
