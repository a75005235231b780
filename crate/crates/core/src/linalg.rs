//! Dense complex linear algebra on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Determinant kept as log-modulus and unit phase so that products of many
/// characteristic polynomials never overflow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogDet {
    pub ln_abs: f64,
    pub phase: Complex64,
}

impl LogDet {
    pub fn one() -> Self {
        Self {
            ln_abs: 0.0,
            phase: Complex64::new(1.0, 0.0),
        }
    }

    pub fn from_value(z: Complex64) -> Self {
        Self {
            ln_abs: z.norm().ln(),
            phase: z / z.norm(),
        }
    }

    pub fn mul(self, other: Self) -> Self {
        let p = self.phase * other.phase;
        Self {
            ln_abs: self.ln_abs + other.ln_abs,
            phase: p / p.norm(),
        }
    }

    pub fn div(self, other: Self) -> Self {
        let p = self.phase * other.phase.conj();
        Self {
            ln_abs: self.ln_abs - other.ln_abs,
            phase: p / p.norm(),
        }
    }

    pub fn powi(self, k: i32) -> Self {
        let p = self.phase.powi(k);
        Self {
            ln_abs: self.ln_abs * k as f64,
            phase: p / p.norm(),
        }
    }

    pub fn value(self) -> Complex64 {
        self.phase * self.ln_abs.exp()
    }
}

/// Determinant via LU with partial pivoting, accumulated in log space.
pub fn log_det(m: &CMatrix) -> Result<LogDet> {
    if m.nrows() != m.ncols() {
        return Err(Error::Structure("determinant of a non-square matrix".into()));
    }
    if m.nrows() == 0 {
        return Ok(LogDet::one());
    }
    let lu = m.clone().lu();
    let mut acc = LogDet::one();
    let u = lu.u();
    for i in 0..u.nrows() {
        let d = u[(i, i)];
        if d.norm() == 0.0 || !d.norm().is_finite() {
            return Err(Error::Singular(format!("zero pivot at position {i}")));
        }
        acc = acc.mul(LogDet::from_value(d));
    }
    let sign: f64 = lu.p().determinant();
    if sign < 0.0 {
        acc.phase = -acc.phase;
    }
    Ok(acc)
}

/// Real eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Lower Cholesky factor L with C = L·Lᵀ of a real symmetric positive
/// definite matrix.
pub fn cholesky(c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if c.nrows() != c.ncols() {
        return Err(Error::input("correlation matrix must be square"));
    }
    let sym = (c - c.transpose()).amax();
    if sym > 1e-12 * c.amax().max(1.0) {
        return Err(Error::input("correlation matrix must be symmetric"));
    }
    c.clone()
        .cholesky()
        .map(|ch| ch.l())
        .ok_or_else(|| Error::input("correlation matrix is not positive definite"))
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn diag(values: &[Complex64]) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_column_slice(values))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn log_det_matches_direct() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(2.0, 0.0), c(1.0, -1.0), c(0.5, 0.5)]);
        let direct = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        let ld = log_det(&m).unwrap();
        assert!((ld.value() - direct).norm() < 1e-14);
    }

    #[test]
    fn log_det_survives_large_products() {
        let m = diag(&vec![c(1e3, 0.0); 200]);
        let ld = log_det(&m).unwrap();
        assert!((ld.ln_abs - 200.0 * 1e3f64.ln()).abs() < 1e-9);
        assert!((ld.phase - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn singular_matrix_reported() {
        let m = CMatrix::zeros(3, 3);
        assert!(matches!(log_det(&m), Err(Error::Singular(_))));
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let good = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let l = cholesky(&good).unwrap();
        assert!((&l * l.transpose() - good).amax() < 1e-14);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(cholesky(&bad).is_err());
    }
}
