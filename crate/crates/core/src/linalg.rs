//! Small dense helpers shared by the geometry, transport and path solvers.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Eigenvalues below this are clamped before taking square roots.
pub const EIGEN_FLOOR: f64 = 1e-14;

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Inverse of a symmetric positive definite matrix via Cholesky.
pub fn spd_inverse(m: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    m.clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or(Error::SingularMetric { t })
}

/// Unique SPD square root through a symmetric eigendecomposition.
pub fn spd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    spd_power(m, 0.5)
}

/// `m^{-1/2}` for SPD `m`.
pub fn spd_inv_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    spd_power(m, -0.5)
}

fn spd_power(m: &DMatrix<f64>, p: f64) -> DMatrix<f64> {
    let eig = symmetrize(m).symmetric_eigen();
    let d = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| l.max(EIGEN_FLOOR).powf(p)),
    );
    let q = &eig.eigenvectors;
    q * DMatrix::from_diagonal(&d) * q.transpose()
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    symmetrize(m)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Solves a scalar tridiagonal system with the Thomas algorithm.
/// `lower[i]` couples row `i+1` to column `i`, `upper[i]` couples row `i` to column `i+1`.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    if n == 0 {
        return Vec::new();
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = if n > 1 { upper[0] / diag[0] } else { 0.0 };
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i - 1] * c[i - 1];
        if i < n - 1 {
            c[i] = upper[i] / denom;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Block tridiagonal solve for symmetric systems: `diag[i]` on the diagonal, `off[i]`
/// couples block `i` and `i+1` (the matrix is `off[i]` above and `off[i]^T` below).
pub fn solve_block_tridiagonal(
    diag: &[DMatrix<f64>],
    off: &[DMatrix<f64>],
    rhs: &[DVector<f64>],
) -> Option<Vec<DVector<f64>>> {
    let m = diag.len();
    if m == 0 {
        return Some(Vec::new());
    }
    let mut c: Vec<DMatrix<f64>> = Vec::with_capacity(m);
    let mut d: Vec<DVector<f64>> = Vec::with_capacity(m);
    for i in 0..m {
        let (a, r) = if i == 0 {
            (diag[0].clone(), rhs[0].clone())
        } else {
            let lo = off[i - 1].transpose();
            (&diag[i] - &lo * &c[i - 1], &rhs[i] - &lo * &d[i - 1])
        };
        let lu = a.lu();
        if i + 1 < m {
            c.push(lu.solve(&off[i])?);
        }
        d.push(lu.solve(&r)?);
    }
    let mut x = vec![DVector::zeros(0); m];
    x[m - 1] = d[m - 1].clone();
    for i in (0..m - 1).rev() {
        x[i] = &d[i] - &c[i] * &x[i + 1];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_squares_back() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let s = spd_sqrt(&m);
        assert!((&s * &s - &m).amax() < 1e-14);
        let is = spd_inv_sqrt(&m);
        assert!((&is * &m * &is - DMatrix::identity(2, 2)).amax() < 1e-14);
    }

    #[test]
    fn tridiagonal_matches_dense() {
        let lower = [1.0, 0.5, -0.2];
        let diag = [4.0, 3.0, 5.0, 2.0];
        let upper = [0.7, -1.0, 0.4];
        let rhs = [1.0, 2.0, 3.0, 4.0];
        let x = solve_tridiagonal(&lower, &diag, &upper, &rhs);
        let mut a = DMatrix::zeros(4, 4);
        for i in 0..4 {
            a[(i, i)] = diag[i];
        }
        for i in 0..3 {
            a[(i + 1, i)] = lower[i];
            a[(i, i + 1)] = upper[i];
        }
        let r = a * DVector::from_row_slice(&x) - DVector::from_row_slice(&rhs);
        assert!(r.amax() < 1e-13);
    }

    #[test]
    fn block_tridiagonal_matches_dense() {
        let d = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let o = DMatrix::from_row_slice(2, 2, &[-1.0, 0.2, 0.1, -1.0]);
        let diag = vec![d.clone(), d.clone(), d.clone()];
        let off = vec![o.clone(), o.clone()];
        let rhs = vec![
            DVector::from_row_slice(&[1.0, 0.0]),
            DVector::from_row_slice(&[0.0, 2.0]),
            DVector::from_row_slice(&[-1.0, 1.0]),
        ];
        let x = solve_block_tridiagonal(&diag, &off, &rhs).unwrap();
        let mut a = DMatrix::zeros(6, 6);
        for i in 0..3 {
            a.view_mut((2 * i, 2 * i), (2, 2)).copy_from(&d);
        }
        for i in 0..2 {
            a.view_mut((2 * i, 2 * i + 2), (2, 2)).copy_from(&o);
            a.view_mut((2 * i + 2, 2 * i), (2, 2)).copy_from(&o.transpose());
        }
        let xs: Vec<f64> = x.iter().flat_map(|v| v.iter().cloned()).collect();
        let b: Vec<f64> = rhs.iter().flat_map(|v| v.iter().cloned()).collect();
        let r = a * DVector::from_vec(xs) - DVector::from_vec(b);
        assert!(r.amax() < 1e-13);
    }
}
