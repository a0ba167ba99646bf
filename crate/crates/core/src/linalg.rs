//! Small dense eigenvalue and exact PSD routines.

use num::complex::Complex64;
use num::{BigRational, Signed, Zero};

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for _sweep in 0..64 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum();
        let diag: f64 = (0..n).map(|i| m[i][i] * m[i][i]).sum();
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q] == 0.0 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Least eigenvalue of a Hermitian matrix (only the upper triangle's conjugate symmetry is assumed).
pub fn hermitian_min_eigenvalue(h: &[Vec<Complex64>]) -> f64 {
    match h.len() {
        0 => 0.0,
        1 => h[0][0].re,
        2 => {
            let a = h[0][0].re;
            let d = h[1][1].re;
            let b = h[0][1].norm();
            let half_tr = 0.5 * (a + d);
            let disc = (0.25 * (a - d) * (a - d) + b * b).sqrt();
            half_tr - disc
        }
        n => {
            // [[A, −B], [B, A]] has the eigenvalues of A + iB, each twice.
            let mut m = vec![vec![0.0; 2 * n]; 2 * n];
            for i in 0..n {
                for j in 0..n {
                    let z = h[i][j];
                    m[i][j] = z.re;
                    m[i + n][j + n] = z.re;
                    m[i][j + n] = -z.im;
                    m[i + n][j] = z.im;
                }
            }
            symmetric_eigenvalues(&m)[0]
        }
    }
}

/// Exact determinant by fraction Gaussian elimination.
pub fn rational_det(m: &[Vec<BigRational>]) -> BigRational {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut det = BigRational::from_integer(1.into());
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for r in (col + 1)..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &p;
            for c in col..n {
                let v = &f * &a[col][c];
                a[r][c] -= v;
            }
        }
    }
    det
}

/// Exact PSD test of a symmetric rational matrix via all principal minors.
pub fn rational_is_psd(m: &[Vec<BigRational>]) -> bool {
    let n = m.len();
    assert!(n <= 16, "principal-minor test is exponential in the size");
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let sub: Vec<Vec<BigRational>> = idx.iter().map(|&i| idx.iter().map(|&j| m[i][j].clone()).collect()).collect();
        if rational_det(&sub).is_negative() {
            return false;
        }
    }
    true
}
