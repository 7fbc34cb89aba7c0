//! Small dense solvers: Householder least squares and Cholesky.

use crate::error::{PaaError, Result};

/// Least-squares coefficients for `design · β ≈ y` via Householder QR.
/// Fails on a numerically rank-deficient design.
pub fn least_squares(design: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>> {
    let n = design.len();
    if n != y.len() {
        return Err(PaaError::LengthMismatch { expected: n, got: y.len() });
    }
    let p = design.first().map_or(0, Vec::len);
    if p == 0 || n < p {
        return Err(PaaError::InsufficientData(format!("least squares with {n} rows and {p} columns")));
    }
    // Column-major copy.
    let mut a: Vec<Vec<f64>> = (0..p).map(|k| design.iter().map(|r| r[k]).collect()).collect();
    let mut b = y.to_vec();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for k in 0..p {
        let norm = a[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= 1e-10 * scale * (n as f64).sqrt() {
            return Err(PaaError::Domain(format!("design column {k} is linearly dependent")));
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for col in a.iter_mut().skip(k) {
                let dot: f64 = v.iter().zip(&col[k..]).map(|(p, q)| p * q).sum();
                let f = 2.0 * dot / vnorm2;
                for (c, vi) in col[k..].iter_mut().zip(&v) {
                    *c -= f * vi;
                }
            }
            let dot: f64 = v.iter().zip(&b[k..]).map(|(p, q)| p * q).sum();
            let f = 2.0 * dot / vnorm2;
            for (c, vi) in b[k..].iter_mut().zip(&v) {
                *c -= f * vi;
            }
        }
    }
    let mut beta = vec![0.0; p];
    for k in (0..p).rev() {
        let s: f64 = (k + 1..p).map(|j| a[j][k] * beta[j]).sum();
        beta[k] = (b[k] - s) / a[k][k];
    }
    Ok(beta)
}

/// Solves `A x = b` for symmetric positive-definite `A` (consumed).
pub fn cholesky_solve(mut a: Vec<Vec<f64>>, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    if b.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(PaaError::DimensionMismatch { expected: n, got: b.len() });
    }
    for j in 0..n {
        let d = a[j][j] - a[j][..j].iter().map(|v| v * v).sum::<f64>();
        if !(d > 0.0) {
            return Err(PaaError::Domain("matrix is not positive definite".into()));
        }
        let d = d.sqrt();
        a[j][j] = d;
        let row_j: Vec<f64> = a[j][..j].to_vec();
        for row_i in a.iter_mut().skip(j + 1) {
            let s: f64 = row_i[..j].iter().zip(&row_j).map(|(p, q)| p * q).sum();
            row_i[j] = (row_i[j] - s) / d;
        }
    }
    // Forward then backward substitution with L (lower triangle of `a`).
    let mut z = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| a[i][k] * z[k]).sum();
        z[i] = (b[i] - s) / a[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[k][i] * x[k]).sum();
        x[i] = (z[i] - s) / a[i][i];
    }
    Ok(x)
}
