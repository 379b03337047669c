//! Archimedean Cartan decomposition through singular values.
//!
//! Small singular values lose relative accuracy when read off `M^T M`
//! directly, so we only ever take the *largest* eigenvalue, of the Gram
//! matrix of each exterior power: `lambda_max(C_k^T C_k) = (s_1 ... s_k)^2`
//! where `C_k` is the k-th compound matrix. The last partial product is
//! `|det M|`, known exactly.

use num_traits::{Signed, ToPrimitive};

use super::point::{bareiss, PointRep};
use super::smith::subsets;
use crate::error::{Error, Result};

pub const DEFAULT_ARCH_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 64;

/// Eigenvalues of a symmetric matrix (row-major, `n x n`) by cyclic Jacobi
/// rotations, stopping once the off-diagonal Frobenius norm is at most
/// `tol` times the full norm.
pub fn symmetric_eigenvalues(n: usize, mut a: Vec<f64>, tol: f64) -> Result<Vec<f64>> {
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };
    if norm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut sweeps = 0;
    loop {
        let residual = off(&a);
        if residual <= tol * norm {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::EigenNotConverged { sweeps, residual });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
        sweeps += 1;
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    Ok(ev)
}

/// `k`-th compound matrix (all `k x k` minors), row-major, as floats.
fn compound(point: &PointRep, k: usize) -> (usize, Vec<f64>) {
    let n = point.n();
    if k == 1 {
        return (n, point.entries().iter().map(|&x| x as f64).collect());
    }
    let sets = subsets(n, k);
    let m = sets.len();
    let mut out = Vec::with_capacity(m * m);
    for rows in &sets {
        for cols in &sets {
            let mut sub: Vec<num_bigint::BigInt> = Vec::with_capacity(k * k);
            for &r in rows {
                for &c in cols {
                    sub.push(point.entry(r, c).into());
                }
            }
            out.push(bareiss(k, &mut sub).to_f64().unwrap_or(f64::INFINITY));
        }
    }
    (m, out)
}

fn gram(m: usize, c: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let s: f64 = (0..m).map(|r| c[r * m + i] * c[r * m + j]).sum();
            g[i * m + j] = s;
            g[j * m + i] = s;
        }
    }
    g
}

/// `log(s_1 ... s_k)` for `k = 0..=n`.
pub fn log_partial_products(point: &PointRep, tol: f64) -> Result<Vec<f64>> {
    let n = point.n();
    let mut l = Vec::with_capacity(n + 1);
    l.push(0.0);
    for k in 1..n {
        let (m, c) = compound(point, k);
        let g = gram(m, &c);
        let top = if m == 2 {
            // closed form, no cancellation: (tr + sqrt(tr^2 - 4 det)) / 2
            let tr = g[0] + g[3];
            let det = g[0] * g[3] - g[1] * g[2];
            0.5 * (tr + (tr * tr - 4.0 * det).max(0.0).sqrt())
        } else {
            symmetric_eigenvalues(m, g, tol)?[0]
        };
        l.push(0.5 * top.ln());
    }
    let det = point.determinant();
    l.push(det.abs().to_f64().unwrap_or(f64::INFINITY).ln());
    Ok(l)
}

/// Singular values, descending.
pub fn singular_values(point: &PointRep, tol: f64) -> Result<Vec<f64>> {
    let l = log_partial_products(point, tol)?;
    Ok(l.windows(2).map(|w| (w[1] - w[0]).exp()).collect())
}

/// `log(s_i / s_{i+1})` for `i = 1..n-1`; nonnegative.
pub fn arch_exponents(point: &PointRep, tol: f64) -> Result<Vec<f64>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidPoint(format!("tolerance must be positive, got {tol}")));
    }
    let l = log_partial_products(point, tol)?;
    Ok((1..point.n())
        .map(|i| (2.0 * l[i] - l[i - 1] - l[i + 1]).max(0.0))
        .collect())
}
