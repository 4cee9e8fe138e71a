//! Cyclic Jacobi eigensolver for dense symmetric matrices.

use crate::error::{Error, Result};
use crate::matrix::{Matrix, SymMatrix};

use super::SpectralDecomposition;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_SWEEPS: usize = 100;

/// Full eigendecomposition by cyclic Jacobi rotations.
///
/// Sweeps continue until the off-diagonal Frobenius norm drops below
/// `tol · ‖M‖_F`, followed by one more sweep to polish the result. Eigenvalues
/// come back ascending and every eigenvector has its first non-negligible
/// component positive.
pub fn sym_eig(m: &SymMatrix, tol: f64) -> Result<SpectralDecomposition> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let n = m.dim();
    let mut a = m.as_matrix().as_slice().to_vec();
    // Row r of `vt` is the eigenvector paired with diagonal entry r.
    let mut vt = Matrix::identity(n).as_slice().to_vec();
    let scale = m.frobenius_norm();
    let target = tol * scale;

    let mut converged_at = None;
    for sweep in 0..MAX_SWEEPS {
        let off = off_diagonal_norm(&a, n);
        if off <= target || off == 0.0 {
            converged_at = Some(sweep);
            break;
        }
        run_sweep(&mut a, &mut vt, n);
    }
    match converged_at {
        Some(_) => run_sweep(&mut a, &mut vt, n),
        None => {
            let off = off_diagonal_norm(&a, n);
            if off > target {
                return Err(Error::NoConvergence {
                    sweeps: MAX_SWEEPS,
                    residual: off,
                });
            }
        }
    }

    let diag: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| diag[x].total_cmp(&diag[y]));

    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let mut eigenvectors = Matrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let v = &mut vt[src * n..(src + 1) * n];
        orient(v);
        for (row, &x) in v.iter().enumerate() {
            eigenvectors[(row, col)] = x;
        }
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..i {
            s += a[i * n + j] * a[i * n + j];
        }
    }
    (2.0 * s).sqrt()
}

fn run_sweep(a: &mut [f64], vt: &mut [f64], n: usize) {
    for p in 0..n {
        for q in (p + 1)..n {
            rotate(a, vt, n, p, q);
        }
    }
}

// Annihilates a[p][q] with the similarity A ← JᵀAJ and accumulates V ← VJ.
fn rotate(a: &mut [f64], vt: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    if apq == 0.0 {
        return;
    }
    let app = a[p * n + p];
    let aqq = a[q * n + q];
    if apq.abs() <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[p * n + q] = 0.0;
        a[q * n + p] = 0.0;
        return;
    }
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let (row_p, row_q) = two_rows(a, n, p, q);
    for k in 0..n {
        let (x, y) = (row_p[k], row_q[k]);
        row_p[k] = c * x - s * y;
        row_q[k] = s * x + c * y;
    }
    for k in 0..n {
        a[k * n + p] = a[p * n + k];
        a[k * n + q] = a[q * n + k];
    }
    a[p * n + p] = app - t * apq;
    a[q * n + q] = aqq + t * apq;
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;

    let (vp, vq) = two_rows(vt, n, p, q);
    for (x, y) in vp.iter_mut().zip(vq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

fn two_rows(a: &mut [f64], n: usize, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert!(p < q);
    let (head, tail) = a.split_at_mut(q * n);
    (&mut head[p * n..(p + 1) * n], &mut tail[..n])
}

/// Flips `v` so its first component with magnitude above `1e-12·‖v‖_∞` is
/// positive.
pub(crate) fn orient(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12 * max) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}
