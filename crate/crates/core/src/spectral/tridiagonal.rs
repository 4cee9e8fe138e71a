//! Eigenvalues of large symmetric matrices: Householder reduction to
//! tridiagonal form followed by implicit-shift QL iteration.
//!
//! Only eigenvalues are produced. The reduction touches just the lower
//! triangle, stored row-major, so each step streams contiguous rows.

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;

const MAX_QL_ITERATIONS: usize = 60;

/// All eigenvalues of `m`, ascending.
pub fn sym_eigenvalues(m: &SymMatrix) -> Result<Vec<f64>> {
    sym_eigenvalues_owned(m.clone())
}

/// [`sym_eigenvalues`] reusing the matrix storage as workspace.
pub fn sym_eigenvalues_owned(m: SymMatrix) -> Result<Vec<f64>> {
    let n = m.dim();
    let mut a = m.into_matrix().into_vec();
    let (mut d, e) = tridiagonalize(&mut a, n);
    drop(a);
    tridiagonal_ql(&mut d, &e)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

const PANEL: usize = 32;

/// Reduces the lower triangle of `a` in place. Returns the diagonal `d` and
/// the sub-diagonal `e` (with `e[i]` coupling `i` and `i + 1`).
///
/// Reflections are accumulated in panels of `PANEL` steps: within a panel the
/// working matrix is `A − Σ (v wᵀ + w vᵀ)` over the stored pairs, and the
/// trailing block is rewritten once per panel.
fn tridiagonalize(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n.saturating_sub(1)];
    if n == 0 {
        return (d, e);
    }
    let mut vs: Vec<Vec<f64>> = Vec::with_capacity(PANEL);
    let mut ws: Vec<Vec<f64>> = Vec::with_capacity(PANEL);
    let mut col = vec![0.0; n];

    for k in 0..n.saturating_sub(2) {
        let lo = k + 1;
        // Column k of the working matrix, rows k..n.
        for i in k..n {
            col[i] = a[i * n + k];
        }
        for (v, w) in vs.iter().zip(&ws) {
            let (vk, wk) = (v[k], w[k]);
            for i in k..n {
                col[i] -= v[i] * wk + w[i] * vk;
            }
        }
        d[k] = col[k];

        let alpha = col[lo];
        let sigma: f64 = col[lo + 1..n].iter().map(|x| x * x).sum();
        if sigma == 0.0 {
            e[k] = alpha;
        } else {
            let norm = (alpha * alpha + sigma).sqrt();
            let beta = if alpha > 0.0 { -norm } else { norm };
            let tau = (beta - alpha) / beta;
            let scale = 1.0 / (alpha - beta);
            let mut v = vec![0.0; n];
            v[lo] = 1.0;
            for i in (lo + 1)..n {
                v[i] = col[i] * scale;
            }
            e[k] = beta;

            // p = A22 v on the stored lower triangle, then the panel corrections.
            let mut p = vec![0.0; n];
            for i in lo..n {
                let row = &a[i * n + lo..i * n + i];
                let vi = v[i];
                let acc = row_dot_axpy(row, &v[lo..i], vi, &mut p[lo..i]);
                p[i] += acc + a[i * n + i] * vi;
            }
            for (vt, wt) in vs.iter().zip(&ws) {
                let wv = dot_from(wt, &v, lo);
                let vv = dot_from(vt, &v, lo);
                for i in lo..n {
                    p[i] -= vt[i] * wv + wt[i] * vv;
                }
            }
            let mut pv = 0.0;
            for i in lo..n {
                p[i] *= tau;
                pv += p[i] * v[i];
            }
            let half = 0.5 * tau * pv;
            for i in lo..n {
                p[i] -= half * v[i];
            }
            vs.push(v);
            ws.push(p);
        }

        if vs.len() == PANEL || k + 3 >= n {
            flush_panel(a, n, lo, &vs, &ws);
            vs.clear();
            ws.clear();
        }
    }
    if n >= 2 {
        d[n - 2] = a[(n - 2) * n + n - 2];
        e[n - 2] = a[(n - 1) * n + n - 2];
    }
    d[n - 1] = a[(n - 1) * n + n - 1];
    (d, e)
}

fn dot_from(x: &[f64], y: &[f64], from: usize) -> f64 {
    x[from..].iter().zip(&y[from..]).map(|(a, b)| a * b).sum()
}

/// Applies `A ← A − Σ (v wᵀ + w vᵀ)` to the lower triangle of rows and
/// columns `lo..n`.
fn flush_panel(a: &mut [f64], n: usize, lo: usize, vs: &[Vec<f64>], ws: &[Vec<f64>]) {
    if vs.is_empty() {
        return;
    }
    for i in lo..n {
        let row = &mut a[i * n + lo..i * n + i + 1];
        for (v, w) in vs.iter().zip(ws) {
            let (vi, wi) = (v[i], w[i]);
            if vi == 0.0 && wi == 0.0 {
                continue;
            }
            for ((aij, &vj), &wj) in row.iter_mut().zip(&v[lo..=i]).zip(&w[lo..=i]) {
                *aij -= vi * wj + wi * vj;
            }
        }
    }
}

const LANES: usize = 8;

/// Returns `row · x` and adds `alpha · row` to `y`. Partial sums are kept in
/// independent lanes so the loop vectorizes.
#[inline]
fn row_dot_axpy(row: &[f64], x: &[f64], alpha: f64, y: &mut [f64]) -> f64 {
    let mut lanes = [0.0; LANES];
    let mut rc = row.chunks_exact(LANES);
    let mut xc = x.chunks_exact(LANES);
    let mut yc = y.chunks_exact_mut(LANES);
    for ((r, xs), ys) in (&mut rc).zip(&mut xc).zip(&mut yc) {
        for l in 0..LANES {
            lanes[l] += r[l] * xs[l];
            ys[l] += r[l] * alpha;
        }
    }
    let mut acc: f64 = lanes.iter().sum();
    for ((r, xs), ys) in rc.remainder().iter().zip(xc.remainder()).zip(yc.into_remainder()) {
        acc += r * xs;
        *ys += r * alpha;
    }
    acc
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix;
/// eigenvalues overwrite `d`.
fn tridiagonal_ql(d: &mut [f64], e_in: &[f64]) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    let mut e = e_in.to_vec();
    e.push(0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(Error::NoConvergence {
                    sweeps: iter,
                    residual: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
