//! Symmetric eigensolvers and the vector utilities built on them.
//!
//! Two solvers are provided. [`sym_eig`] is a cyclic Jacobi method returning
//! the full decomposition; it is used for factor graphs and anything that
//! needs eigenvectors. [`sym_eigenvalues`] reduces to tridiagonal form and
//! runs implicit QL, returning eigenvalues only; it handles the product
//! Laplacians, which reach several thousand rows.

mod jacobi;
mod tridiagonal;

pub use jacobi::{sym_eig, DEFAULT_TOL, MAX_SWEEPS};
pub use tridiagonal::{sym_eigenvalues, sym_eigenvalues_owned};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::{dot, norm, Matrix, SymMatrix};

/// Ascending eigenvalues with orthonormal eigenvectors; column `j` of
/// `eigenvectors` pairs with `eigenvalues[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, j: usize) -> Vec<f64> {
        self.eigenvectors.column(j)
    }

    /// `max_j ‖M v_j − λ_j v_j‖₂`.
    pub fn max_residual(&self, m: &SymMatrix) -> f64 {
        (0..self.dim())
            .map(|j| {
                let v = self.eigenvector(j);
                let mv = m.matvec(&v).expect("dimension checked by construction");
                mv.iter()
                    .zip(&v)
                    .map(|(a, b)| (a - self.eigenvalues[j] * b).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// `‖VᵀV − I‖_max`.
    pub fn orthogonality_error(&self) -> f64 {
        let v = &self.eigenvectors;
        let vtv = v.transpose().matmul(v).expect("square");
        vtv.max_abs_diff(&Matrix::identity(self.dim())).unwrap()
    }

    /// `V Λ Vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let v = &self.eigenvectors;
        let n = self.dim();
        let scaled = Matrix::from_fn(n, n, |i, j| v[(i, j)] * self.eigenvalues[j]);
        scaled.matmul(&v.transpose()).expect("square")
    }
}

/// `u ⊗ v`, with entry `i·|v| + k` equal to `u[i]·v[k]`.
pub fn kron_vec(u: &[f64], v: &[f64]) -> Vec<f64> {
    u.iter().flat_map(|&a| v.iter().map(move |&b| a * b)).collect()
}

/// Cosine of the angle between `x` and `y`.
pub fn cosine(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    let (nx, ny) = (norm(x), norm(y));
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot(x, y) / (nx * ny)).clamp(-1.0, 1.0))
}

/// A symmetric linear map that can be applied to vectors.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
}

impl LinearOperator for SymMatrix {
    fn dim(&self) -> usize {
        SymMatrix::dim(self)
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matvec(x).expect("operator applied to vector of wrong length")
    }
}

/// The Laplacian of `g ⊗ h` applied matrix-free.
///
/// Reshaping `x` row-major into an `n_g × n_h` matrix `X` gives
/// `L x = vec((d_g d_hᵀ) ∘ X − A_g X A_h)`, which costs
/// `O(n_g n_h (n_g + n_h))` instead of `O(n_g² n_h²)`.
#[derive(Debug, Clone)]
pub struct KroneckerLaplacian {
    n1: usize,
    n2: usize,
    d1: Vec<f64>,
    d2: Vec<f64>,
    a1: Matrix,
    a2: Matrix,
}

impl KroneckerLaplacian {
    pub fn new(g: &Graph, h: &Graph) -> Self {
        let to_f = |d: &[usize]| d.iter().map(|&x| x as f64).collect::<Vec<_>>();
        Self {
            n1: g.order(),
            n2: h.order(),
            d1: to_f(g.degrees()),
            d2: to_f(h.degrees()),
            a1: g.adjacency_matrix().into_matrix(),
            a2: h.adjacency_matrix().into_matrix(),
        }
    }

    /// `L (u ⊗ v) = (D_g u) ⊗ (D_h v) − (A_g u) ⊗ (A_h v)`.
    pub fn apply_product(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let du: Vec<f64> = u.iter().zip(&self.d1).map(|(a, b)| a * b).collect();
        let dv: Vec<f64> = v.iter().zip(&self.d2).map(|(a, b)| a * b).collect();
        let au = self.a1.matvec(u).expect("length checked by caller");
        let av = self.a2.matvec(v).expect("length checked by caller");
        let mut out = kron_vec(&du, &dv);
        for (o, s) in out.iter_mut().zip(kron_vec(&au, &av)) {
            *o -= s;
        }
        out
    }
}

impl LinearOperator for KroneckerLaplacian {
    fn dim(&self) -> usize {
        self.n1 * self.n2
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim(), "operator applied to vector of wrong length");
        let (n1, n2) = (self.n1, self.n2);
        // Y = X A_h (row by row), then Z = A_g Y.
        let mut y = vec![0.0; n1 * n2];
        for i in 0..n1 {
            let xi = &x[i * n2..(i + 1) * n2];
            let yi = &mut y[i * n2..(i + 1) * n2];
            for (k, &xik) in xi.iter().enumerate() {
                if xik == 0.0 {
                    continue;
                }
                for (o, &a) in yi.iter_mut().zip(self.a2.row(k)) {
                    *o += xik * a;
                }
            }
        }
        let mut out: Vec<f64> = (0..n1 * n2)
            .map(|idx| self.d1[idx / n2] * self.d2[idx % n2] * x[idx])
            .collect();
        for i in 0..n1 {
            for (j, &a) in self.a1.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let (oi, yj) = (i * n2, j * n2);
                for k in 0..n2 {
                    out[oi + k] -= a * y[yj + k];
                }
            }
        }
        out
    }
}
