//! Closed-form predictions for correlation coefficients and spectra of
//! Kronecker products, and the inequalities they rest on.
//!
//! Degree power sums are accumulated as exact integers; only the final
//! ratios are taken in floating point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack on every inequality check.
pub const INEQUALITY_SLACK: f64 = 1e-9;

/// Power sums of a degree sequence: `Σd = 2m`, `Σd²` (first Zagreb index)
/// and `Σd³` (forgotten index).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeIndices {
    pub sum_d: u128,
    pub sum_d2: u128,
    pub sum_d3: u128,
    pub n: usize,
}

impl DegreeIndices {
    pub fn from_degrees(degrees: &[usize]) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::EmptyInput);
        }
        let (mut s1, mut s2, mut s3) = (0u128, 0u128, 0u128);
        for &d in degrees {
            let d = d as u128;
            s1 += d;
            s2 += d * d;
            s3 += d * d * d;
        }
        let idx = Self {
            sum_d: s1,
            sum_d2: s2,
            sum_d3: s3,
            n: degrees.len(),
        };
        debug_assert!(idx.cauchy_schwarz_holds());
        Ok(idx)
    }

    /// `Σd · Σd³ ≥ (Σd²)²`, evaluated exactly.
    pub fn cauchy_schwarz_holds(&self) -> bool {
        self.sum_d * self.sum_d3 >= self.sum_d2 * self.sum_d2
    }

    pub fn zagreb(&self) -> f64 {
        self.sum_d2 as f64
    }

    pub fn forgotten(&self) -> f64 {
        self.sum_d3 as f64
    }
}

fn require_positive_degrees(degrees: &[usize]) -> Result<DegreeIndices> {
    if let Some(v) = degrees.iter().position(|&d| d == 0) {
        return Err(Error::IsolatedVertex(v));
    }
    DegreeIndices::from_degrees(degrees)
}

/// Arithmetic mean over root mean square of the degrees, `Σd / √(n Σd²)`.
pub fn mean_rms_ratio(degrees: &[usize]) -> Result<f64> {
    let idx = require_positive_degrees(degrees)?;
    Ok(idx.sum_d as f64 / (idx.n as f64 * idx.sum_d2 as f64).sqrt())
}

/// Large-order expectation of the leading-row correlation coefficient for a
/// `G(n, p)` factor.
pub fn expected_r1j(n: usize, p: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("order must be at least 2, got {n}")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("edge probability {p} outside (0, 1)")));
    }
    let np = (n - 1) as f64 * p;
    Ok((np / (1.0 - p + np)).sqrt())
}

/// `Σd² / √(Σd³ · Σd) · r`.
pub fn rprime_lower_bound(degrees: &[usize], r_second: f64) -> Result<f64> {
    let idx = require_positive_degrees(degrees)?;
    let num = idx.sum_d2 as f64;
    let den = (idx.sum_d3 as f64 * idx.sum_d as f64).sqrt();
    Ok(num / den * r_second)
}

/// `(n − 2)p³ − 3(n − 2)p² + (2n − 5)p + 1`.
pub fn asymptotic_polynomial(n: usize, p: f64) -> f64 {
    let n = n as f64;
    (n - 2.0) * p.powi(3) - 3.0 * (n - 2.0) * p * p + (2.0 * n - 5.0) * p + 1.0
}

pub fn asymptotic_inequality_holds(n: usize, p: f64) -> bool {
    asymptotic_polynomial(n, p) >= -INEQUALITY_SLACK
}

/// Distinct eigenvalues with multiplicities of the normalized Laplacian of
/// `p(J − I) ⊗ p(J − I)` for orders `n1`, `n2`. Independent of `p`.
pub fn expected_kron_normalized_spectrum(n1: usize, n2: usize) -> Result<Vec<(f64, usize)>> {
    if n1 < 2 || n2 < 2 {
        return Err(Error::InvalidParameter(format!(
            "orders must be at least 2, got ({n1}, {n2})"
        )));
    }
    let (a, b) = (n1 as f64, n2 as f64);
    Ok(vec![
        (0.0, 1),
        (b / (b - 1.0), n2 - 1),
        (a / (a - 1.0), n1 - 1),
        (1.0 - 1.0 / ((a - 1.0) * (b - 1.0)), (n1 - 1) * (n2 - 1)),
    ])
}

/// Expands `(value, multiplicity)` pairs into an ascending list.
pub fn expand_multiset(levels: &[(f64, usize)]) -> Vec<f64> {
    let mut out: Vec<f64> = levels.iter().flat_map(|&(v, m)| std::iter::repeat_n(v, m)).collect();
    out.sort_by(f64::total_cmp);
    out
}

/// `μ_i ≤ 2 d_i + 1e-9` for sorted Laplacian eigenvalues and degrees.
pub fn sayama_bound_holds(mu: &[f64], degrees: &[usize]) -> Result<bool> {
    if mu.len() != degrees.len() {
        return Err(Error::DimensionMismatch {
            expected: degrees.len(),
            actual: mu.len(),
        });
    }
    Ok(mu
        .iter()
        .zip(degrees)
        .all(|(&m, &d)| m <= 2.0 * d as f64 + INEQUALITY_SLACK))
}

/// Degree sequence `1, 2, …, k, k+1, k+1, k+2, …, 2k+1` of order `2k + 2`.
pub fn staircase_degrees(k: usize) -> Vec<usize> {
    let mut d: Vec<usize> = (1..=k + 1).collect();
    d.extend(k + 1..=2 * k + 1);
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{weighted_normalized_laplacian, Graph};
    use crate::matrix::SymMatrix;
    use crate::spectral::{sym_eig, DEFAULT_TOL};
    use proptest::prelude::*;

    #[test]
    fn mean_rms_examples() {
        // Star K_{1,4}: 2√(n−1)/n.
        let star = [4, 1, 1, 1, 1];
        assert!((mean_rms_ratio(&star).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(mean_rms_ratio(&[3; 10]).unwrap(), 1.0);
        // K_{2,4}: 2√(2n−4)/n with n = 6.
        let k24 = [4, 4, 2, 2, 2, 2];
        assert!((mean_rms_ratio(&k24).unwrap() - 2.0 * 8f64.sqrt() / 6.0).abs() < 1e-15);
        assert!(matches!(mean_rms_ratio(&[]), Err(Error::EmptyInput)));
        assert!(mean_rms_ratio(&[1, 0, 1]).is_err());
    }

    #[test]
    fn expected_r1j_examples() {
        assert!((expected_r1j(30, 0.1).unwrap() - (2.9f64 / 3.8).sqrt()).abs() < 1e-15);
        assert!((expected_r1j(30, 0.1).unwrap() - 0.87359).abs() < 1e-5);
        assert!(expected_r1j(30, 1.0 - 1e-12).unwrap() > 1.0 - 1e-10);
        for p in [0.1, 0.3, 0.65] {
            let series: Vec<f64> = [10, 30, 100, 1000, 100_000]
                .iter()
                .map(|&n| expected_r1j(n, p).unwrap())
                .collect();
            assert!(series.windows(2).all(|w| w[0] < w[1]));
            assert!(1.0 - series[4] < 1e-4);
        }
        assert!(expected_r1j(1, 0.5).is_err());
        assert!(expected_r1j(10, 0.0).is_err());
    }

    #[test]
    fn lower_bound_examples() {
        assert!((rprime_lower_bound(&[4; 7], 1.0).unwrap() - 1.0).abs() < 1e-15);
        // Star K_{1,3}: Σd² = 12, Σd³ = 30, Σd = 6.
        assert!((rprime_lower_bound(&[3, 1, 1, 1], 1.0).unwrap() - 12.0 / 180f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn polynomial_examples() {
        assert!(asymptotic_inequality_holds(1, 0.5));
        assert!((asymptotic_polynomial(2, 0.9) - 0.1).abs() < 1e-12);
        for p in [0.1, 0.5, 0.77] {
            assert!((asymptotic_polynomial(1, p) - (1.0 - p).powi(3)).abs() < 1e-12);
        }
    }

    #[test]
    fn polynomial_nonnegative_on_grid() {
        for n in 1..=500 {
            for step in 1..100 {
                let p = step as f64 / 100.0;
                assert!(asymptotic_inequality_holds(n, p), "n={n} p={p}");
            }
        }
    }

    #[test]
    fn expected_spectrum_small_case() {
        let s = expected_kron_normalized_spectrum(3, 3).unwrap();
        assert_eq!(s, vec![(0.0, 1), (1.5, 2), (1.5, 2), (0.75, 4)]);
        assert!(expected_kron_normalized_spectrum(1, 4).is_err());
        for (a, b) in [(2, 2), (5, 7), (30, 50)] {
            let total: usize = expected_kron_normalized_spectrum(a, b)
                .unwrap()
                .iter()
                .map(|l| l.1)
                .sum();
            assert_eq!(total, a * b);
        }
    }

    #[test]
    fn expected_spectrum_matches_weighted_laplacian() {
        let (n1, n2) = (5, 7);
        for p in [0.2, 0.65] {
            let j1 = SymMatrix::from_lower(n1, |i, j| if i == j { 0.0 } else { p });
            let j2 = SymMatrix::from_lower(n2, |i, j| if i == j { 0.0 } else { p });
            let lap = weighted_normalized_laplacian(&j1.kron(&j2)).unwrap();
            let eig = sym_eig(&lap, DEFAULT_TOL).unwrap().eigenvalues;
            let predicted = expand_multiset(&expected_kron_normalized_spectrum(n1, n2).unwrap());
            for (a, b) in eig.iter().zip(&predicted) {
                assert!((a - b).abs() < 1e-8, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn sayama_bound_examples() {
        assert!(sayama_bound_holds(&[0.0, 1.0, 1.0, 4.0], &[1, 1, 1, 3]).unwrap());
        assert!(!sayama_bound_holds(&[0.0, 3.0], &[1, 1]).unwrap());
        assert!(sayama_bound_holds(&[0.0], &[1, 1]).is_err());
        let c7 = Graph::from_edges(7, &(0..7).map(|i| (i, (i + 1) % 7)).collect::<Vec<_>>()).unwrap();
        let mu = sym_eig(&c7.laplacian(), DEFAULT_TOL).unwrap().eigenvalues;
        assert!(sayama_bound_holds(&mu, &c7.sorted_degrees()).unwrap());
    }

    #[test]
    fn staircase_tends_to_root_three_over_two() {
        assert_eq!(staircase_degrees(2), vec![1, 2, 3, 3, 4, 5]);
        let target = 3f64.sqrt() / 2.0;
        let r = mean_rms_ratio(&staircase_degrees(500)).unwrap();
        assert!((r - target).abs() < 1e-3);
        // Closed form for the same sequence: 1/√(4/3 − 1/(2(k+1)) + 1/(6(k+1)²)).
        for k in [1usize, 5, 40] {
            let kk = (k + 1) as f64;
            let closed = 1.0 / (4.0 / 3.0 - 1.0 / (2.0 * kk) + 1.0 / (6.0 * kk * kk)).sqrt();
            assert!((mean_rms_ratio(&staircase_degrees(k)).unwrap() - closed).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn ratio_and_bound_never_exceed_one(degrees in proptest::collection::vec(1usize..60, 1..80)) {
            let idx = DegreeIndices::from_degrees(&degrees).unwrap();
            prop_assert!(idx.cauchy_schwarz_holds());
            let r = mean_rms_ratio(&degrees).unwrap();
            prop_assert!(r > 0.0 && r <= 1.0 + 1e-15);
            let constant = degrees.iter().all(|&d| d == degrees[0]);
            prop_assert_eq!((r - 1.0).abs() < 1e-15, constant);
            prop_assert!(rprime_lower_bound(&degrees, 1.0).unwrap() <= 1.0 + 1e-15);
        }

        #[test]
        fn laplacian_eigenvalues_respect_twice_degree(bits in proptest::collection::vec(any::<bool>(), 66)) {
            let n = 12;
            let mut edges = Vec::new();
            let mut k = 0;
            for u in 0..n {
                for v in u + 1..n {
                    if bits[k] {
                        edges.push((u, v));
                    }
                    k += 1;
                }
            }
            let g = Graph::from_edges(n, &edges).unwrap();
            let mu = sym_eig(&g.laplacian(), DEFAULT_TOL).unwrap().eigenvalues;
            prop_assert!(sayama_bound_holds(&mu, &g.sorted_degrees()).unwrap());
        }
    }
}
