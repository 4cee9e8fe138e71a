//! Spectrum estimates for the Laplacian of a Kronecker product built from
//! factor spectra and degree sequences.
//!
//! Both estimators pair each factor's eigenvalues with its ascending degree
//! sequence. How the eigenvalues are arranged against the degrees is the
//! [`Ordering`]; the default pairs both in ascending order.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::spectral::kron_vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrderingKind {
    Uncorrelated,
    Correlated,
    CorrelatedRandomized,
    AntiCorrelated,
    AntiCorrelatedRandomized,
}

impl OrderingKind {
    pub fn is_randomized(self) -> bool {
        matches!(
            self,
            OrderingKind::CorrelatedRandomized | OrderingKind::AntiCorrelatedRandomized
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            OrderingKind::Uncorrelated => "uncorrelated",
            OrderingKind::Correlated => "correlated",
            OrderingKind::CorrelatedRandomized => "correlated-randomized",
            OrderingKind::AntiCorrelated => "anti-correlated",
            OrderingKind::AntiCorrelatedRandomized => "anti-correlated-randomized",
        }
    }
}

impl std::str::FromStr for OrderingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use OrderingKind::*;
        [
            Uncorrelated,
            Correlated,
            CorrelatedRandomized,
            AntiCorrelated,
            AntiCorrelatedRandomized,
        ]
        .into_iter()
        .find(|k| k.name().eq_ignore_ascii_case(s))
        .ok_or_else(|| Error::InvalidParameter(format!("unknown ordering `{s}`")))
    }
}

/// How factor eigenvalues are arranged against the ascending degree sequence.
///
/// `swap_count` only applies to the randomized kinds; `None` there means a
/// quarter of the factor order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ordering {
    pub kind: OrderingKind,
    #[serde(default)]
    pub randomization_seed: u64,
    #[serde(default)]
    pub swap_count: Option<usize>,
}

impl Default for Ordering {
    fn default() -> Self {
        Self::correlated()
    }
}

impl Ordering {
    pub fn new(kind: OrderingKind, randomization_seed: u64, swap_count: Option<usize>) -> Result<Self> {
        let ordering = Self {
            kind,
            randomization_seed,
            swap_count,
        };
        ordering.validate()?;
        Ok(ordering)
    }

    pub fn correlated() -> Self {
        Self {
            kind: OrderingKind::Correlated,
            randomization_seed: 0,
            swap_count: None,
        }
    }

    pub fn anti_correlated() -> Self {
        Self {
            kind: OrderingKind::AntiCorrelated,
            ..Self::correlated()
        }
    }

    pub fn uncorrelated(seed: u64) -> Self {
        Self {
            kind: OrderingKind::Uncorrelated,
            randomization_seed: seed,
            swap_count: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.kind.is_randomized() && self.swap_count.is_some_and(|s| s != 0) {
            return Err(Error::InvalidParameter(format!(
                "swap_count is only meaningful for randomized orderings, got {} for {}",
                self.swap_count.unwrap_or(0),
                self.kind.name()
            )));
        }
        Ok(())
    }

    /// Number of adjacent transpositions applied to a sequence of length `n`.
    pub fn effective_swaps(&self, n: usize) -> usize {
        if self.kind.is_randomized() {
            self.swap_count.unwrap_or(n / 4)
        } else {
            0
        }
    }

    /// Same ordering with the seed re-derived for another factor, so the two
    /// factors of a product are shuffled independently.
    fn for_stream(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.randomization_seed);
        rng.set_stream(stream);
        rng
    }
}

/// Index permutation `perm` such that `values[perm[k]]` is the eigenvalue
/// paired with the `k`-th smallest degree.
pub fn apply_ordering(values: &[f64], ordering: &Ordering) -> Vec<usize> {
    ordering_for_stream(values, ordering, 0)
}

fn ordering_for_stream(values: &[f64], ordering: &Ordering, stream: u64) -> Vec<usize> {
    let n = values.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let ascending = |perm: &mut Vec<usize>| {
        perm.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    };
    match ordering.kind {
        OrderingKind::Uncorrelated => {
            perm.shuffle(&mut ordering.for_stream(stream));
        }
        OrderingKind::Correlated | OrderingKind::CorrelatedRandomized => ascending(&mut perm),
        OrderingKind::AntiCorrelated | OrderingKind::AntiCorrelatedRandomized => {
            ascending(&mut perm);
            perm.reverse();
        }
    }
    let swaps = ordering.effective_swaps(n);
    if swaps > 0 && n >= 2 {
        let mut rng = ordering.for_stream(stream);
        for _ in 0..swaps {
            let k = rng.random_range(0..n - 1);
            perm.swap(k, k + 1);
        }
    }
    perm
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    SayamaLaplacian,
    NormalizedLaplacian,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::SayamaLaplacian, Method::NormalizedLaplacian];

    pub fn name(self) -> &'static str {
        match self {
            Method::SayamaLaplacian => "sayama-laplacian",
            Method::NormalizedLaplacian => "normalized-laplacian",
        }
    }
}

/// One estimated product eigenvalue with the factor eigenvalue indices it
/// came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatedEntry {
    pub value: f64,
    pub i: usize,
    pub j: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatedSpectrum {
    pub entries: Vec<EstimatedEntry>,
    pub method: Method,
    pub ordering: Ordering,
}

impl EstimatedSpectrum {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    pub fn sorted_values(&self) -> Vec<f64> {
        let mut v = self.values();
        v.sort_by(f64::total_cmp);
        v
    }
}

// Eigenvalues within this fraction of the largest one are treated as zero.
const ZERO_SNAP: f64 = 1e-9;

fn snap_zeros(values: &[f64]) -> Vec<f64> {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    values
        .iter()
        .map(|&v| if v <= ZERO_SNAP * scale { 0.0 } else { v })
        .collect()
}

fn check_lengths(values: &[f64], degrees: &[usize]) -> Result<()> {
    if values.len() != degrees.len() {
        return Err(Error::DimensionMismatch {
            expected: degrees.len(),
            actual: values.len(),
        });
    }
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if degrees.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("degree sequence must be ascending".into()));
    }
    Ok(())
}

fn pairwise(
    values1: &[f64],
    degrees1: &[usize],
    values2: &[f64],
    degrees2: &[usize],
    ordering: &Ordering,
    method: Method,
    combine: impl Fn(f64, f64, f64, f64) -> f64,
) -> Result<EstimatedSpectrum> {
    check_lengths(values1, degrees1)?;
    check_lengths(values2, degrees2)?;
    ordering.validate()?;
    let perm1 = ordering_for_stream(values1, ordering, 0);
    let perm2 = ordering_for_stream(values2, ordering, 1);
    let mut entries = Vec::with_capacity(values1.len() * values2.len());
    for (p, &i) in perm1.iter().enumerate() {
        let (x1, d1) = (values1[i], degrees1[p] as f64);
        for (q, &j) in perm2.iter().enumerate() {
            let (x2, d2) = (values2[j], degrees2[q] as f64);
            entries.push(EstimatedEntry {
                value: combine(x1, d1, x2, d2),
                i,
                j,
            });
        }
    }
    Ok(EstimatedSpectrum {
        entries,
        method,
        ordering: *ordering,
    })
}

/// Laplacian-eigenvalue estimate `μ d' + d μ' − μ μ'` over all factor pairs.
///
/// Values are nonnegative under the correlated ordering because sorted
/// Laplacian eigenvalues never exceed twice the sorted degrees; other
/// orderings can pair a large eigenvalue with a small degree and go negative.
pub fn sayama_spectrum(
    mu1: &[f64],
    d1: &[usize],
    mu2: &[f64],
    d2: &[usize],
    ordering: &Ordering,
) -> Result<EstimatedSpectrum> {
    let mu1 = snap_zeros(mu1);
    let mu2 = snap_zeros(mu2);
    pairwise(
        &mu1,
        d1,
        &mu2,
        d2,
        ordering,
        Method::SayamaLaplacian,
        |m1, d1, m2, d2| m1 * d2 + d1 * m2 - m1 * m2,
    )
}

/// Normalized-Laplacian estimate `(λ + λ' − λ λ') d d'` over all factor pairs.
pub fn normalized_estimate(
    lambda1: &[f64],
    d1: &[usize],
    lambda2: &[f64],
    d2: &[usize],
    ordering: &Ordering,
) -> Result<EstimatedSpectrum> {
    let clamp = |v: &[f64]| -> Vec<f64> { snap_zeros(v).into_iter().map(|x| x.min(2.0)).collect() };
    let (l1, l2) = (clamp(lambda1), clamp(lambda2));
    pairwise(
        &l1,
        d1,
        &l2,
        d2,
        ordering,
        Method::NormalizedLaplacian,
        |a, d1, b, d2| (a + b - a * b) * d1 * d2,
    )
}

/// `column i of basis1 ⊗ column j of basis2`.
pub fn estimated_eigenvector(i: usize, j: usize, basis1: &Matrix, basis2: &Matrix) -> Result<Vec<f64>> {
    for (idx, basis) in [(i, basis1), (j, basis2)] {
        if idx >= basis.cols() {
            return Err(Error::InvalidParameter(format!(
                "eigenvector index {idx} out of range for basis with {} columns",
                basis.cols()
            )));
        }
    }
    Ok(kron_vec(&basis1.column(i), &basis2.column(j)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{kronecker_laplacian, Graph};
    use crate::matrix::norm;
    use crate::spectral::{sym_eig, DEFAULT_TOL};
    use proptest::prelude::*;

    fn cycle(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    fn complete(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    fn laplacian_eigs(g: &Graph) -> Vec<f64> {
        sym_eig(&g.laplacian(), DEFAULT_TOL).unwrap().eigenvalues
    }

    fn normalized_eigs(g: &Graph) -> Vec<f64> {
        sym_eig(&g.normalized_laplacian().unwrap(), DEFAULT_TOL)
            .unwrap()
            .eigenvalues
    }

    fn both_estimates(g: &Graph, h: &Graph, ordering: &Ordering) -> [EstimatedSpectrum; 2] {
        let (d1, d2) = (g.sorted_degrees(), h.sorted_degrees());
        [
            sayama_spectrum(&laplacian_eigs(g), &d1, &laplacian_eigs(h), &d2, ordering).unwrap(),
            normalized_estimate(&normalized_eigs(g), &d1, &normalized_eigs(h), &d2, ordering).unwrap(),
        ]
    }

    fn assert_multiset_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{x} vs {y}");
        }
    }

    #[test]
    fn ordering_examples() {
        let v = [3.0, 1.0, 2.0];
        let pick = |perm: Vec<usize>| perm.iter().map(|&k| v[k]).collect::<Vec<_>>();
        assert_eq!(pick(apply_ordering(&v, &Ordering::correlated())), vec![1.0, 2.0, 3.0]);
        assert_eq!(
            pick(apply_ordering(&v, &Ordering::anti_correlated())),
            vec![3.0, 2.0, 1.0]
        );
    }

    #[test]
    fn zero_swaps_match_base_ordering() {
        let v: Vec<f64> = (0..20).map(|k| ((k * 7) % 20) as f64).collect();
        for (rand_kind, base) in [
            (OrderingKind::CorrelatedRandomized, Ordering::correlated()),
            (OrderingKind::AntiCorrelatedRandomized, Ordering::anti_correlated()),
        ] {
            let o = Ordering::new(rand_kind, 99, Some(0)).unwrap();
            assert_eq!(apply_ordering(&v, &o), apply_ordering(&v, &base));
        }
    }

    #[test]
    fn randomized_ordering_moves_entries_by_adjacent_swaps() {
        let v: Vec<f64> = (0..40).map(f64::from).collect();
        let o = Ordering::new(OrderingKind::CorrelatedRandomized, 5, None).unwrap();
        assert_eq!(o.effective_swaps(40), 10);
        let perm = apply_ordering(&v, &o);
        assert_ne!(perm, (0..40).collect::<Vec<_>>());
        // Ten adjacent swaps move no entry further than ten places.
        assert!(perm.iter().enumerate().all(|(k, &p)| k.abs_diff(p) <= 10));
        assert_eq!(perm, apply_ordering(&v, &o));
    }

    #[test]
    fn uncorrelated_is_seeded_permutation() {
        let v: Vec<f64> = (0..30).map(f64::from).collect();
        let a = apply_ordering(&v, &Ordering::uncorrelated(1));
        let mut sorted = a.clone();
        sorted.sort();
        assert_eq!(sorted, (0..30).collect::<Vec<_>>());
        assert_eq!(a, apply_ordering(&v, &Ordering::uncorrelated(1)));
        assert_ne!(a, apply_ordering(&v, &Ordering::uncorrelated(2)));
    }

    #[test]
    fn swap_count_rejected_for_plain_kinds() {
        assert!(Ordering::new(OrderingKind::Correlated, 0, Some(3)).is_err());
        assert!(Ordering::new(OrderingKind::Correlated, 0, Some(0)).is_ok());
    }

    #[test]
    fn k2_factors_match_brute_force_product() {
        let k2 = complete(2);
        // Brute-force spectrum of the 4×4 product Laplacian.
        let mut exact = sym_eig(&kronecker_laplacian(&k2, &k2), DEFAULT_TOL)
            .unwrap()
            .eigenvalues;
        exact.sort_by(f64::total_cmp);
        assert_multiset_close(&exact, &[0.0, 0.0, 2.0, 2.0], 1e-12);
        let ord = Ordering::correlated();
        let s = sayama_spectrum(&[0.0, 2.0], &[1, 1], &[0.0, 2.0], &[1, 1], &ord).unwrap();
        assert_eq!(s.values(), vec![0.0, 2.0, 2.0, 0.0]);
        let n = normalized_estimate(&[0.0, 2.0], &[1, 1], &[0.0, 2.0], &[1, 1], &ord).unwrap();
        assert_eq!(n.values(), vec![0.0, 2.0, 2.0, 0.0]);
        assert_multiset_close(&s.sorted_values(), &exact, 1e-12);
    }

    #[test]
    fn regular_factors_reproduce_exact_spectrum() {
        for (g, h) in [(cycle(4), complete(3)), (cycle(6), cycle(4))] {
            let mut exact = sym_eig(&kronecker_laplacian(&g, &h), DEFAULT_TOL).unwrap().eigenvalues;
            exact.sort_by(f64::total_cmp);
            for ordering in [
                Ordering::correlated(),
                Ordering::anti_correlated(),
                Ordering::uncorrelated(3),
            ] {
                for est in both_estimates(&g, &h, &ordering) {
                    assert_multiset_close(&est.sorted_values(), &exact, 1e-9);
                }
            }
        }
    }

    #[test]
    fn zero_pair_is_exactly_zero() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (1, 3)]).unwrap();
        let h = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        for est in both_estimates(&g, &h, &Ordering::correlated()) {
            let first = est.entries.iter().find(|e| e.i == 0 && e.j == 0).unwrap();
            assert_eq!(first.value, 0.0);
            assert_eq!(est.len(), 20);
        }
    }

    #[test]
    fn orderings_change_estimate_for_irregular_factors() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 2), (0, 3)]).unwrap();
        let h = Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4), (1, 2)]).unwrap();
        let corr = both_estimates(&g, &h, &Ordering::correlated());
        let anti = both_estimates(&g, &h, &Ordering::anti_correlated());
        for (c, a) in corr.iter().zip(&anti) {
            let diff = c
                .sorted_values()
                .iter()
                .zip(a.sorted_values())
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            assert!(diff > 1e-3);
        }
    }

    #[test]
    fn length_mismatch_and_unsorted_degrees_rejected() {
        let ord = Ordering::correlated();
        assert!(matches!(
            sayama_spectrum(&[0.0, 2.0], &[1], &[0.0], &[0], &ord),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(normalized_estimate(&[0.0, 1.0], &[2, 1], &[0.0], &[0], &ord).is_err());
    }

    #[test]
    fn leading_laplacian_pair_is_exact_null_vector() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 2)]).unwrap();
        let h = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2)]).unwrap();
        let lg = sym_eig(&g.laplacian(), DEFAULT_TOL).unwrap();
        let lh = sym_eig(&h.laplacian(), DEFAULT_TOL).unwrap();
        let x = estimated_eigenvector(0, 0, &lg.eigenvectors, &lh.eigenvectors).unwrap();
        assert!((norm(&x) - 1.0).abs() < 1e-12);
        let lx = kronecker_laplacian(&g, &h).matvec(&x).unwrap();
        assert!(norm(&lx) < 1e-9);

        // The normalized null vectors point along D^{1/2}1, which the product
        // Laplacian does not annihilate for irregular factors.
        let ng = sym_eig(&g.normalized_laplacian().unwrap(), DEFAULT_TOL).unwrap();
        let nh = sym_eig(&h.normalized_laplacian().unwrap(), DEFAULT_TOL).unwrap();
        let y = estimated_eigenvector(0, 0, &ng.eigenvectors, &nh.eigenvectors).unwrap();
        let ly = kronecker_laplacian(&g, &h).matvec(&y).unwrap();
        assert!(norm(&ly) > 1e-3);
        assert!(estimated_eigenvector(5, 0, &ng.eigenvectors, &nh.eigenvectors).is_err());
    }

    fn arb_connected() -> impl Strategy<Value = Graph> {
        (3usize..12, proptest::collection::vec(any::<bool>(), 66)).prop_map(|(n, bits)| {
            // A path keeps the graph connected; extra edges come from `bits`.
            let mut edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
            let mut k = 0;
            for i in 0..n {
                for j in i + 2..n {
                    if bits[k % bits.len()] {
                        edges.push((i, j));
                    }
                    k += 1;
                }
            }
            Graph::from_edges(n, &edges).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn estimates_are_nonnegative(g in arb_connected(), h in arb_connected(), seed in any::<u64>()) {
            let [s, n] = both_estimates(&g, &h, &Ordering::correlated());
            prop_assert!(s.values().iter().all(|&v| v >= -1e-12));
            prop_assert!(n.values().iter().all(|&v| v >= -1e-12));
            prop_assert_eq!(n.entries.iter().find(|e| e.i == 0 && e.j == 0).unwrap().value, 0.0);
            let [_, n_any] = both_estimates(&g, &h, &Ordering::uncorrelated(seed));
            prop_assert!(n_any.values().iter().all(|&v| v >= -1e-12));
        }
    }
}
