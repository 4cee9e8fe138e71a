use kronspec::estimators::{normalized_estimate, sayama_spectrum};
use kronspec::graph::kronecker_laplacian;
use kronspec::random::{cycle, erdos_renyi};
use kronspec::spectral::{sym_eig, sym_eigenvalues, DEFAULT_TOL};
use kronspec::{Graph, Ordering};
use proptest::prelude::*;

fn complete(n: usize) -> Graph {
    let edges: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    Graph::from_edges(n, &edges).unwrap()
}

fn no_isolated(g: &Graph) -> bool {
    g.degrees().iter().all(|&d| d > 0)
}

fn arb_graph() -> impl Strategy<Value = Graph> {
    (3usize..9, 0.3f64..0.9, any::<u64>())
        .prop_map(|(n, p, seed)| erdos_renyi(n, p, seed).unwrap())
        .prop_filter("no isolated vertices", no_isolated)
}

fn assert_close(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() <= tol, "{x} vs {y}");
    }
}

fn both_estimates(g: &Graph, h: &Graph) -> (Vec<f64>, Vec<f64>) {
    let (eg, eh) = (
        sym_eig(&g.laplacian(), DEFAULT_TOL).unwrap(),
        sym_eig(&h.laplacian(), DEFAULT_TOL).unwrap(),
    );
    let (ng, nh) = (
        sym_eig(&g.normalized_laplacian().unwrap(), DEFAULT_TOL).unwrap(),
        sym_eig(&h.normalized_laplacian().unwrap(), DEFAULT_TOL).unwrap(),
    );
    let (dg, dh) = (g.sorted_degrees(), h.sorted_degrees());
    let ordering = Ordering::correlated();
    let s = sayama_spectrum(&eg.eigenvalues, &dg, &eh.eigenvalues, &dh, &ordering).unwrap();
    let n = normalized_estimate(&ng.eigenvalues, &dg, &nh.eigenvalues, &dh, &ordering).unwrap();
    (s.sorted_values(), n.sorted_values())
}

#[test]
fn estimators_are_exact_on_regular_factors() {
    for (g, h) in [
        (complete(4), complete(5)),
        (cycle(5).unwrap(), cycle(6).unwrap()),
        (complete(3), cycle(7).unwrap()),
    ] {
        let exact = sym_eigenvalues(&kronecker_laplacian(&g, &h)).unwrap();
        let (s, n) = both_estimates(&g, &h);
        assert_close(&s, &exact, 1e-9);
        assert_close(&n, &exact, 1e-9);
    }
}

#[test]
fn complete_graph_product_spectrum() {
    // K_a x K_b: L = (a-1)(b-1) I - (J-I)⊗(J-I), adjacency eigenvalues (a-1)(b-1), -(a-1), -(b-1), 1
    let (a, b) = (3usize, 4usize);
    let exact = sym_eigenvalues(&kronecker_laplacian(&complete(a), &complete(b))).unwrap();
    let r = ((a - 1) * (b - 1)) as f64;
    let mut expected = vec![0.0];
    expected.extend(std::iter::repeat_n(r + (a - 1) as f64, b - 1));
    expected.extend(std::iter::repeat_n(r + (b - 1) as f64, a - 1));
    expected.extend(std::iter::repeat_n(r - 1.0, (a - 1) * (b - 1)));
    expected.sort_by(f64::total_cmp);
    assert_close(&exact, &expected, 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn product_laplacian_is_psd_with_trace_of_degree_products(g in arb_graph(), h in arb_graph()) {
        let mu = sym_eigenvalues(&kronecker_laplacian(&g, &h)).unwrap();
        prop_assert!(mu[0] > -1e-9);
        let trace: f64 = mu.iter().sum();
        let degree_sum: usize = g.degrees().iter().sum::<usize>() * h.degrees().iter().sum::<usize>();
        prop_assert!((trace - degree_sum as f64).abs() < 1e-8 * degree_sum as f64);
    }

    #[test]
    fn product_normalized_spectrum_is_determined_by_factors(g in arb_graph(), h in arb_graph()) {
        let lg = sym_eig(&g.normalized_laplacian().unwrap(), DEFAULT_TOL).unwrap().eigenvalues;
        let lh = sym_eig(&h.normalized_laplacian().unwrap(), DEFAULT_TOL).unwrap().eigenvalues;
        let mut predicted: Vec<f64> = lg.iter().flat_map(|a| lh.iter().map(move |b| 1.0 - (1.0 - a) * (1.0 - b))).collect();
        predicted.sort_by(f64::total_cmp);
        let numeric = sym_eigenvalues(&g.kronecker(&h).normalized_laplacian().unwrap()).unwrap();
        for (x, y) in numeric.iter().zip(&predicted) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn estimates_have_one_value_per_product_vertex(g in arb_graph(), h in arb_graph()) {
        let (s, n) = both_estimates(&g, &h);
        prop_assert_eq!(s.len(), g.order() * h.order());
        prop_assert_eq!(n.len(), g.order() * h.order());
        prop_assert_eq!(s[0], 0.0);
        prop_assert_eq!(n[0], 0.0);
        prop_assert!(s.iter().all(|v| *v >= 0.0));
    }
}
