use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{derive_seed, VERSION};
use crate::error::{Error, Result};
use crate::graph::{kronecker_laplacian, weighted_normalized_laplacian, Graph};
use crate::matrix::{norm, SymMatrix};
use crate::metrics::{correlation_profile, factored_correlation_profile};
use crate::random::{generate_connected, GeneratorSpec, Model};
use crate::spectral::{cosine, kron_vec, sym_eig, sym_eigenvalues, DEFAULT_TOL};
use crate::theory::{
    asymptotic_inequality_holds, asymptotic_polynomial, expand_multiset, expected_kron_normalized_spectrum,
    expected_r1j, mean_rms_ratio, rprime_lower_bound, sayama_bound_holds, staircase_degrees, DegreeIndices,
    INEQUALITY_SLACK,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryOptions {
    pub seed: u64,
    /// ER draws for the large-order expectation check.
    pub mc_draws: usize,
    /// Factor pairs for the normalized-basis lower bound.
    pub bound_pairs: usize,
    /// Graphs for the twice-degree eigenvalue bound.
    pub bound_graphs: usize,
    /// Draws per cell of the expectation grid.
    pub grid_draws: usize,
}

impl Default for TheoryOptions {
    fn default() -> Self {
        Self {
            seed: 1,
            mc_draws: 100,
            bound_pairs: 50,
            bound_graphs: 10_000,
            grid_draws: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryCheck {
    #[serde(skip)]
    pub id: String,
    pub inputs: Value,
    pub predicted: Value,
    pub observed: Value,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub version: String,
    pub checks: BTreeMap<String, TheoryCheck>,
}

impl TheoryReport {
    pub fn all_passed(&self) -> bool {
        self.checks.values().all(|c| c.pass)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|(_, c)| !c.pass)
            .map(|(id, _)| id.as_str())
            .collect()
    }
}

fn check(id: &str, inputs: Value, predicted: Value, observed: Value, pass: bool) -> TheoryCheck {
    TheoryCheck {
        id: id.to_string(),
        inputs,
        predicted,
        observed,
        pass,
    }
}

fn complete(n: usize) -> Graph {
    let edges: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    Graph::from_edges(n, &edges).expect("valid complete graph")
}

fn complete_bipartite(a: usize, b: usize) -> Graph {
    let edges: Vec<_> = (0..a).flat_map(|i| (a..a + b).map(move |j| (i, j))).collect();
    Graph::from_edges(a + b, &edges).expect("valid bipartite graph")
}

fn random_er(
    rng: &mut ChaCha8Rng,
    n_range: std::ops::RangeInclusive<usize>,
    p_range: std::ops::Range<f64>,
) -> Result<Graph> {
    let n = rng.random_range(n_range);
    let p = rng.random_range(p_range);
    generate_connected(&GeneratorSpec::new(Model::Er, n, p, rng.random()))
}

fn mean_rms_closed_form() -> Result<TheoryCheck> {
    let second = complete(3);
    let cases = [
        ("star_k1_4", complete_bipartite(1, 4), 2.0 * 4f64.sqrt() / 5.0),
        ("bipartite_k2_4", complete_bipartite(2, 4), 2.0 * 8f64.sqrt() / 6.0),
        (
            "cycle_7",
            Graph::from_edges(7, &(0..7).map(|i| (i, (i + 1) % 7)).collect::<Vec<_>>())?,
            1.0,
        ),
    ];
    let mut predicted = serde_json::Map::new();
    let mut observed = serde_json::Map::new();
    let mut pass = true;
    for (name, g, closed) in cases {
        let formula = mean_rms_ratio(g.degrees())?;
        let bg = sym_eig(&g.laplacian(), DEFAULT_TOL)?.eigenvectors;
        let bh = sym_eig(&second.laplacian(), DEFAULT_TOL)?.eigenvectors;
        let profile = correlation_profile(&kronecker_laplacian(&g, &second), &bg, &bh, true)?;
        let row: Vec<f64> = (1..second.order())
            .map(|j| profile.get(0, j).unwrap_or(f64::NAN))
            .collect();
        let gap = row.iter().map(|r| (r - closed).abs()).fold(0.0, f64::max);
        pass &= gap <= 1e-10 && (formula - closed).abs() <= 1e-12;
        predicted.insert(name.into(), json!(closed));
        observed.insert(name.into(), json!({ "r_1j": row, "max_abs_gap": gap }));
    }
    Ok(check(
        "mean_rms_closed_form",
        json!({ "second_factor": "K3", "basis": "laplacian" }),
        Value::Object(predicted),
        Value::Object(observed),
        pass,
    ))
}

fn expected_r1j_grid(options: &TheoryOptions) -> Result<TheoryCheck> {
    let orders = [30usize, 50, 100, 200];
    let probs = [0.10, 0.30, 0.65];
    let mut rows = Vec::new();
    let mut pass = true;
    for (pi, &p) in probs.iter().enumerate() {
        let mut prev = 0.0;
        for (ni, &n) in orders.iter().enumerate() {
            let predicted = expected_r1j(n, p)?;
            pass &= predicted > prev && predicted < 1.0;
            prev = predicted;
            let mut sum = 0.0;
            for draw in 0..options.grid_draws {
                let seed = derive_seed(options.seed, pi * 1000 + ni * 100 + draw, "grid");
                let g = generate_connected(&GeneratorSpec::new(Model::Er, n, p, seed))?;
                sum += mean_rms_ratio(g.degrees())?;
            }
            let observed = sum / options.grid_draws.max(1) as f64;
            rows.push(json!({ "n": n, "p": p, "predicted": predicted, "observed_mean": observed, "gap": observed - predicted }));
        }
    }
    Ok(check(
        "expected_r1j_grid",
        json!({ "orders": orders, "densities": probs, "draws": options.grid_draws }),
        json!("increasing in n, below 1"),
        json!(rows),
        pass,
    ))
}

fn expected_r1j_monte_carlo(options: &TheoryOptions) -> Result<TheoryCheck> {
    let (n, p) = (200usize, 0.3);
    let predicted = expected_r1j(n, p)?;
    let mut means = Vec::with_capacity(options.mc_draws);
    for draw in 0..options.mc_draws {
        let g = generate_connected(&GeneratorSpec::new(
            Model::Er,
            n,
            p,
            derive_seed(options.seed, draw, "mc1"),
        ))?;
        let h = generate_connected(&GeneratorSpec::new(
            Model::Er,
            10,
            0.5,
            derive_seed(options.seed, draw, "mc2"),
        ))?;
        let bg = sym_eig(&g.laplacian(), DEFAULT_TOL)?.eigenvectors;
        let bh = sym_eig(&h.laplacian(), DEFAULT_TOL)?.eigenvectors;
        let profile = factored_correlation_profile(&g, &h, &bg, &bh, true)?;
        let row: Vec<f64> = profile.entries.iter().filter(|e| e.i == 0).map(|e| e.r).collect();
        means.push(row.iter().sum::<f64>() / row.len() as f64);
    }
    let observed = means.iter().sum::<f64>() / means.len().max(1) as f64;
    Ok(check(
        "expected_r1j_monte_carlo",
        json!({ "n": n, "p": p, "draws": options.mc_draws, "tolerance": 0.02 }),
        json!(predicted),
        json!(observed),
        !means.is_empty() && (observed - predicted).abs() <= 0.02,
    ))
}

/// Slack `r′(1, j) − bound_j` for every `j` of one factor pair, using
/// normalized-Laplacian eigenvectors.
pub fn lower_bound_slacks(g: &Graph, h: &Graph) -> Result<Vec<f64>> {
    let vg = sym_eig(&g.normalized_laplacian()?, DEFAULT_TOL)?.eigenvectors;
    let vh = sym_eig(&h.normalized_laplacian()?, DEFAULT_TOL)?;
    let profile = factored_correlation_profile(g, h, &vg, &vh.eigenvectors, false)?;
    let lh = h.laplacian();
    let mut slacks = Vec::with_capacity(h.order());
    for j in 0..h.order() {
        let v = vh.eigenvector(j);
        let r_second = match cosine(&v, &lh.matvec(&v)?) {
            Ok(r) => r,
            Err(Error::ZeroVector) => continue,
            Err(e) => return Err(e),
        };
        let observed = profile.get(0, j).expect("profile covers every pair");
        slacks.push(observed - rprime_lower_bound(g.degrees(), r_second)?);
    }
    Ok(slacks)
}

fn rprime_lower_bound_check(options: &TheoryOptions) -> Result<TheoryCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(options.seed, 0, "rprime"));
    let (mut worst, mut violations, mut total) = (f64::INFINITY, 0usize, 0usize);
    for _ in 0..options.bound_pairs {
        let g = random_er(&mut rng, 10..=30, 0.2..0.6)?;
        let h = random_er(&mut rng, 10..=30, 0.2..0.6)?;
        for s in lower_bound_slacks(&g, &h)? {
            total += 1;
            worst = worst.min(s);
            if s < -INEQUALITY_SLACK {
                violations += 1;
            }
        }
    }
    Ok(check(
        "rprime_lower_bound",
        json!({ "pairs": options.bound_pairs, "orders": "10..=30", "p": "0.2..0.6", "basis": "normalized" }),
        json!("r'(1,j) >= M1 / sqrt(2m F) * r_j for every j"),
        json!({ "min_slack": worst, "violations": violations, "checked": total }),
        violations == 0,
    ))
}

fn asymptotic_polynomial_check() -> TheoryCheck {
    let mut min = (f64::INFINITY, 0usize, 0.0);
    let mut pass = true;
    for n in 1..=500 {
        for step in 1..100 {
            let p = step as f64 / 100.0;
            let v = asymptotic_polynomial(n, p);
            pass &= asymptotic_inequality_holds(n, p);
            if v < min.0 {
                min = (v, n, p);
            }
        }
    }
    check(
        "asymptotic_polynomial",
        json!({ "n": "1..=500", "p": "0.01..=0.99 step 0.01" }),
        json!(">= 0"),
        json!({ "min": min.0, "at_n": min.1, "at_p": min.2 }),
        pass,
    )
}

fn expected_spectrum_check() -> Result<TheoryCheck> {
    let mut observed = Vec::new();
    let mut pass = true;
    for (n1, n2, p) in [(5usize, 7usize, 0.4), (30, 50, 0.3)] {
        let j1 = SymMatrix::from_lower(n1, |i, j| if i == j { 0.0 } else { p });
        let j2 = SymMatrix::from_lower(n2, |i, j| if i == j { 0.0 } else { p });
        let lap = weighted_normalized_laplacian(&j1.kron(&j2))?;
        let numeric = sym_eigenvalues(&lap)?;
        let predicted = expand_multiset(&expected_kron_normalized_spectrum(n1, n2)?);
        let gap = numeric
            .iter()
            .zip(&predicted)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        pass &= gap <= 1e-8;
        observed.push(json!({ "n1": n1, "n2": n2, "p": p, "max_abs_gap": gap }));
    }
    Ok(check(
        "expected_kron_normalized_spectrum",
        json!({ "orders": [[5, 7], [30, 50]], "tolerance": 1e-8 }),
        json!({
            "5x7": expected_kron_normalized_spectrum(5, 7)?,
            "30x50": expected_kron_normalized_spectrum(30, 50)?,
        }),
        json!(observed),
        pass,
    ))
}

fn sayama_bound_check(options: &TheoryOptions) -> Result<TheoryCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(options.seed, 0, "sayama"));
    let (mut violations, mut cs_failures) = (0usize, 0usize);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..options.bound_graphs {
        let g = random_er(&mut rng, 5..=40, 0.35..0.9)?;
        let mu = sym_eig(&g.laplacian(), DEFAULT_TOL)?.eigenvalues;
        let d = g.sorted_degrees();
        if !sayama_bound_holds(&mu, &d)? {
            violations += 1;
        }
        if !DegreeIndices::from_degrees(&d)?.cauchy_schwarz_holds() {
            cs_failures += 1;
        }
        for (m, &deg) in mu.iter().zip(&d) {
            worst = worst.max(m - 2.0 * deg as f64);
        }
    }
    Ok(check(
        "sayama_bound",
        json!({ "graphs": options.bound_graphs, "orders": "5..=40", "p": "0.35..0.9" }),
        json!("mu_i <= 2 d_i (sorted); sum_d * sum_d3 >= sum_d2^2"),
        json!({ "violations": violations, "max_mu_minus_2d": worst, "cauchy_schwarz_failures": cs_failures }),
        violations == 0 && cs_failures == 0,
    ))
}

fn staircase_check() -> Result<TheoryCheck> {
    let k = 500;
    let observed = mean_rms_ratio(&staircase_degrees(k))?;
    let predicted = 3f64.sqrt() / 2.0;
    Ok(check(
        "staircase_limit",
        json!({ "k": k, "tolerance": 1e-3 }),
        json!(predicted),
        json!(observed),
        (observed - predicted).abs() <= 1e-3,
    ))
}

fn random_pairs(options: &TheoryOptions, role: &str, count: usize) -> Result<Vec<(Graph, Graph)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(options.seed, 0, role));
    (0..count)
        .map(|_| {
            Ok((
                random_er(&mut rng, 4..=12, 0.3..0.8)?,
                random_er(&mut rng, 4..=12, 0.3..0.8)?,
            ))
        })
        .collect()
}

fn colinearity_check(options: &TheoryOptions) -> Result<TheoryCheck> {
    let mut worst = 0.0f64;
    for (g, h) in random_pairs(options, "colinearity", 10)? {
        let l = kronecker_laplacian(&g, &h);
        let eh = sym_eig(&h.laplacian(), DEFAULT_TOL)?;
        let ones = vec![1.0; g.order()];
        let d: Vec<f64> = g.degrees().iter().map(|&x| x as f64).collect();
        for j in 0..h.order() {
            let w = eh.eigenvector(j);
            let lx = l.matvec(&kron_vec(&ones, &w))?;
            let rhs = kron_vec(&d, &w);
            let resid: Vec<f64> = lx.iter().zip(&rhs).map(|(a, b)| a - eh.eigenvalues[j] * b).collect();
            worst = worst.max(norm(&resid));
        }
    }
    Ok(check(
        "colinearity_identity",
        json!({ "pairs": 10, "tolerance": 1e-8 }),
        json!("L(1 ⊗ w_j) = mu_j (d ⊗ w_j)"),
        json!({ "max_residual": worst }),
        worst <= 1e-8,
    ))
}

fn normalized_decomposition_check(options: &TheoryOptions) -> Result<TheoryCheck> {
    let (mut value_gap, mut residual) = (0.0f64, 0.0f64);
    for (g, h) in random_pairs(options, "normalized", 10)? {
        let product = g.kronecker(&h).normalized_laplacian()?;
        let eg = sym_eig(&g.normalized_laplacian()?, DEFAULT_TOL)?;
        let eh = sym_eig(&h.normalized_laplacian()?, DEFAULT_TOL)?;
        let mut predicted = Vec::new();
        for i in 0..g.order() {
            for j in 0..h.order() {
                let value = 1.0 - (1.0 - eg.eigenvalues[i]) * (1.0 - eh.eigenvalues[j]);
                predicted.push(value);
                let x = kron_vec(&eg.eigenvector(i), &eh.eigenvector(j));
                let lx = product.matvec(&x)?;
                let r: Vec<f64> = lx.iter().zip(&x).map(|(a, b)| a - value * b).collect();
                residual = residual.max(norm(&r));
            }
        }
        predicted.sort_by(f64::total_cmp);
        let numeric = sym_eig(&product, DEFAULT_TOL)?.eigenvalues;
        for (a, b) in numeric.iter().zip(&predicted) {
            value_gap = value_gap.max((a - b).abs());
        }
    }
    Ok(check(
        "normalized_kron_decomposition",
        json!({ "pairs": 10, "tolerance": 1e-8 }),
        json!("eigenpairs (1 - (1 - l_i)(1 - l_j), v_i ⊗ v_j)"),
        json!({ "max_eigenvalue_gap": value_gap, "max_residual": residual }),
        value_gap <= 1e-8 && residual <= 1e-8,
    ))
}

/// Runs every closed-form and inequality check and writes
/// `theory_report.json` into `output_dir`.
pub fn theory_suite(output_dir: &Path, options: &TheoryOptions) -> Result<TheoryReport> {
    let checks = vec![
        mean_rms_closed_form()?,
        expected_r1j_grid(options)?,
        expected_r1j_monte_carlo(options)?,
        rprime_lower_bound_check(options)?,
        asymptotic_polynomial_check(),
        expected_spectrum_check()?,
        sayama_bound_check(options)?,
        staircase_check()?,
        colinearity_check(options)?,
        normalized_decomposition_check(options)?,
    ];
    let report = TheoryReport {
        version: VERSION.to_string(),
        checks: checks.into_iter().map(|c| (c.id.clone(), c)).collect(),
    };
    std::fs::create_dir_all(output_dir).map_err(|source| Error::File {
        path: output_dir.to_path_buf(),
        source,
    })?;
    let path = output_dir.join("theory_report.json");
    let file = std::fs::File::create(&path).map_err(|source| Error::File { path, source })?;
    serde_json::to_writer_pretty(file, &report)?;
    Ok(report)
}
