//! Seeded random graph generators with edge-density targeting.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub const DEFAULT_WS_BETA: f64 = 0.25;
pub const DEFAULT_MAX_RETRIES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    #[serde(alias = "ER")]
    Er,
    #[serde(alias = "WS")]
    Ws,
    #[serde(alias = "BA")]
    Ba,
    /// Cycle graphs; the density target is ignored. Regular, so both
    /// estimators are exact on products of these.
    #[serde(alias = "CYCLE")]
    Cycle,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Er => "er",
            Model::Ws => "ws",
            Model::Ba => "ba",
            Model::Cycle => "cycle",
        }
    }
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Model::Er, Model::Ws, Model::Ba, Model::Cycle]
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown model `{s}`")))
    }
}

fn default_beta() -> f64 {
    DEFAULT_WS_BETA
}

fn default_retries() -> usize {
    DEFAULT_MAX_RETRIES
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub model: Model,
    pub n: usize,
    pub target_density: f64,
    pub seed: u64,
    #[serde(default = "default_beta")]
    pub ws_beta: f64,
    #[serde(default = "default_retries")]
    pub max_retries: usize,
}

impl GeneratorSpec {
    pub fn new(model: Model, n: usize, target_density: f64, seed: u64) -> Self {
        Self {
            model,
            n,
            target_density,
            seed,
            ws_beta: DEFAULT_WS_BETA,
            max_retries: DEFAULT_MAX_RETRIES,
        }
    }

    fn describe(&self) -> String {
        format!(
            "{} n={} density={} seed={}",
            self.model.name(),
            self.n,
            self.target_density,
            self.seed
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelParams {
    Er { p: f64 },
    Ws { k: usize, beta: f64 },
    Ba { m_attach: usize },
    Cycle,
}

/// Generator parameters whose expected density is closest to the target.
pub fn density_to_params(spec: &GeneratorSpec) -> Result<ModelParams> {
    let (n, t) = (spec.n, spec.target_density);
    if spec.model != Model::Cycle && !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidParameter(format!("target density {t} outside (0, 1)")));
    }
    match spec.model {
        Model::Er => Ok(ModelParams::Er { p: t }),
        Model::Ws => {
            let k = 2 * (t * (n as f64 - 1.0) / 2.0).round() as usize;
            check_ws(n, k, spec.ws_beta)?;
            Ok(ModelParams::Ws { k, beta: spec.ws_beta })
        }
        Model::Ba => {
            if n < 2 {
                return Err(Error::InvalidParameter(format!("BA needs n >= 2, got {n}")));
            }
            let pairs = (n * (n - 1)) as f64;
            let m_attach = (1..n)
                .min_by(|&a, &b| {
                    let gap = |m: usize| (2.0 * ba_edge_count(n, m) as f64 / pairs - t).abs();
                    gap(a).total_cmp(&gap(b))
                })
                .expect("n >= 2");
            Ok(ModelParams::Ba { m_attach })
        }
        Model::Cycle => {
            if n < 3 {
                return Err(Error::InvalidParameter(format!("cycle needs n >= 3, got {n}")));
            }
            Ok(ModelParams::Cycle)
        }
    }
}

/// Edges produced by [`barabasi_albert`]: a clique on `m + 1` vertices plus
/// `m` per later vertex.
pub fn ba_edge_count(n: usize, m_attach: usize) -> usize {
    m_attach * (m_attach + 1) / 2 + (n - m_attach - 1) * m_attach
}

fn check_ws(n: usize, k: usize, beta: f64) -> Result<()> {
    if !k.is_multiple_of(2) || k < 2 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "ring degree k must be even with 2 <= k < n, got k={k} n={n}"
        )));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidParameter(format!(
            "rewiring probability {beta} outside [0, 1]"
        )));
    }
    Ok(())
}

pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    erdos_renyi_with(n, p, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn erdos_renyi_with(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Result<Graph> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("edge probability {p} outside (0, 1)")));
    }
    let mut adj = vec![false; n * n];
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random::<f64>() < p {
                adj[u * n + v] = true;
                adj[v * n + u] = true;
            }
        }
    }
    Ok(Graph::from_adjacency_unchecked(n, adj))
}

pub fn watts_strogatz(n: usize, k: usize, beta: f64, seed: u64) -> Result<Graph> {
    watts_strogatz_with(n, k, beta, &mut ChaCha8Rng::seed_from_u64(seed))
}

// Ring lattice, then for each lattice offset j and vertex u the edge
// (u, u + j) is moved to (u, w) with probability beta, w uniform among
// vertices not already adjacent to u.
fn watts_strogatz_with(n: usize, k: usize, beta: f64, rng: &mut ChaCha8Rng) -> Result<Graph> {
    check_ws(n, k, beta)?;
    let mut adj = vec![false; n * n];
    let mut deg = vec![k; n];
    for u in 0..n {
        for j in 1..=k / 2 {
            let v = (u + j) % n;
            adj[u * n + v] = true;
            adj[v * n + u] = true;
        }
    }
    for j in 1..=k / 2 {
        for u in 0..n {
            let v = (u + j) % n;
            if rng.random::<f64>() >= beta || !adj[u * n + v] || deg[u] >= n - 1 {
                continue;
            }
            let w = loop {
                let w = rng.random_range(0..n);
                if w != u && !adj[u * n + w] {
                    break w;
                }
            };
            adj[u * n + v] = false;
            adj[v * n + u] = false;
            adj[u * n + w] = true;
            adj[w * n + u] = true;
            deg[v] -= 1;
            deg[w] += 1;
        }
    }
    Ok(Graph::from_adjacency_unchecked(n, adj))
}

pub fn barabasi_albert(n: usize, m_attach: usize, seed: u64) -> Result<Graph> {
    barabasi_albert_with(n, m_attach, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn barabasi_albert_with(n: usize, m_attach: usize, rng: &mut ChaCha8Rng) -> Result<Graph> {
    if m_attach < 1 || m_attach >= n {
        return Err(Error::InvalidParameter(format!(
            "attachment count must satisfy 1 <= m < n, got m={m_attach} n={n}"
        )));
    }
    let mut adj = vec![false; n * n];
    // Every edge endpoint once, so uniform draws are degree-proportional.
    let mut endpoints = Vec::with_capacity(2 * ba_edge_count(n, m_attach));
    for u in 0..=m_attach {
        for v in (u + 1)..=m_attach {
            adj[u * n + v] = true;
            adj[v * n + u] = true;
            endpoints.extend([u, v]);
        }
    }
    let mut targets = Vec::with_capacity(m_attach);
    for v in (m_attach + 1)..n {
        targets.clear();
        while targets.len() < m_attach {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            adj[v * n + t] = true;
            adj[t * n + v] = true;
            endpoints.extend([v, t]);
        }
    }
    Ok(Graph::from_adjacency_unchecked(n, adj))
}

pub fn cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("cycle needs n >= 3, got {n}")));
    }
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::from_edges(n, &edges)
}

/// The `index`-th seed derived from `seed`.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng.next_u64()
}

/// One draw from the model; attempt `a` uses stream `a` of `spec.seed`.
pub fn generate_attempt(spec: &GeneratorSpec, attempt: u64) -> Result<Graph> {
    let params = density_to_params(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(attempt);
    match params {
        ModelParams::Er { p } => erdos_renyi_with(spec.n, p, &mut rng),
        ModelParams::Ws { k, beta } => watts_strogatz_with(spec.n, k, beta, &mut rng),
        ModelParams::Ba { m_attach } => barabasi_albert_with(spec.n, m_attach, &mut rng),
        ModelParams::Cycle => cycle(spec.n),
    }
}

/// First connected draw among `spec.max_retries` attempts.
pub fn generate_connected(spec: &GeneratorSpec) -> Result<Graph> {
    if spec.max_retries == 0 {
        return Err(Error::InvalidParameter("max_retries must be positive".into()));
    }
    for attempt in 0..spec.max_retries {
        let g = generate_attempt(spec, attempt as u64)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::GenerationFailed {
        spec: spec.describe(),
        attempts: spec.max_retries,
    })
}

/// Connected factors whose Kronecker product is connected, i.e. not both
/// bipartite. Each retry redraws both factors from fresh sub-seeds.
pub fn generate_product_pair(first: &GeneratorSpec, second: &GeneratorSpec) -> Result<(Graph, Graph)> {
    let attempts = first.max_retries.max(1);
    for attempt in 0..attempts as u64 {
        let (mut s1, mut s2) = (*first, *second);
        if attempt > 0 {
            s1.seed = sub_seed(first.seed, attempt);
            s2.seed = sub_seed(second.seed, attempt);
        }
        let g = generate_connected(&s1)?;
        let h = generate_connected(&s2)?;
        if !(g.is_bipartite() && h.is_bipartite()) {
            return Ok((g, h));
        }
    }
    Err(Error::GenerationFailed {
        spec: format!("product of ({}) and ({})", first.describe(), second.describe()),
        attempts,
    })
}
