//! Simple undirected graphs, their Laplacians, and the Kronecker product.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;

/// An immutable simple undirected graph on vertices `0..n`.
///
/// The adjacency matrix is stored densely and the degree sequence is computed
/// once at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adjacency: Vec<bool>,
    degrees: Vec<usize>,
}

impl Graph {
    /// Builds a graph from unordered vertex pairs. Duplicate pairs collapse
    /// into one edge.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adjacency = vec![false; n * n];
        for &(u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(Error::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            adjacency[u * n + v] = true;
            adjacency[v * n + u] = true;
        }
        Ok(Self::from_adjacency_unchecked(n, adjacency))
    }

    // Caller guarantees symmetry and an empty diagonal.
    pub(crate) fn from_adjacency_unchecked(n: usize, adjacency: Vec<bool>) -> Self {
        let degrees = adjacency
            .chunks(n.max(1))
            .take(n)
            .map(|row| row.iter().filter(|&&a| a).count())
            .collect();
        Self { n, adjacency, degrees }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn degree(&self, v: usize) -> usize {
        self.degrees[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u * self.n + v]
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[v * self.n..(v + 1) * self.n]
            .iter()
            .enumerate()
            .filter_map(|(u, &a)| a.then_some(u))
    }

    pub fn edge_count(&self) -> usize {
        self.degrees.iter().sum::<usize>() / 2
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                if self.has_edge(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Degrees in ascending order.
    pub fn sorted_degrees(&self) -> Vec<usize> {
        let mut d = self.degrees.clone();
        d.sort_unstable();
        d
    }

    pub fn adjacency_matrix(&self) -> SymMatrix {
        SymMatrix::from_lower(self.n, |i, j| if self.has_edge(i, j) { 1.0 } else { 0.0 })
    }

    /// `L = D − A`.
    pub fn laplacian(&self) -> SymMatrix {
        SymMatrix::from_lower(self.n, |i, j| {
            if i == j {
                self.degrees[i] as f64
            } else if self.has_edge(i, j) {
                -1.0
            } else {
                0.0
            }
        })
    }

    /// `𝓛 = I − D^{-1/2} A D^{-1/2}`; fails on isolated vertices.
    pub fn normalized_laplacian(&self) -> Result<SymMatrix> {
        if let Some(v) = self.degrees.iter().position(|&d| d == 0) {
            return Err(Error::IsolatedVertex(v));
        }
        let inv_sqrt: Vec<f64> = self.degrees.iter().map(|&d| 1.0 / (d as f64).sqrt()).collect();
        Ok(SymMatrix::from_lower(self.n, |i, j| {
            if i == j {
                1.0
            } else if self.has_edge(i, j) {
                -inv_sqrt[i] * inv_sqrt[j]
            } else {
                0.0
            }
        }))
    }

    /// Fraction of vertex pairs that are edges, `2|E| / (n(n−1))`.
    pub fn edge_density(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        2.0 * self.edge_count() as f64 / (self.n * (self.n - 1)) as f64
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(v) = queue.pop_front() {
            for u in self.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    reached += 1;
                    queue.push_back(u);
                }
            }
        }
        reached == self.n
    }

    /// Two-colouring test over every component.
    pub fn is_bipartite(&self) -> bool {
        let mut colour: Vec<Option<bool>> = vec![None; self.n];
        for start in 0..self.n {
            if colour[start].is_some() {
                continue;
            }
            colour[start] = Some(false);
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                let cv = colour[v].unwrap();
                for u in self.neighbors(v) {
                    match colour[u] {
                        None => {
                            colour[u] = Some(!cv);
                            queue.push_back(u);
                        }
                        Some(cu) if cu == cv => return false,
                        Some(_) => {}
                    }
                }
            }
        }
        true
    }

    /// Kronecker (direct) product: `(i, k) ~ (j, l)` iff `i ~ j` in `self`
    /// and `k ~ l` in `other`. Vertex `(i, k)` has index `i * other.order() + k`,
    /// so the adjacency matrix equals `A_self ⊗ A_other`.
    pub fn kronecker(&self, other: &Graph) -> Graph {
        let m = other.n;
        let big = self.n * m;
        let mut adjacency = vec![false; big * big];
        for (i, j) in self.edges() {
            for (k, l) in other.edges() {
                for (a, b) in [(i * m + k, j * m + l), (i * m + l, j * m + k)] {
                    adjacency[a * big + b] = true;
                    adjacency[b * big + a] = true;
                }
            }
        }
        Graph::from_adjacency_unchecked(big, adjacency)
    }

    /// Serializes to the edge-list text format: a header line `n m` followed
    /// by one `u v` line per edge (0-based, `u < v`).
    pub fn to_edge_list(&self) -> String {
        let edges = self.edges();
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n, edges.len());
        for (u, v) in edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (line, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing `n m` header".into(),
        })?;
        let [n, m] = parse_pair(line, header)?;
        let mut edges = Vec::with_capacity(m);
        for (line, l) in lines {
            let [u, v] = parse_pair(line, l)?;
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(Error::Parse {
                line: 1,
                message: format!("header declares {m} edges, found {}", edges.len()),
            });
        }
        Graph::from_edges(n, &edges)
    }
}

fn parse_pair(line: usize, text: &str) -> Result<[usize; 2]> {
    let bad = |message: String| Error::Parse { line, message };
    let mut it = text.split_whitespace();
    let mut next = || -> Result<usize> {
        let tok = it.next().ok_or_else(|| bad("expected two integers".into()))?;
        tok.parse().map_err(|e| bad(format!("`{tok}`: {e}")))
    };
    let pair = [next()?, next()?];
    if it.next().is_some() {
        return Err(bad("trailing tokens".into()));
    }
    Ok(pair)
}

/// Laplacian of `g ⊗ h` assembled directly as `D_g⊗D_h − A_g⊗A_h`, without
/// materializing the product graph.
pub fn kronecker_laplacian(g: &Graph, h: &Graph) -> SymMatrix {
    let m = h.order();
    let dh: Vec<f64> = h.degrees().iter().map(|&d| d as f64).collect();
    SymMatrix::from_lower(g.order() * m, |a, b| {
        let (i, k) = (a / m, a % m);
        if a == b {
            g.degree(i) as f64 * dh[k]
        } else {
            let (j, l) = (b / m, b % m);
            if g.has_edge(i, j) && h.has_edge(k, l) {
                -1.0
            } else {
                0.0
            }
        }
    })
}

/// Normalized Laplacian of a weighted symmetric adjacency matrix with zero
/// diagonal; used for expected-adjacency spectra.
pub fn weighted_normalized_laplacian(adjacency: &SymMatrix) -> Result<SymMatrix> {
    let n = adjacency.dim();
    let strength: Vec<f64> = (0..n).map(|i| adjacency.row(i).iter().sum()).collect();
    if let Some(v) = strength.iter().position(|&s| s <= 0.0) {
        return Err(Error::IsolatedVertex(v));
    }
    let inv_sqrt: Vec<f64> = strength.iter().map(|s| 1.0 / s.sqrt()).collect();
    Ok(SymMatrix::from_lower(n, |i, j| {
        let off = adjacency.get(i, j) * inv_sqrt[i] * inv_sqrt[j];
        if i == j {
            1.0 - off
        } else {
            -off
        }
    }))
}
