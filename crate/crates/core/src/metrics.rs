//! Accuracy metrics for estimated spectra and eigenvectors.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::estimators::EstimatedSpectrum;
use crate::graph::Graph;
use crate::matrix::{dot, Matrix};
use crate::spectral::{cosine, kron_vec, LinearOperator};

/// Relative zero threshold applied to the largest exact eigenvalue.
pub const DEFAULT_ZERO_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairCorrelation {
    pub i: usize,
    pub j: usize,
    pub r: f64,
}

/// Cosines between `x = u_i ⊗ v_j` and `L x` for every basis pair, in
/// row-major `(i, j)` order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CorrelationProfile {
    pub entries: Vec<PairCorrelation>,
}

impl CorrelationProfile {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.r).collect()
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.entries.iter().find(|e| e.i == i && e.j == j).map(|e| e.r)
    }
}

fn check_bases<O: LinearOperator + ?Sized>(op: &O, basis1: &Matrix, basis2: &Matrix) -> Result<()> {
    let n = basis1.rows() * basis2.rows();
    if op.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            actual: n,
        });
    }
    Ok(())
}

/// Applies `op` to every product vector. Works for any operator; see
/// [`factored_correlation_profile`] for the Kronecker Laplacian shortcut.
pub fn correlation_profile<O: LinearOperator + ?Sized>(
    op: &O,
    basis1: &Matrix,
    basis2: &Matrix,
    skip_first: bool,
) -> Result<CorrelationProfile> {
    check_bases(op, basis1, basis2)?;
    let cols2: Vec<Vec<f64>> = (0..basis2.cols()).map(|j| basis2.column(j)).collect();
    let mut entries = Vec::with_capacity(basis1.cols() * basis2.cols());
    for i in 0..basis1.cols() {
        let u = basis1.column(i);
        for (j, v) in cols2.iter().enumerate() {
            if skip_first && i == 0 && j == 0 {
                continue;
            }
            let x = kron_vec(&u, v);
            let r = cosine(&x, &op.apply(&x))?;
            entries.push(PairCorrelation { i, j, r });
        }
    }
    Ok(CorrelationProfile { entries })
}

// Quadratic forms of one basis vector against a factor's degree and
// adjacency matrices.
#[derive(Debug, Clone, Copy)]
struct FactorForms {
    norm2: f64,
    d_form: f64,
    a_form: f64,
    d_norm2: f64,
    da_dot: f64,
    a_norm2: f64,
}

fn factor_forms(g: &Graph, basis: &Matrix) -> Result<Vec<FactorForms>> {
    if basis.rows() != g.order() {
        return Err(Error::DimensionMismatch {
            expected: g.order(),
            actual: basis.rows(),
        });
    }
    let a = g.adjacency_matrix().into_matrix();
    let au = a.matmul(basis)?;
    Ok((0..basis.cols())
        .map(|c| {
            let u = basis.column(c);
            let du: Vec<f64> = u.iter().zip(g.degrees()).map(|(x, &d)| x * d as f64).collect();
            let a_u = au.column(c);
            FactorForms {
                norm2: dot(&u, &u),
                d_form: dot(&u, &du),
                a_form: dot(&u, &a_u),
                d_norm2: dot(&du, &du),
                da_dot: dot(&du, &a_u),
                a_norm2: dot(&a_u, &a_u),
            }
        })
        .collect())
}

/// Same result as [`correlation_profile`] on the Laplacian of `g ⊗ h`, using
/// `L (u ⊗ v) = D_g u ⊗ D_h v − A_g u ⊗ A_h v` so each pair costs O(1) after
/// per-factor precomputation.
pub fn factored_correlation_profile(
    g: &Graph,
    h: &Graph,
    basis1: &Matrix,
    basis2: &Matrix,
    skip_first: bool,
) -> Result<CorrelationProfile> {
    let f1 = factor_forms(g, basis1)?;
    let f2 = factor_forms(h, basis2)?;
    let mut entries = Vec::with_capacity(f1.len() * f2.len());
    for (i, a) in f1.iter().enumerate() {
        for (j, b) in f2.iter().enumerate() {
            if skip_first && i == 0 && j == 0 {
                continue;
            }
            let xlx = a.d_form * b.d_form - a.a_form * b.a_form;
            let pos = a.d_norm2 * b.d_norm2 + a.a_norm2 * b.a_norm2;
            let lx2 = pos - 2.0 * a.da_dot * b.da_dot;
            let x2 = a.norm2 * b.norm2;
            if x2 == 0.0 || lx2 <= 1e-24 * pos {
                return Err(Error::ZeroVector);
            }
            let r = (xlx / (x2 * lx2).sqrt()).clamp(-1.0, 1.0);
            entries.push(PairCorrelation { i, j, r });
        }
    }
    Ok(CorrelationProfile { entries })
}

/// Collects the value of each `(i, j)` pair across runs.
pub fn pivot_pairs(profiles: &[CorrelationProfile]) -> BTreeMap<(usize, usize), Vec<f64>> {
    let mut out: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for p in profiles {
        for e in &p.entries {
            out.entry((e.i, e.j)).or_default().push(e.r);
        }
    }
    out
}

/// Percentage errors of the sorted estimate against the sorted exact
/// spectrum, ranks `2..=n`. `zero_tol` defaults to
/// `DEFAULT_ZERO_TOL · max(actual)`.
pub fn percentage_errors(estimated: &EstimatedSpectrum, actual: &[f64], zero_tol: Option<f64>) -> Result<Vec<f64>> {
    percentage_errors_of(&estimated.values(), actual, zero_tol)
}

pub fn percentage_errors_of(estimated: &[f64], actual: &[f64], zero_tol: Option<f64>) -> Result<Vec<f64>> {
    if estimated.len() != actual.len() {
        return Err(Error::DimensionMismatch {
            expected: actual.len(),
            actual: estimated.len(),
        });
    }
    if actual.len() < 2 {
        return Err(Error::EmptyInput);
    }
    let mut est = estimated.to_vec();
    let mut act = actual.to_vec();
    est.sort_by(f64::total_cmp);
    act.sort_by(f64::total_cmp);
    let tol = zero_tol.unwrap_or(DEFAULT_ZERO_TOL * act[act.len() - 1].abs());
    let zeros = act.iter().take_while(|&&a| a < tol).count();
    if zeros > 1 {
        return Err(Error::DisconnectedProduct { zeros });
    }
    Ok(est[1..]
        .iter()
        .zip(&act[1..])
        .map(|(e, a)| 100.0 * (e - a) / a)
        .collect())
}

/// Percentile `q ∈ [0, 100]` of sorted data with linear interpolation
/// between closest ranks.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Descriptive columns repeated on every CSV row.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReportMeta {
    /// Estimator name for error profiles, basis name for density curves.
    pub series: String,
    pub ordering: String,
    pub model: String,
    pub density: f64,
    pub n1: usize,
    pub n2: usize,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorProfile {
    pub meta: ReportMeta,
    /// `samples[k]` holds every run's error at rank `k + 2`.
    pub samples: Vec<Vec<f64>>,
    pub median: Vec<f64>,
    pub p5: Vec<f64>,
    pub p95: Vec<f64>,
}

#[derive(Serialize)]
struct ProfileRow<'a> {
    rank: usize,
    median: f64,
    p5: f64,
    p95: f64,
    estimator: &'a str,
    ordering: &'a str,
    model: &'a str,
    density: f64,
    n1: usize,
    n2: usize,
    runs: usize,
}

impl ErrorProfile {
    pub fn ranks(&self) -> usize {
        self.median.len()
    }

    pub fn with_meta(mut self, meta: ReportMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn mean_abs_median(&self) -> f64 {
        self.median.iter().map(|m| m.abs()).sum::<f64>() / self.ranks() as f64
    }

    pub fn max_abs_median(&self) -> f64 {
        self.median.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Fraction of ranks whose median lies in `[−band, band]`.
    pub fn fraction_within(&self, band: f64) -> f64 {
        self.median.iter().filter(|m| m.abs() <= band).count() as f64 / self.ranks() as f64
    }

    /// One row per rank; each line of `comment` is written first, prefixed
    /// with `# `.
    pub fn write_csv<W: Write>(&self, mut out: W, comment: &str) -> Result<()> {
        write_comment(&mut out, comment)?;
        let mut w = csv::Writer::from_writer(out);
        let m = &self.meta;
        for k in 0..self.ranks() {
            w.serialize(ProfileRow {
                rank: k + 2,
                median: self.median[k],
                p5: self.p5[k],
                p95: self.p95[k],
                estimator: &m.series,
                ordering: &m.ordering,
                model: &m.model,
                density: m.density,
                n1: m.n1,
                n2: m.n2,
                runs: m.runs,
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

fn write_comment<W: Write>(out: &mut W, comment: &str) -> Result<()> {
    for line in comment.lines() {
        writeln!(out, "# {line}")?;
    }
    Ok(())
}

/// Per-rank median and 5th/95th percentiles across runs.
pub fn aggregate_profile(runs: &[Vec<f64>]) -> Result<ErrorProfile> {
    let first = runs.first().ok_or(Error::EmptyInput)?;
    let ranks = first.len();
    if ranks == 0 {
        return Err(Error::EmptyInput);
    }
    if let Some(bad) = runs.iter().find(|r| r.len() != ranks) {
        return Err(Error::DimensionMismatch {
            expected: ranks,
            actual: bad.len(),
        });
    }
    let samples: Vec<Vec<f64>> = (0..ranks).map(|k| runs.iter().map(|r| r[k]).collect()).collect();
    let mut median = Vec::with_capacity(ranks);
    let mut p5 = Vec::with_capacity(ranks);
    let mut p95 = Vec::with_capacity(ranks);
    for s in &samples {
        let mut sorted = s.clone();
        sorted.sort_by(f64::total_cmp);
        median.push(percentile_sorted(&sorted, 50.0));
        p5.push(percentile_sorted(&sorted, 5.0));
        p95.push(percentile_sorted(&sorted, 95.0));
    }
    Ok(ErrorProfile {
        meta: ReportMeta {
            runs: runs.len(),
            ..ReportMeta::default()
        },
        samples,
        median,
        p5,
        p95,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub meta: ReportMeta,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

#[derive(Serialize)]
struct CurveRow<'a> {
    x: f64,
    density: f64,
    bandwidth: f64,
    basis: &'a str,
    ordering: &'a str,
    model: &'a str,
    edge_density: f64,
    n1: usize,
    n2: usize,
    runs: usize,
}

impl DensityCurve {
    pub fn with_meta(mut self, meta: ReportMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn trapezoid_integral(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
            .sum()
    }

    /// Grid point with the largest density.
    pub fn mode(&self) -> (f64, f64) {
        let k = (0..self.density.len())
            .max_by(|&a, &b| self.density[a].total_cmp(&self.density[b]))
            .unwrap_or(0);
        (self.grid[k], self.density[k])
    }

    pub fn write_csv<W: Write>(&self, mut out: W, comment: &str) -> Result<()> {
        write_comment(&mut out, comment)?;
        let mut w = csv::Writer::from_writer(out);
        let m = &self.meta;
        for (&x, &density) in self.grid.iter().zip(&self.density) {
            w.serialize(CurveRow {
                x,
                density,
                bandwidth: self.bandwidth,
                basis: &m.series,
                ordering: &m.ordering,
                model: &m.model,
                edge_density: m.density,
                n1: m.n1,
                n2: m.n2,
                runs: m.runs,
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

fn mean_and_variance(samples: &[f64]) -> (f64, f64) {
    let m = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / m;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, var)
}

/// Gaussian kernel density estimate with Silverman's bandwidth on
/// `grid_size` evenly spaced points over `[min − 3h, max + 3h]`.
pub fn kde(samples: &[f64], grid_size: usize) -> Result<DensityCurve> {
    if samples.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "kernel density needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    if grid_size < 2 {
        return Err(Error::InvalidParameter("grid_size must be at least 2".into()));
    }
    let (mean, var) = mean_and_variance(samples);
    // Spread below rounding noise of the values counts as zero.
    if !var.is_finite() || var.sqrt() <= 1e-12 * mean.abs().max(1.0) {
        return Err(Error::DegenerateInput("samples have zero variance".into()));
    }
    let m = samples.len() as f64;
    let h = 1.06 * var.sqrt() * m.powf(-0.2);
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min) - 3.0 * h;
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 3.0 * h;
    let step = (hi - lo) / (grid_size - 1) as f64;
    let norm = 1.0 / (m * h * (2.0 * std::f64::consts::PI).sqrt());
    let grid: Vec<f64> = (0..grid_size).map(|k| lo + step * k as f64).collect();
    let density = grid
        .iter()
        .map(|&x| {
            norm * samples
                .iter()
                .map(|&s| {
                    let z = (x - s) / h;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
        })
        .collect();
    Ok(DensityCurve {
        meta: ReportMeta::default(),
        grid,
        density,
        bandwidth: h,
    })
}

pub const MIN_NORMALITY_SAMPLES: usize = 30;
const MIN_EXPECTED_COUNT: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalityCount {
    pub passed: usize,
    pub total: usize,
}

impl NormalityCount {
    pub fn fraction(&self) -> f64 {
        self.passed as f64 / self.total as f64
    }
}

/// Pearson chi-squared goodness-of-fit against a normal fitted by sample
/// mean and variance.
///
/// Sturges bins over the sample range, outer bins open to ±∞ for the
/// expected counts, adjacent bins merged until each expects at least 5,
/// `dof = bins − 3` floored at 1. Zero-variance samples fail.
pub fn chi_squared_normal(samples: &[f64], alpha: f64) -> Result<bool> {
    let m = samples.len();
    if m < MIN_NORMALITY_SAMPLES {
        return Err(Error::InsufficientSamples {
            required: MIN_NORMALITY_SAMPLES,
            actual: m,
        });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let (mean, var) = mean_and_variance(samples);
    if var <= 0.0 || !var.is_finite() {
        return Ok(false);
    }
    let normal = Normal::new(mean, var.sqrt()).map_err(|e| Error::InvalidParameter(e.to_string()))?;

    let bins = (m as f64).log2().ceil() as usize + 1;
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let mut observed = vec![0.0; bins];
    for &x in samples {
        let b = (((x - lo) / width) as usize).min(bins - 1);
        observed[b] += 1.0;
    }
    let cdf_at = |b: usize| -> f64 {
        if b == 0 {
            0.0
        } else if b == bins {
            1.0
        } else {
            normal.cdf(lo + width * b as f64)
        }
    };
    let expected: Vec<f64> = (0..bins).map(|b| m as f64 * (cdf_at(b + 1) - cdf_at(b))).collect();

    let mut groups: Vec<(f64, f64)> = Vec::new();
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for (o, e) in observed.iter().zip(&expected) {
        o_acc += o;
        e_acc += e;
        if e_acc >= MIN_EXPECTED_COUNT {
            groups.push((o_acc, e_acc));
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    if e_acc > 0.0 || o_acc > 0.0 {
        match groups.last_mut() {
            Some(last) => {
                last.0 += o_acc;
                last.1 += e_acc;
            }
            None => groups.push((o_acc, e_acc)),
        }
    }

    let statistic: f64 = groups.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = groups.len().saturating_sub(3).max(1);
    let critical = ChiSquared::new(dof as f64)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?
        .inverse_cdf(1.0 - alpha);
    Ok(statistic <= critical)
}

/// Runs [`chi_squared_normal`] on every pair's samples.
pub fn normality_pass_count(per_pair: &BTreeMap<(usize, usize), Vec<f64>>, alpha: f64) -> Result<NormalityCount> {
    let mut passed = 0;
    for samples in per_pair.values() {
        if chi_squared_normal(samples, alpha)? {
            passed += 1;
        }
    }
    Ok(NormalityCount {
        passed,
        total: per_pair.len(),
    })
}
