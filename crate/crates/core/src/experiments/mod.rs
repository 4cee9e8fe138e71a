//! Monte-Carlo experiment driver and report writers.
//!
//! A run draws a connected factor pair, solves the product Laplacian exactly,
//! and records per-estimator percentage errors and per-basis correlation
//! profiles. Runs are independent and seeded from
//! `(master_seed, run, role)`, so the bundle is a pure function of the
//! configuration.

mod figures;
mod theory_suite;

pub use figures::{reproduce_figure, FigureId, FigureManifest, FigureOptions};
pub use theory_suite::{lower_bound_slacks, theory_suite, TheoryCheck, TheoryOptions, TheoryReport};

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::estimators::{normalized_estimate, sayama_spectrum, Method, Ordering};
use crate::graph::{kronecker_laplacian, Graph};
use crate::metrics::{
    aggregate_profile, factored_correlation_profile, kde, normality_pass_count, percentage_errors, pivot_pairs,
    CorrelationProfile, DensityCurve, ErrorProfile, NormalityCount, ReportMeta, MIN_NORMALITY_SAMPLES,
};
use crate::random::{generate_product_pair, GeneratorSpec, Model, DEFAULT_MAX_RETRIES, DEFAULT_WS_BETA};
use crate::spectral::{sym_eig, sym_eigenvalues_owned, SpectralDecomposition, DEFAULT_TOL};

/// `git describe` of the build, or the crate version outside a checkout.
pub const VERSION: &str = env!("KRONSPEC_VERSION");

/// Products above this many vertices need `allow_large`.
pub const LARGE_PRODUCT: usize = 5000;
pub const DEFAULT_RUNS: usize = 100;
pub const DEFAULT_LARGE_RUNS: usize = 5;
pub const DEFAULT_KDE_GRID: usize = 512;
pub const NORMALITY_ALPHA: f64 = 0.05;

/// Eigenvector basis of the factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    /// Laplacian eigenvectors `w_i ⊗ w_j`.
    Laplacian,
    /// Normalized-Laplacian eigenvectors `v_i ⊗ v_j`.
    Normalized,
}

impl Basis {
    pub const ALL: [Basis; 2] = [Basis::Laplacian, Basis::Normalized];

    pub fn name(self) -> &'static str {
        match self {
            Basis::Laplacian => "laplacian",
            Basis::Normalized => "normalized",
        }
    }
}

fn default_runs_opt() -> Option<usize> {
    None
}
fn default_estimators() -> Vec<Method> {
    Method::ALL.to_vec()
}
fn default_output() -> PathBuf {
    PathBuf::from("kronspec-out")
}
fn default_beta() -> f64 {
    DEFAULT_WS_BETA
}
fn default_true() -> bool {
    true
}
fn default_grid() -> usize {
    DEFAULT_KDE_GRID
}
fn default_retries() -> usize {
    DEFAULT_MAX_RETRIES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: Model,
    pub orders: (usize, usize),
    pub density: f64,
    /// Defaults to 100, or 5 for products above [`LARGE_PRODUCT`] vertices.
    #[serde(default = "default_runs_opt")]
    pub runs: Option<usize>,
    /// Empty skips the exact product eigensolve.
    #[serde(default = "default_estimators")]
    pub estimators: Vec<Method>,
    #[serde(default)]
    pub ordering: Ordering,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default = "default_beta")]
    pub ws_beta: f64,
    #[serde(default = "default_true")]
    pub correlations: bool,
    #[serde(default = "default_grid")]
    pub kde_grid: usize,
    #[serde(default)]
    pub allow_large: bool,
    #[serde(default = "default_retries")]
    pub max_retries: usize,
}

impl ExperimentConfig {
    pub fn new(model: Model, orders: (usize, usize), density: f64) -> Self {
        Self {
            model,
            orders,
            density,
            runs: None,
            estimators: default_estimators(),
            ordering: Ordering::default(),
            master_seed: 0,
            output_dir: default_output(),
            ws_beta: DEFAULT_WS_BETA,
            correlations: true,
            kde_grid: DEFAULT_KDE_GRID,
            allow_large: false,
            max_retries: DEFAULT_MAX_RETRIES,
        }
    }

    pub fn product_order(&self) -> usize {
        self.orders.0 * self.orders.1
    }

    pub fn effective_runs(&self) -> usize {
        self.runs.unwrap_or(if self.product_order() > LARGE_PRODUCT {
            DEFAULT_LARGE_RUNS
        } else {
            DEFAULT_RUNS
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.effective_runs() == 0 {
            return Err(Error::InvalidParameter("runs must be at least 1".into()));
        }
        if self.orders.0 < 2 || self.orders.1 < 2 {
            return Err(Error::InvalidParameter(format!(
                "orders {:?} must be at least 2",
                self.orders
            )));
        }
        if self.product_order() > LARGE_PRODUCT && !self.allow_large && !self.estimators.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "product of order {} needs a dense eigensolve taking hours per batch; set allow_large to run it",
                self.product_order()
            )));
        }
        if !self.correlations && self.estimators.is_empty() {
            return Err(Error::InvalidParameter(
                "nothing to compute: no estimators and correlations disabled".into(),
            ));
        }
        self.ordering.validate()?;
        for n in [self.orders.0, self.orders.1] {
            crate::random::density_to_params(&self.factor_spec(n, 0))?;
        }
        Ok(())
    }

    fn factor_spec(&self, n: usize, seed: u64) -> GeneratorSpec {
        GeneratorSpec {
            ws_beta: self.ws_beta,
            max_retries: self.max_retries,
            ..GeneratorSpec::new(self.model, n, self.density, seed)
        }
    }

    /// SHA-256 of the canonical JSON form, with `output_dir` blanked so the
    /// same experiment hashes equally wherever it is written.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = PathBuf::new();
        canonical.runs = Some(self.effective_runs());
        let json = serde_json::to_vec(&canonical).expect("config serializes");
        hex(&Sha256::digest(&json))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// First eight bytes of `SHA-256(master_seed ‖ run ‖ role)`.
pub fn derive_seed(master_seed: u64, run: usize, role: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    h.update((run as u64).to_le_bytes());
    h.update(role.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorErrors {
    pub method: Method,
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisCorrelations {
    pub basis: Basis,
    pub profile: CorrelationProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub factor_seeds: (u64, u64),
    pub achieved_densities: (f64, f64),
    pub errors: Vec<EstimatorErrors>,
    pub correlations: Vec<BasisCorrelations>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl RunRecord {
    pub fn errors_for(&self, method: Method) -> Option<&[f64]> {
        self.errors
            .iter()
            .find(|e| e.method == method)
            .map(|e| e.errors.as_slice())
    }

    pub fn correlations_for(&self, basis: Basis) -> Option<&CorrelationProfile> {
        self.correlations.iter().find(|c| c.basis == basis).map(|c| &c.profile)
    }
}

/// Eigendecompositions of one factor's Laplacian and normalized Laplacian.
#[derive(Debug, Clone)]
pub struct FactorSpectra {
    pub laplacian: SpectralDecomposition,
    pub normalized: SpectralDecomposition,
    pub sorted_degrees: Vec<usize>,
}

impl FactorSpectra {
    pub fn new(g: &Graph) -> Result<Self> {
        Ok(Self {
            laplacian: sym_eig(&g.laplacian(), DEFAULT_TOL)?,
            normalized: sym_eig(&g.normalized_laplacian()?, DEFAULT_TOL)?,
            sorted_degrees: g.sorted_degrees(),
        })
    }

    pub fn basis(&self, basis: Basis) -> &SpectralDecomposition {
        match basis {
            Basis::Laplacian => &self.laplacian,
            Basis::Normalized => &self.normalized,
        }
    }
}

pub fn estimate(
    method: Method,
    first: &FactorSpectra,
    second: &FactorSpectra,
    ordering: &Ordering,
) -> Result<crate::estimators::EstimatedSpectrum> {
    let (a, b) = (first, second);
    match method {
        Method::SayamaLaplacian => sayama_spectrum(
            &a.laplacian.eigenvalues,
            &a.sorted_degrees,
            &b.laplacian.eigenvalues,
            &b.sorted_degrees,
            ordering,
        ),
        Method::NormalizedLaplacian => normalized_estimate(
            &a.normalized.eigenvalues,
            &a.sorted_degrees,
            &b.normalized.eigenvalues,
            &b.sorted_degrees,
            ordering,
        ),
    }
}

/// One run of `config`; errors are not yet tagged with the run index.
pub fn run_single(config: &ExperimentConfig, run: usize) -> Result<RunRecord> {
    let start = Instant::now();
    let seeds = (
        derive_seed(config.master_seed, run, "factor1"),
        derive_seed(config.master_seed, run, "factor2"),
    );
    let (g, h) = generate_product_pair(
        &config.factor_spec(config.orders.0, seeds.0),
        &config.factor_spec(config.orders.1, seeds.1),
    )?;
    let (fg, fh) = (FactorSpectra::new(&g)?, FactorSpectra::new(&h)?);

    let mut errors = Vec::new();
    if !config.estimators.is_empty() {
        let actual = sym_eigenvalues_owned(kronecker_laplacian(&g, &h))?;
        let mut ordering = config.ordering;
        ordering.randomization_seed ^= derive_seed(config.master_seed, run, "ordering");
        for &method in &config.estimators {
            let est = estimate(method, &fg, &fh, &ordering)?;
            errors.push(EstimatorErrors {
                method,
                errors: percentage_errors(&est, &actual, None)?,
            });
        }
    }

    let mut correlations = Vec::new();
    if config.correlations {
        for basis in Basis::ALL {
            let profile = factored_correlation_profile(
                &g,
                &h,
                &fg.basis(basis).eigenvectors,
                &fh.basis(basis).eigenvectors,
                true,
            )?;
            correlations.push(BasisCorrelations { basis, profile });
        }
    }

    Ok(RunRecord {
        run,
        factor_seeds: seeds,
        achieved_densities: (g.edge_density(), h.edge_density()),
        errors,
        correlations,
        wall_time: start.elapsed(),
    })
}

/// Rayon pool capped by `KRONSPEC_THREADS` when set.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("KRONSPEC_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("KRONSPEC_THREADS must be a positive integer, got `{v}`")))?;
        if n == 0 {
            return Err(Error::InvalidParameter("KRONSPEC_THREADS must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisNormality {
    pub basis: Basis,
    pub alpha: f64,
    pub count: NormalityCount,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub records: Vec<RunRecord>,
    pub profiles: Vec<ErrorProfile>,
    pub curves: Vec<DensityCurve>,
    pub normality: Vec<BasisNormality>,
}

impl ReportBundle {
    pub fn profile(&self, method: Method) -> Option<&ErrorProfile> {
        self.profiles.iter().find(|p| p.meta.series == method.name())
    }

    pub fn curve(&self, basis: Basis) -> Option<&DensityCurve> {
        self.curves.iter().find(|c| c.meta.series == basis.name())
    }

    pub fn normality_for(&self, basis: Basis) -> Option<NormalityCount> {
        self.normality.iter().find(|n| n.basis == basis).map(|n| n.count)
    }

    pub fn total_wall_time(&self) -> Duration {
        self.records.iter().map(|r| r.wall_time).sum()
    }

    fn comment(&self) -> String {
        format!("kronspec {VERSION} config={}", self.config_hash)
    }

    /// Writes CSVs and `summary.json` into `dir`; returns the written paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|source| Error::File {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut written = Vec::new();
        let comment = self.comment();
        for p in &self.profiles {
            let path = dir.join(format!("errors_{}.csv", p.meta.series));
            p.write_csv(create(&path)?, &format!("{comment}\npercentile=linear-interpolation"))?;
            written.push(path);
        }
        for c in &self.curves {
            let path = dir.join(format!("kde_{}.csv", c.meta.series));
            c.write_csv(
                create(&path)?,
                &format!("{comment}\nbandwidth=silverman samples=all-pairs-all-runs"),
            )?;
            written.push(path);
        }
        let runs_path = dir.join("runs.csv");
        self.write_runs(create(&runs_path)?, &comment)?;
        written.push(runs_path);

        let summary_path = dir.join("summary.json");
        serde_json::to_writer_pretty(create(&summary_path)?, &self.summary())?;
        written.push(summary_path);
        Ok(written)
    }

    fn write_runs<W: std::io::Write>(&self, mut out: W, comment: &str) -> Result<()> {
        writeln!(out, "# {comment}")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["run", "seed1", "seed2", "density1", "density2", "model", "n1", "n2"])?;
        let c = &self.config;
        for r in &self.records {
            w.write_record([
                r.run.to_string(),
                r.factor_seeds.0.to_string(),
                r.factor_seeds.1.to_string(),
                r.achieved_densities.0.to_string(),
                r.achieved_densities.1.to_string(),
                c.model.name().to_string(),
                c.orders.0.to_string(),
                c.orders.1.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> serde_json::Value {
        let n = self.records.len().max(1) as f64;
        let mean_density = |f: fn(&RunRecord) -> f64| self.records.iter().map(f).sum::<f64>() / n;
        let profiles: Vec<_> = self
            .profiles
            .iter()
            .map(|p| {
                serde_json::json!({
                    "estimator": p.meta.series,
                    "mean_abs_median": p.mean_abs_median(),
                    "max_abs_median": p.max_abs_median(),
                })
            })
            .collect();
        serde_json::json!({
            "version": VERSION,
            "config_hash": self.config_hash,
            "config": self.config,
            "runs": self.records.len(),
            "achieved_density": {
                "target": self.config.density,
                "factor1_mean": mean_density(|r| r.achieved_densities.0),
                "factor2_mean": mean_density(|r| r.achieved_densities.1),
            },
            "profiles": profiles,
            "normality": self.normality,
            "conventions": {
                "percentile": "linear interpolation between closest ranks",
                "error_pairing": "ascending sort of both spectra, rank 1 dropped",
                "zero_tolerance": "1e-8 times the largest exact eigenvalue",
                "kde": "gaussian kernel, silverman bandwidth, samples pooled over all pairs and runs",
                "chi_squared": "sturges bins, open outer bins, merge below 5 expected, dof = bins - 3 (min 1)",
                "factors": "both factors regenerated every run",
                "ws_beta": self.config.ws_beta,
                "ba_core": "clique on m+1 vertices",
            },
        })
    }
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::File {
            path: path.to_path_buf(),
            source,
        })
}

/// Runs every repetition of `config` and aggregates the results without
/// touching the filesystem.
pub fn compute_experiment(config: &ExperimentConfig) -> Result<ReportBundle> {
    config.validate()?;
    let runs = config.effective_runs();
    let pool = worker_pool()?;
    let records: Vec<RunRecord> = pool.install(|| {
        (0..runs)
            .into_par_iter()
            .map(|run| {
                run_single(config, run).map_err(|e| Error::Run {
                    run,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    aggregate(config, records)
}

fn aggregate(config: &ExperimentConfig, records: Vec<RunRecord>) -> Result<ReportBundle> {
    let meta = |series: &str| ReportMeta {
        series: series.to_string(),
        ordering: config.ordering.kind.name().to_string(),
        model: config.model.name().to_string(),
        density: config.density,
        n1: config.orders.0,
        n2: config.orders.1,
        runs: records.len(),
    };

    let mut profiles = Vec::new();
    for &method in &config.estimators {
        let per_run: Vec<Vec<f64>> = records
            .iter()
            .filter_map(|r| r.errors_for(method).map(<[f64]>::to_vec))
            .collect();
        profiles.push(aggregate_profile(&per_run)?.with_meta(meta(method.name())));
    }

    let mut curves = Vec::new();
    let mut normality = Vec::new();
    if config.correlations {
        for basis in Basis::ALL {
            let per_run: Vec<CorrelationProfile> = records
                .iter()
                .filter_map(|r| r.correlations_for(basis).cloned())
                .collect();
            let pooled: Vec<f64> = per_run.iter().flat_map(|p| p.values()).collect();
            // Regular factors give identical coefficients and no density.
            match kde(&pooled, config.kde_grid) {
                Ok(curve) => curves.push(curve.with_meta(meta(basis.name()))),
                Err(Error::DegenerateInput(_)) => {}
                Err(e) => return Err(e),
            }
            if records.len() >= MIN_NORMALITY_SAMPLES {
                let count = normality_pass_count(&pivot_pairs(&per_run), NORMALITY_ALPHA)?;
                normality.push(BasisNormality {
                    basis,
                    alpha: NORMALITY_ALPHA,
                    count,
                });
            }
        }
    }

    Ok(ReportBundle {
        config: config.clone(),
        config_hash: config.hash(),
        records,
        profiles,
        curves,
        normality,
    })
}

/// [`compute_experiment`] followed by writing the bundle to
/// `config.output_dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ReportBundle> {
    let bundle = compute_experiment(config)?;
    bundle.write(&config.output_dir)?;
    Ok(bundle)
}

/// Exact and estimated product spectra for one factor pair, each sorted
/// ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTable {
    pub orders: (usize, usize),
    pub ordering: Ordering,
    pub exact: Vec<f64>,
    pub sayama: Vec<f64>,
    pub normalized: Vec<f64>,
    /// SHA-256 over both edge lists and the ordering.
    pub input_hash: String,
}

pub fn estimate_pair(g: &Graph, h: &Graph, ordering: &Ordering) -> Result<SpectrumTable> {
    let (fg, fh) = (FactorSpectra::new(g)?, FactorSpectra::new(h)?);
    let exact = sym_eigenvalues_owned(kronecker_laplacian(g, h))?;
    let sayama = estimate(Method::SayamaLaplacian, &fg, &fh, ordering)?.sorted_values();
    let normalized = estimate(Method::NormalizedLaplacian, &fg, &fh, ordering)?.sorted_values();
    let mut hasher = Sha256::new();
    hasher.update(g.to_edge_list());
    hasher.update(h.to_edge_list());
    hasher.update(serde_json::to_vec(ordering)?);
    Ok(SpectrumTable {
        orders: (g.order(), h.order()),
        ordering: *ordering,
        exact,
        sayama,
        normalized,
        input_hash: hex(&hasher.finalize()),
    })
}

impl SpectrumTable {
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# kronspec {VERSION} config={}", self.input_hash)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "rank",
            "exact",
            "sayama_laplacian",
            "normalized_laplacian",
            "ordering",
            "n1",
            "n2",
        ])?;
        for k in 0..self.exact.len() {
            w.write_record([
                (k + 1).to_string(),
                self.exact[k].to_string(),
                self.sayama[k].to_string(),
                self.normalized[k].to_string(),
                self.ordering.kind.name().to_string(),
                self.orders.0.to_string(),
                self.orders.1.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
