use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for graph of order {n}")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),

    #[error("vertex {0} is isolated; the normalized Laplacian needs positive degrees")]
    IsolatedVertex(usize),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("could not generate a connected graph for {spec} after {attempts} attempts")]
    GenerationFailed { spec: String, attempts: usize },

    #[error("run {run}: {source}")]
    Run {
        run: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("product graph is disconnected: {zeros} eigenvalues below the zero tolerance")]
    DisconnectedProduct { zeros: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("need at least {required} samples per pair, got {actual}")]
    InsufficientSamples { required: usize, actual: usize },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown figure id `{0}`")]
    UnknownFigure(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
