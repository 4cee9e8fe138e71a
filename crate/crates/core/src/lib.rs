//! Spectral estimation for Kronecker products of graphs.
//!
//! The Laplacian spectrum of `G ⊗ H` is estimated from the spectra and degree
//! sequences of the factors, compared against a dense exact solve, and
//! summarized over Monte-Carlo batches of random factor pairs.

pub mod error;
pub mod estimators;
pub mod experiments;
pub mod graph;
pub mod matrix;
pub mod metrics;
pub mod random;
pub mod spectral;
pub mod theory;

pub use error::{Error, Result};
pub use estimators::{EstimatedSpectrum, Method, Ordering, OrderingKind};
pub use graph::Graph;
pub use matrix::{Matrix, SymMatrix};
pub use spectral::SpectralDecomposition;
