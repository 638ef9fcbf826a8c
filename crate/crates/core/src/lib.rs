//! Bayesian optimization over point clouds sampled from unknown manifolds,
//! using Gaussian process surrogates built from graph Laplacian spectra.

pub mod acquisition;
pub mod benchmarks;
pub mod error;
pub mod ggp;
pub mod graph;
pub mod harness;
pub mod mle;
pub mod point_cloud;
pub mod posterior;
pub mod special;

pub use error::{Error, Result};
