//! Robust mean estimation under heavy tails and Huber ε-contamination.
//!
//! The crate provides:
//!
//! - [`filter`]: the randomized spectral filtering estimator (multivariate and
//!   univariate), its stopping cap and covariance-bound hints.
//! - [`interval`]: the split-sample shortest-interval univariate estimator.
//! - [`netmax`]: half-covers of the sphere (dense and sparse) and the minimax
//!   aggregation of per-direction univariate estimates.
//! - [`baselines`]: sample mean, geometric median-of-means, coordinate-wise
//!   filtering, the ℓ₂-oracle truncated mean and exhaustive subset search.
//! - [`metrics`]: ℓ₂ loss, the quantile error `Q_δ`, the sub-Gaussian benchmark
//!   and the sparse operator norm.
//! - [`model`]: synthetic distributions and contamination.
//! - [`bench`]: seeded, order-independent Monte-Carlo sweeps with CSV output.
//!
//! Data-parallel loops (trials, per-direction estimates) run on rayon when the
//! default `parallel` feature is enabled and fall back to sequential loops
//! otherwise. See [`exec::Execution`].

pub mod baselines;
pub mod bench;
pub mod error;
pub mod exec;
pub mod filter;
pub mod interval;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod netmax;
pub mod numeric;

pub use error::{Error, Result};
pub use exec::Execution;
pub use model::SampleSet;
