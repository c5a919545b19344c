//! Sparse binary projections trained with winner-take-all (WTA) models.
//!
//! A projection `W` is a `d' x d` binary matrix with exactly `c` ones per row.
//! An input `x` is hashed to the `k` largest entries of `W x`. This crate
//! provides:
//!
//! * [`wta`]: the WTA primitive, sparse projection and hashing;
//! * [`trainer`]: the closed-form supervised trainer and the alternating
//!   unsupervised trainer;
//! * [`baselines`]: LSH, FJL and FLY random projections;
//! * [`datagen`]: ARTFC synthetic data, randomized PCA, fvecs/CSV loaders;
//! * [`eval`]: neighbor-overlap accuracy and the benchmark runner.

pub mod baselines;
pub mod config;
pub mod datagen;
pub mod error;
pub mod eval;
pub mod matrix;
pub mod parallel;
pub mod seed;
pub mod trainer;
pub mod wta;

pub use config::{default_c, ModelConfig};
pub use error::{Error, Result};
pub use matrix::{Axis, BinaryCodeMatrix, DenseMatrix};
pub use trainer::{TrainOptions, TrainedModel};
