//! Partial-AUC maximization for binary scoring functions.
//!
//! The crate trains a scoring function `f: R^d -> R` so that positives rank
//! above negatives inside a chosen false-positive-rate band `[alpha, beta]`.
//! It provides:
//!
//! - [`metrics`]: exact empirical ROC, AUC and partial AUC, plus an
//!   independent staircase integral of the ROC curve.
//! - [`scoring`]: linear, multilayer-perceptron and Gaussian-mixture
//!   log-density-ratio scorers over a flat parameter vector, with analytic
//!   parameter gradients and an EM fitter for the mixtures.
//! - [`objective`]: the sigmoid-relaxed partial AUC and its gradient.
//! - [`trainer`]: Adam ascent with L1 shrinkage, early stopping and
//!   Table-style metric reports.
//! - [`modelsel`]: stratified k-fold cross-validation and grid search.
//! - [`dataset`]: CSV ingestion, synthetic data, stratified splits and
//!   standardization.
//! - [`cli`]: the `pauc` command-line front end.

pub mod cli;
pub mod dataset;
pub mod experiment;
mod error;
pub mod metrics;
pub mod modelsel;
pub mod objective;
pub mod rng;
pub mod scoring;
pub mod trainer;

pub use dataset::{Class, Dataset, Sample, Standardizer};
pub use error::{Error, Result};
pub use metrics::{PaucRange, RocCurve, ScoreAssignment};
pub use objective::SurrogateEval;
pub use scoring::{Activation, GmmParams, Scorer, Shape};
pub use trainer::{MetricsReport, TrainConfig, TrainedModel};
