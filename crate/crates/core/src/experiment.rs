//! Hold-out runs: split, standardize, initialize, train, evaluate.

use serde::{Deserialize, Serialize};

use crate::dataset::{split_stratified, Dataset, Standardizer};
use crate::error::Result;
use crate::modelsel::{init_gmm_ratio, EmSettings};
use crate::scoring::{Activation, Scorer};
use crate::trainer::{evaluate, train, MetricsReport, TrainConfig, TrainedModel};

/// Which scorer to build and how.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ScorerSpec {
    Linear,
    Mlp { hidden: Vec<usize>, activation: Activation },
    GmmRatio { k_pos: usize, k_neg: usize },
}

impl ScorerSpec {
    /// Initial scorer for standardized training data. Mixture ratios start
    /// from per-class EM fits.
    pub fn init(&self, train: &Dataset, seed: u64, em: EmSettings) -> Result<Scorer> {
        match self {
            ScorerSpec::Linear => Scorer::init_linear(train.dim()),
            ScorerSpec::Mlp { hidden, activation } => Scorer::init_mlp(train.dim(), hidden, *activation, seed),
            ScorerSpec::GmmRatio { k_pos, k_neg } => init_gmm_ratio(train, *k_pos, *k_neg, seed, em),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Holdout {
    pub standardizer: Standardizer,
    pub model: TrainedModel,
    pub report: MetricsReport,
}

/// Fractions of a hold-out run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoldoutPlan {
    /// Share of the data used for training (the rest is the test set).
    pub train_fraction: f64,
    /// Share of the training part held out for early stopping.
    pub valid_fraction: f64,
}

impl Default for HoldoutPlan {
    fn default() -> Self {
        Self { train_fraction: 0.7, valid_fraction: 0.2 }
    }
}

/// Splits `data` into train/test, carves a validation set off the training
/// part, standardizes with training statistics only, trains and evaluates
/// on the test part. Everything derives from `cfg.seed`.
pub fn holdout(spec: &ScorerSpec, data: &Dataset, plan: HoldoutPlan, cfg: &TrainConfig, em: EmSettings) -> Result<Holdout> {
    let (train_raw, test_raw) = split_stratified(data, plan.train_fraction, cfg.seed)?;
    let (fit_raw, valid_raw) = split_stratified(&train_raw, 1.0 - plan.valid_fraction, cfg.seed.wrapping_add(1))?;
    let standardizer = Standardizer::fit(&fit_raw);
    let fit = standardizer.apply(&fit_raw)?;
    let valid = standardizer.apply(&valid_raw)?;
    let test = standardizer.apply(&test_raw)?;
    let init = spec.init(&fit, cfg.seed, em)?;
    let model = train(&init, &fit, &valid, cfg)?;
    let report = evaluate(&model, &test)?;
    Ok(Holdout { standardizer, model, report })
}
