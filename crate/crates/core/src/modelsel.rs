//! Stratified k-fold cross-validation and exhaustive grid search.

use std::io;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Class, Dataset, Standardizer};
use crate::error::{Error, Result};
use crate::rng::{self, streams};
use crate::scoring::{fit_em, Activation, Family, Scorer};
use crate::trainer::{self, TrainConfig};

/// Fold index of every sample, assigned per class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub pos_folds: Vec<usize>,
    pub neg_folds: Vec<usize>,
}

/// Shuffles each class with its own seeded stream and deals samples to folds
/// round-robin, so per-class fold sizes differ by at most one.
pub fn kfold_stratified(ds: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Config(format!("k-fold needs k >= 2, got {k}")));
    }
    let deal = |n: usize, class: Class, stream: u64| -> Result<Vec<usize>> {
        if n < k {
            return Err(Error::TooFewSamplesPerClass { class, needed: k, got: n });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng::stream(seed, stream));
        let mut folds = vec![0; n];
        for (pos, &i) in order.iter().enumerate() {
            folds[i] = pos % k;
        }
        Ok(folds)
    };
    Ok(FoldPlan {
        k,
        seed,
        pos_folds: deal(ds.n_pos(), Class::Positive, streams::FOLD_POSITIVE)?,
        neg_folds: deal(ds.n_neg(), Class::Negative, streams::FOLD_NEGATIVE)?,
    })
}

impl FoldPlan {
    /// `(training part, held-out fold)`.
    pub fn split(&self, ds: &Dataset, fold: usize) -> Result<(Dataset, Dataset)> {
        if self.pos_folds.len() != ds.n_pos() || self.neg_folds.len() != ds.n_neg() {
            return Err(Error::LengthMismatch(self.pos_folds.len() + self.neg_folds.len(), ds.n_pos() + ds.n_neg()));
        }
        let pick = |folds: &[usize], held: bool| -> Vec<usize> {
            folds.iter().enumerate().filter(|(_, &f)| (f == fold) == held).map(|(i, _)| i).collect()
        };
        let train = ds.subset(&pick(&self.pos_folds, false), &pick(&self.neg_folds, false))?;
        let valid = ds.subset(&pick(&self.pos_folds, true), &pick(&self.neg_folds, true))?;
        Ok((train, valid))
    }

    pub fn fold_sizes(&self, class: Class) -> Vec<usize> {
        let folds = match class {
            Class::Positive => &self.pos_folds,
            Class::Negative => &self.neg_folds,
        };
        let mut sizes = vec![0; self.k];
        folds.iter().for_each(|&f| sizes[f] += 1);
        sizes
    }
}

/// Candidate values per hyperparameter for one scorer family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum HyperGrid {
    Linear { l1: Vec<f64> },
    Mlp { layers: Vec<usize>, widths: Vec<usize>, activations: Vec<Activation>, l1: Vec<f64> },
    GmmRatio { components: Vec<usize>, l1: Vec<f64> },
}

/// L1 weights `10^-3 .. 10^1` by decades.
pub fn l1_log_grid() -> Vec<f64> {
    vec![1e-3, 1e-2, 1e-1, 1.0, 10.0]
}

impl HyperGrid {
    /// Desk-scale default grid.
    pub fn default_for(family: Family) -> Self {
        match family {
            Family::Linear => HyperGrid::Linear { l1: vec![0.0, 1e-3, 1e-2] },
            Family::Mlp => HyperGrid::Mlp {
                layers: vec![1, 2],
                widths: vec![50, 100],
                activations: vec![Activation::Tanh, Activation::Selu],
                l1: vec![1e-3],
            },
            Family::GmmRatio => HyperGrid::GmmRatio { components: vec![1, 2, 4, 8], l1: vec![0.0] },
        }
    }

    /// Full candidate sets: 1-4 layers of width 50n (n = 1..20), both
    /// activations, L1 on a log grid; 1-19 mixture components per class.
    pub fn full_for(family: Family) -> Self {
        match family {
            Family::Linear => HyperGrid::Linear { l1: l1_log_grid() },
            Family::Mlp => HyperGrid::Mlp {
                layers: (1..=4).collect(),
                widths: (1..=20).map(|n| 50 * n).collect(),
                activations: vec![Activation::Tanh, Activation::Selu],
                l1: l1_log_grid(),
            },
            Family::GmmRatio => HyperGrid::GmmRatio { components: (1..=19).collect(), l1: vec![0.0] },
        }
    }

    pub fn family(&self) -> Family {
        match self {
            HyperGrid::Linear { .. } => Family::Linear,
            HyperGrid::Mlp { .. } => Family::Mlp,
            HyperGrid::GmmRatio { .. } => Family::GmmRatio,
        }
    }

    /// Cartesian product in a fixed order (last axis varies fastest).
    pub fn points(&self) -> Vec<GridPoint> {
        match self {
            HyperGrid::Linear { l1 } => l1.iter().map(|&l1| GridPoint::Linear { l1 }).collect(),
            HyperGrid::Mlp { layers, widths, activations, l1 } => {
                let mut out = Vec::new();
                for &n_layers in layers {
                    for &width in widths {
                        for &activation in activations {
                            for &l1 in l1 {
                                out.push(GridPoint::Mlp { layers: n_layers, width, activation, l1 });
                            }
                        }
                    }
                }
                out
            }
            HyperGrid::GmmRatio { components, l1 } => {
                let mut out = Vec::new();
                for &k in components {
                    for &l1 in l1 {
                        out.push(GridPoint::GmmRatio { components: k, l1 });
                    }
                }
                out
            }
        }
    }
}

/// One hyperparameter combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GridPoint {
    Linear { l1: f64 },
    Mlp { layers: usize, width: usize, activation: Activation, l1: f64 },
    GmmRatio { components: usize, l1: f64 },
}

/// EM settings used when a grid point initializes a mixture-ratio scorer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EmSettings {
    fn default() -> Self {
        Self { tol: 1e-6, max_iter: 200 }
    }
}

impl GridPoint {
    pub fn l1(&self) -> f64 {
        match *self {
            GridPoint::Linear { l1 } | GridPoint::Mlp { l1, .. } | GridPoint::GmmRatio { l1, .. } => l1,
        }
    }

    /// Initial scorer for standardized training data. Mixture ratios start
    /// from per-class EM fits.
    pub fn init_scorer(&self, train: &Dataset, seed: u64, em: EmSettings) -> Result<Scorer> {
        match *self {
            GridPoint::Linear { .. } => Scorer::init_linear(train.dim()),
            GridPoint::Mlp { layers, width, activation, .. } => {
                Scorer::init_mlp(train.dim(), &vec![width; layers], activation, seed)
            }
            GridPoint::GmmRatio { components, .. } => {
                init_gmm_ratio(train, components, components, seed, em)
            }
        }
    }

    fn csv_cells(&self) -> [String; 6] {
        let e = String::new;
        match *self {
            GridPoint::Linear { l1 } => ["linear".into(), e(), e(), e(), e(), l1.to_string()],
            GridPoint::Mlp { layers, width, activation, l1 } => [
                "mlp".into(),
                layers.to_string(),
                width.to_string(),
                activation.to_string(),
                e(),
                l1.to_string(),
            ],
            GridPoint::GmmRatio { components, l1 } => {
                ["gmm_ratio".into(), e(), e(), e(), components.to_string(), l1.to_string()]
            }
        }
    }
}

/// Mixture-ratio scorer whose class blocks are EM fits on each class.
pub fn init_gmm_ratio(train: &Dataset, k_pos: usize, k_neg: usize, seed: u64, em: EmSettings) -> Result<Scorer> {
    let pos = fit_em(train.positives(), k_pos, seed, em.tol, em.max_iter)?;
    let neg = fit_em(train.negatives(), k_neg, seed.wrapping_add(1), em.tol, em.max_iter)?;
    Scorer::gmm_ratio(&pos.params, &neg.params)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvRow {
    pub point: GridPoint,
    pub fold_pauc: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation across folds.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub table: Vec<CvRow>,
    /// Index into `table` of the highest mean (first on ties).
    pub best: usize,
}

impl CvResult {
    pub fn best_row(&self) -> &CvRow {
        &self.table[self.best]
    }

    /// One row per grid point:
    /// `family,layers,width,activation,components,l1,mean,std`.
    pub fn write_csv(&self, writer: impl io::Write) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["family", "layers", "width", "activation", "components", "l1", "mean", "std"])?;
        for row in &self.table {
            let mut rec = row.point.csv_cells().to_vec();
            rec.push(row.mean.to_string());
            rec.push(row.std.to_string());
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Index of the largest value, first on ties.
pub fn argmax_first(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        if best.is_none_or(|b| *v > values[b]) {
            best = Some(i);
        }
    }
    best
}

/// What a fold run saw, passed to the optional observer of
/// [`grid_search_observed`].
#[derive(Debug, Clone, PartialEq)]
pub struct FoldEvent {
    pub point: usize,
    pub fold: usize,
    /// Samples the fold's standardizer was fitted on.
    pub standardizer_fit_size: usize,
    pub train_size: usize,
    pub valid_size: usize,
}

pub fn grid_search(grid: &HyperGrid, ds: &Dataset, k: usize, base_cfg: &TrainConfig) -> Result<CvResult> {
    grid_search_observed(grid, ds, k, base_cfg, EmSettings::default(), &|_| {})
}

/// For every grid point, trains on each of `k` stratified folds' training
/// part (standardized by statistics of that part alone) and records the
/// best validation partial AUC on the held-out fold at `base_cfg.range`.
///
/// Grid points run in parallel; the table is assembled in grid order.
pub fn grid_search_observed(
    grid: &HyperGrid,
    ds: &Dataset,
    k: usize,
    base_cfg: &TrainConfig,
    em: EmSettings,
    observer: &(dyn Fn(&FoldEvent) + Sync),
) -> Result<CvResult> {
    let points = grid.points();
    if points.is_empty() {
        return Err(Error::EmptyGrid);
    }
    base_cfg.validate()?;
    let plan = kfold_stratified(ds, k, base_cfg.seed)?;
    let table = points
        .par_iter()
        .enumerate()
        .map(|(pi, point)| -> Result<CvRow> {
            let cfg = TrainConfig { l1_weight: point.l1(), ..base_cfg.clone() };
            let mut fold_pauc = Vec::with_capacity(k);
            for fold in 0..k {
                let (train_raw, valid_raw) = plan.split(ds, fold)?;
                let st = Standardizer::fit(&train_raw);
                observer(&FoldEvent {
                    point: pi,
                    fold,
                    standardizer_fit_size: train_raw.n_pos() + train_raw.n_neg(),
                    train_size: train_raw.n_pos() + train_raw.n_neg(),
                    valid_size: valid_raw.n_pos() + valid_raw.n_neg(),
                });
                let train = st.apply(&train_raw)?;
                let valid = st.apply(&valid_raw)?;
                let init = point.init_scorer(&train, cfg.seed, em)?;
                let model = trainer::train(&init, &train, &valid, &cfg)?;
                let v = match model.best_valid_pauc() {
                    Some(v) => v,
                    None => crate::metrics::empirical_pauc(&trainer::score_assignment(&init, &valid)?, cfg.range),
                };
                fold_pauc.push(v);
            }
            let n = fold_pauc.len() as f64;
            let mean = fold_pauc.iter().sum::<f64>() / n;
            let std = (fold_pauc.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
            Ok(CvRow { point: *point, fold_pauc, mean, std })
        })
        .collect::<Result<Vec<_>>>()?;
    let means: Vec<f64> = table.iter().map(|r| r.mean).collect();
    let best = argmax_first(&means).expect("nonempty grid");
    Ok(CvResult { table, best })
}
