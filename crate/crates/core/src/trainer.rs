//! Adam ascent on the relaxed partial AUC with validation-based snapshot
//! selection, and Table-style metric reports.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::metrics::{self, PaucRange, ScoreAssignment};
use crate::objective;
use crate::scoring::{Family, Scorer};

/// FPR readouts reported by [`evaluate`].
pub const READOUT_FPRS: [f64; 3] = [0.01, 0.05, 0.1];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub range: PaucRange,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub l1_weight: f64,
    pub max_epochs: usize,
    /// Stop after this many epochs without a strict validation improvement.
    /// Zero disables early stopping.
    pub patience: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            range: PaucRange::upto(0.1).expect("valid default range"),
            learning_rate: 1e-2,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            l1_weight: 0.0,
            max_epochs: 300,
            patience: 50,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        PaucRange::new(self.range.alpha(), self.range.beta())?;
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be > 0, got {}", self.learning_rate));
        }
        for (name, b) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(0.0..1.0).contains(&b) {
                return bad(format!("{name} must lie in [0, 1), got {b}"));
            }
        }
        if !(self.adam_eps > 0.0) {
            return bad(format!("adam_eps must be > 0, got {}", self.adam_eps));
        }
        if !(self.l1_weight >= 0.0 && self.l1_weight.is_finite()) {
            return bad(format!("l1_weight must be >= 0, got {}", self.l1_weight));
        }
        Ok(())
    }
}

/// First and second moment estimates of Adam.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self { m: vec![0.0; len], v: vec![0.0; len], t: 0 }
    }

    /// One bias-corrected Adam ascent step on `params`.
    ///
    /// The ascent direction is `grad - l1_weight * sign(params)` on the
    /// coordinates selected by `l1_mask` and `grad` elsewhere.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64], l1_mask: &[bool], cfg: &TrainConfig) -> Result<()> {
        let n = params.len();
        for len in [grad.len(), l1_mask.len(), self.m.len(), self.v.len()] {
            if len != n {
                return Err(Error::LengthMismatch(len, n));
            }
        }
        self.t = self.t.saturating_add(1);
        let t = self.t as f64;
        let bc1 = 1.0 - cfg.adam_beta1.powf(t);
        let bc2 = 1.0 - cfg.adam_beta2.powf(t);
        for i in 0..n {
            let mut g = grad[i];
            if l1_mask[i] && cfg.l1_weight > 0.0 && params[i] != 0.0 {
                g -= cfg.l1_weight * params[i].signum();
            }
            self.m[i] = cfg.adam_beta1 * self.m[i] + (1.0 - cfg.adam_beta1) * g;
            self.v[i] = cfg.adam_beta2 * self.v[i] + (1.0 - cfg.adam_beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] += cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.adam_eps);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Relaxed objective on the training set before this epoch's step.
    pub train_objective: f64,
    /// Exact empirical partial AUC on the validation set after the step.
    pub valid_pauc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub scorer: Scorer,
    pub config: TrainConfig,
    pub history: Vec<EpochRecord>,
    /// Epoch of the returned snapshot, `None` when no epoch ran.
    pub best_epoch: Option<usize>,
}

impl TrainedModel {
    pub fn best_valid_pauc(&self) -> Option<f64> {
        self.best_epoch.map(|e| self.history[e - 1].valid_pauc)
    }
}

pub fn score_assignment(sc: &Scorer, ds: &Dataset) -> Result<ScoreAssignment> {
    if sc.dim() != ds.dim() {
        return Err(Error::DimensionMismatch { expected: sc.dim(), got: ds.dim() });
    }
    ScoreAssignment::new(sc.scores(ds.positives())?, sc.scores(ds.negatives())?)
}

/// Full-batch Adam ascent on the relaxed partial AUC at `cfg.range`.
///
/// After each step the exact partial AUC on `valid_ds` is recorded. The
/// returned scorer is the snapshot with the highest validation value
/// (earliest on ties). Training stops early after `cfg.patience` epochs
/// without strict improvement.
pub fn train(init: &Scorer, train_ds: &Dataset, valid_ds: &Dataset, cfg: &TrainConfig) -> Result<TrainedModel> {
    cfg.validate()?;
    for ds in [train_ds, valid_ds] {
        if ds.dim() != init.dim() {
            return Err(Error::DimensionMismatch { expected: init.dim(), got: ds.dim() });
        }
    }
    let mut current = init.clone();
    let mask = current.l1_mask();
    let mut adam = AdamState::new(current.params().len());
    let mut history = Vec::new();
    let mut best: Option<(usize, f64, Scorer)> = None;

    for epoch in 1..=cfg.max_epochs {
        let eval = objective::surrogate_grad(&current, train_ds, cfg.range)?;
        let grad = eval.grad.expect("gradient requested");
        if !eval.value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteObjective(epoch));
        }
        adam.step(current.params_mut(), &grad, &mask, cfg)?;
        if current.params().iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFiniteObjective(epoch));
        }
        let valid = score_assignment(&current, valid_ds)
            .map(|sa| metrics::empirical_pauc(&sa, cfg.range))
            .map_err(|_| Error::NonFiniteObjective(epoch))?;
        history.push(EpochRecord { epoch, train_objective: eval.value, valid_pauc: valid });

        match &best {
            Some((_, v, _)) if valid <= *v => {}
            _ => best = Some((epoch, valid, current.clone())),
        }
        let best_epoch = best.as_ref().map_or(0, |b| b.0);
        if cfg.patience > 0 && epoch - best_epoch >= cfg.patience {
            log::debug!("early stop at epoch {epoch}, best epoch {best_epoch}");
            break;
        }
    }

    let (scorer, best_epoch) = match best {
        Some((e, _, sc)) => (sc, Some(e)),
        None => (init.clone(), None),
    };
    Ok(TrainedModel { scorer, config: cfg.clone(), history, best_epoch })
}

/// pAUC(0, fpr) and TPR at one FPR readout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Readout {
    pub fpr: f64,
    pub pauc: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub readouts: Vec<Readout>,
    pub auc: f64,
}

impl MetricsReport {
    pub fn from_scores(sa: &ScoreAssignment) -> Self {
        let roc = metrics::roc_curve(sa);
        let readouts = READOUT_FPRS
            .iter()
            .map(|&fpr| Readout {
                fpr,
                pauc: metrics::empirical_pauc(sa, PaucRange::upto(fpr).expect("readout in (0,1]")),
                tpr: metrics::tpr_at_fpr(&roc, fpr),
            })
            .collect();
        Self { readouts, auc: metrics::empirical_auc(sa) }
    }

    pub fn pauc_at(&self, fpr: f64) -> Option<f64> {
        self.readouts.iter().find(|r| r.fpr == fpr).map(|r| r.pauc)
    }

    pub fn tpr_at(&self, fpr: f64) -> Option<f64> {
        self.readouts.iter().find(|r| r.fpr == fpr).map(|r| r.tpr)
    }
}

/// Scores `test_ds` with the model's snapshot and reports pAUC(0, b) and TPR
/// at each FPR readout plus the full AUC.
pub fn evaluate(model: &TrainedModel, test_ds: &Dataset) -> Result<MetricsReport> {
    evaluate_scorer(&model.scorer, test_ds)
}

pub fn evaluate_scorer(sc: &Scorer, test_ds: &Dataset) -> Result<MetricsReport> {
    Ok(MetricsReport::from_scores(&score_assignment(sc, test_ds)?))
}

/// Row label in the style `GMM-pAUC (beta=0.1)`; a full-range model is
/// labelled `GMM-AUC`.
pub fn method_label(family: Family, range: PaucRange) -> String {
    let name = match family {
        Family::Linear => "Linear",
        Family::Mlp => "DNN",
        Family::GmmRatio => "GMM",
    };
    if range.is_full() {
        format!("{name}-AUC")
    } else if range.alpha() == 0.0 {
        format!("{name}-pAUC (beta={})", range.beta())
    } else {
        format!("{name}-pAUC ({},{})", range.alpha(), range.beta())
    }
}

/// Mean and standard deviation of several reports, e.g. over evaluation
/// splits. The standard deviation is the sample one (`n - 1`), zero for a
/// single report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub method: String,
    pub runs: usize,
    pub pauc_mean: Vec<f64>,
    pub pauc_std: Vec<f64>,
    pub tpr_mean: Vec<f64>,
    pub tpr_std: Vec<f64>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl ReportSummary {
    pub fn new(method: impl Into<String>, reports: &[MetricsReport]) -> Self {
        let mut s = Self {
            method: method.into(),
            runs: reports.len(),
            pauc_mean: Vec::new(),
            pauc_std: Vec::new(),
            tpr_mean: Vec::new(),
            tpr_std: Vec::new(),
        };
        if reports.is_empty() {
            return s;
        }
        for i in 0..READOUT_FPRS.len() {
            let (m, sd) = mean_std(&reports.iter().map(|r| r.readouts[i].pauc).collect::<Vec<_>>());
            s.pauc_mean.push(m);
            s.pauc_std.push(sd);
            let (m, sd) = mean_std(&reports.iter().map(|r| r.readouts[i].tpr).collect::<Vec<_>>());
            s.tpr_mean.push(m);
            s.tpr_std.push(sd);
        }
        s
    }
}

/// Fixed-width pAUC and TPR tables, percentages with one decimal and the
/// standard deviation in parentheses.
pub fn render_tables(rows: &[ReportSummary]) -> String {
    let width = rows.iter().map(|r| r.method.len()).max().unwrap_or(0).max("Method".len());
    let mut out = String::new();
    for (title, pick) in [
        ("Average pAUC value (%)", 0usize),
        ("Average TPR value (%)", 1usize),
    ] {
        let _ = writeln!(out, "{title}");
        let mut header = format!("{:<width$}", "Method");
        for fpr in READOUT_FPRS {
            let _ = write!(header, " | {:>12}", format!("FPR={fpr}"));
        }
        let _ = writeln!(out, "{header}");
        let _ = writeln!(out, "{}", "-".repeat(header.len()));
        for r in rows {
            let (mean, std) = if pick == 0 { (&r.pauc_mean, &r.pauc_std) } else { (&r.tpr_mean, &r.tpr_std) };
            let mut line = format!("{:<width$}", r.method);
            for (m, s) in mean.iter().zip(std) {
                let _ = write!(line, " | {:>12}", format!("{:.1} ({:.1})", 100.0 * m, 100.0 * s));
            }
            let _ = writeln!(out, "{line}");
        }
        out.push('\n');
    }
    out
}
