//! Sigmoid-relaxed empirical partial AUC and its parameter gradient.
//!
//! The relaxed objective replaces every indicator `I(f(x+) > f(x-))` of the
//! empirical partial AUC by `sigmoid(f(x+) - f(x-))`, keeping the same
//! negative ranking and boundary weights. The ranking depends on the
//! parameters only through a discontinuous sort, so each evaluation freezes
//! the ranking it computed and differentiates the active smooth piece.
//!
//! Sums run in a fixed order (negatives by rank, then positives by index),
//! so results are bit-reproducible.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::metrics::{band_weights, rank_negatives, PaucRange};
use crate::scoring::Scorer;

/// `1 / (1 + exp(-(f_pos - f_neg)))` without overflow for any finite gap.
pub fn sigmoid_pair(f_pos: f64, f_neg: f64) -> f64 {
    let d = f_pos - f_neg;
    if d >= 0.0 {
        1.0 / (1.0 + (-d).exp())
    } else {
        let e = d.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateEval {
    pub value: f64,
    /// Present only for gradient evaluations.
    pub grad: Option<Vec<f64>>,
    /// Negative indices in descending score order at evaluation time.
    pub ranking: Vec<usize>,
}

fn check_dims(sc: &Scorer, ds: &Dataset) -> Result<()> {
    if sc.dim() != ds.dim() {
        return Err(Error::DimensionMismatch { expected: sc.dim(), got: ds.dim() });
    }
    Ok(())
}

fn normalizer(ds: &Dataset, range: PaucRange) -> f64 {
    ds.n_pos() as f64 * ds.n_neg() as f64 * range.width()
}

fn value_with(
    pos_scores: &[f64],
    neg_scores: &[f64],
    ranking: &[usize],
    range: PaucRange,
) -> f64 {
    let mut total = 0.0;
    for rw in band_weights(neg_scores.len(), range) {
        let fneg = neg_scores[ranking[rw.rank]];
        let row: f64 = pos_scores.iter().map(|&fp| sigmoid_pair(fp, fneg)).sum();
        total += rw.weight * row;
    }
    total / (pos_scores.len() as f64 * neg_scores.len() as f64 * range.width())
}

/// Relaxed partial AUC of `sc` on `ds`, ranking negatives by their current
/// scores.
pub fn surrogate_pauc(sc: &Scorer, ds: &Dataset, range: PaucRange) -> Result<SurrogateEval> {
    check_dims(sc, ds)?;
    let pos = sc.scores(ds.positives())?;
    let neg = sc.scores(ds.negatives())?;
    let ranking = rank_negatives(&neg);
    let value = value_with(&pos, &neg, &ranking, range);
    Ok(SurrogateEval { value, grad: None, ranking })
}

/// Relaxed partial AUC under a caller-supplied negative ranking. With the
/// ranking held fixed the objective is smooth in the parameters, which is
/// what [`surrogate_grad`] differentiates.
pub fn surrogate_pauc_frozen(sc: &Scorer, ds: &Dataset, range: PaucRange, ranking: &[usize]) -> Result<f64> {
    check_dims(sc, ds)?;
    if ranking.len() != ds.n_neg() {
        return Err(Error::LengthMismatch(ranking.len(), ds.n_neg()));
    }
    let pos = sc.scores(ds.positives())?;
    let neg = sc.scores(ds.negatives())?;
    Ok(value_with(&pos, &neg, ranking, range))
}

/// Value and gradient of the relaxed partial AUC.
///
/// Every active pair `(i, j)` with boundary weight `c_j` contributes
/// `c_j s (1 - s) (df(x_i+) - df(x_j-))` where `s` is its sigmoid; pair
/// coefficients are first folded into one weight per sample so each sample
/// is back-propagated once.
pub fn surrogate_grad(sc: &Scorer, ds: &Dataset, range: PaucRange) -> Result<SurrogateEval> {
    check_dims(sc, ds)?;
    let pos = sc.scores(ds.positives())?;
    let neg = sc.scores(ds.negatives())?;
    let ranking = rank_negatives(&neg);
    let norm = normalizer(ds, range);

    let mut pos_w = vec![0.0; pos.len()];
    let mut neg_w: Vec<(usize, f64)> = Vec::new();
    let mut total = 0.0;
    for rw in band_weights(neg.len(), range) {
        let j = ranking[rw.rank];
        let fneg = neg[j];
        let (mut row, mut row_w) = (0.0, 0.0);
        for (fp, pw) in pos.iter().zip(pos_w.iter_mut()) {
            let s = sigmoid_pair(*fp, fneg);
            row += s;
            let c = rw.weight * s * (1.0 - s);
            *pw += c;
            row_w += c;
        }
        total += rw.weight * row;
        neg_w.push((j, row_w));
    }

    let mut grad = vec![0.0; sc.params().len()];
    for (x, w) in ds.positives().iter().zip(&pos_w) {
        if *w != 0.0 {
            sc.accumulate_grad(x, w / norm, &mut grad)?;
        }
    }
    for (j, w) in neg_w {
        if w != 0.0 {
            sc.accumulate_grad(&ds.negatives()[j], -w / norm, &mut grad)?;
        }
    }
    Ok(SurrogateEval { value: total / norm, grad: Some(grad), ranking })
}
