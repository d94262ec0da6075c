//! Empirical ROC analysis: AUC, partial AUC over an FPR band, and TPR
//! readouts.
//!
//! Indicators use strict inequality, so a positive tied with a negative
//! counts as a miss. Negatives are ranked by a stable descending sort, so
//! tied negatives keep their input order.

use std::cmp::Ordering;
use std::io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when deciding whether `alpha * n` or `beta * n` is an
/// integer.
const INTEGRALITY_EPS: f64 = 1e-12;

/// FPR band `[alpha, beta]` with `0 <= alpha < beta <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRange")]
pub struct PaucRange {
    alpha: f64,
    beta: f64,
}

#[derive(Deserialize)]
struct RawRange {
    alpha: f64,
    beta: f64,
}

impl TryFrom<RawRange> for PaucRange {
    type Error = Error;

    fn try_from(raw: RawRange) -> Result<Self> {
        PaucRange::new(raw.alpha, raw.beta)
    }
}

impl PaucRange {
    pub const FULL: PaucRange = PaucRange { alpha: 0.0, beta: 1.0 };

    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if alpha >= 0.0 && alpha < beta && beta <= 1.0 {
            Ok(Self { alpha, beta })
        } else {
            Err(Error::InvalidRange { alpha, beta })
        }
    }

    /// `[0, beta]`.
    pub fn upto(beta: f64) -> Result<Self> {
        Self::new(0.0, beta)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn width(&self) -> f64 {
        self.beta - self.alpha
    }

    pub fn is_full(&self) -> bool {
        self.alpha == 0.0 && self.beta == 1.0
    }
}

/// Scores of the positive and negative samples under one scoring function.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreAssignment {
    pos: Vec<f64>,
    neg: Vec<f64>,
}

impl ScoreAssignment {
    pub fn new(pos: Vec<f64>, neg: Vec<f64>) -> Result<Self> {
        use crate::dataset::Class;
        if pos.is_empty() {
            return Err(Error::EmptyClass(Class::Positive));
        }
        if neg.is_empty() {
            return Err(Error::EmptyClass(Class::Negative));
        }
        if let Some(i) = pos.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature(Class::Positive, i));
        }
        if let Some(i) = neg.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature(Class::Negative, i));
        }
        Ok(Self { pos, neg })
    }

    pub fn pos(&self) -> &[f64] {
        &self.pos
    }

    pub fn neg(&self) -> &[f64] {
        &self.neg
    }
}

fn desc(a: f64, b: f64) -> Ordering {
    b.partial_cmp(&a).unwrap_or(Ordering::Equal)
}

/// Indices of `neg_scores` in descending score order; ties keep input order.
pub fn rank_negatives(neg_scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..neg_scores.len()).collect();
    idx.sort_by(|&a, &b| desc(neg_scores[a], neg_scores[b]));
    idx
}

/// Weight carried by one negative rank inside an FPR band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankWeight {
    /// Zero-based position in the descending ranking.
    pub rank: usize,
    pub weight: f64,
}

fn nearest_integer(v: f64) -> Option<f64> {
    let r = v.round();
    ((v - r).abs() <= INTEGRALITY_EPS * v.abs().max(1.0)).then_some(r)
}

/// Rank weights of the empirical partial-AUC estimator for `n_neg`
/// negatives.
///
/// With `j_a = ceil(alpha n)` and `j_b = floor(beta n)` (one-based ranks),
/// rank `j_a` gets the fractional weight `j_a - alpha n`, ranks
/// `j_a + 1 ..= j_b` get weight 1 and rank `j_b + 1` gets `beta n - j_b`.
/// Zero weights are dropped, so rank `j_b + 1` is never produced when
/// `beta n` is an integer. When the band lies strictly inside one rank cell
/// (`j_a > j_b`) that cell gets `(beta - alpha) n`. The weights always sum to
/// `(beta - alpha) n`.
pub fn band_weights(n_neg: usize, range: PaucRange) -> Vec<RankWeight> {
    let n = n_neg as f64;
    let lo = range.alpha * n;
    let hi = range.beta * n;
    let (lo_int, hi_int) = (nearest_integer(lo), nearest_integer(hi));
    let ja = lo_int.unwrap_or_else(|| lo.ceil());
    let jb = hi_int.unwrap_or_else(|| hi.floor());
    let lo_frac = if lo_int.is_some() { 0.0 } else { ja - lo };
    let hi_frac = if hi_int.is_some() { 0.0 } else { hi - jb };
    let (ja, jb) = (ja as usize, jb as usize);

    let mut out = Vec::new();
    if ja > jb {
        // alpha n and beta n fall inside the same cell, rank ja = jb + 1
        out.push(RankWeight { rank: ja - 1, weight: hi - lo });
        return out;
    }
    if lo_frac > 0.0 && ja >= 1 {
        out.push(RankWeight { rank: ja - 1, weight: lo_frac });
    }
    out.extend((ja + 1..=jb).map(|j| RankWeight { rank: j - 1, weight: 1.0 }));
    if hi_frac > 0.0 && jb < n_neg {
        out.push(RankWeight { rank: jb, weight: hi_frac });
    }
    out
}

/// Positive scores sorted ascending, for counting `#{i : pos_i > t}`.
struct SortedPositives(Vec<f64>);

impl SortedPositives {
    fn new(pos: &[f64]) -> Self {
        let mut v = pos.to_vec();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        Self(v)
    }

    fn count_above(&self, t: f64) -> usize {
        self.0.len() - self.0.partition_point(|&p| p <= t)
    }
}

/// Fraction of positive/negative pairs with the positive strictly higher.
pub fn empirical_auc(sa: &ScoreAssignment) -> f64 {
    let sorted = SortedPositives::new(&sa.pos);
    let wins: usize = sa.neg.iter().map(|&t| sorted.count_above(t)).sum();
    wins as f64 / (sa.pos.len() as f64 * sa.neg.len() as f64)
}

/// Empirical partial AUC over `range`, normalized by `n+ n- (beta - alpha)`.
pub fn empirical_pauc(sa: &ScoreAssignment, range: PaucRange) -> f64 {
    let ranking = rank_negatives(&sa.neg);
    let sorted = SortedPositives::new(&sa.pos);
    let total: f64 = band_weights(sa.neg.len(), range)
        .iter()
        .map(|rw| rw.weight * sorted.count_above(sa.neg[ranking[rw.rank]]) as f64)
        .sum();
    let norm = sa.pos.len() as f64 * sa.neg.len() as f64 * range.width();
    (total / norm).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
}

/// Staircase ROC curve from (0, 0) to (1, 1). Consecutive vertices differ in
/// exactly one coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
}

impl RocCurve {
    fn push(&mut self, p: RocPoint) {
        let n = self.points.len();
        if n >= 2 {
            let (a, b) = (self.points[n - 2], self.points[n - 1]);
            let same_row = a.tpr == b.tpr && b.tpr == p.tpr;
            let same_col = a.fpr == b.fpr && b.fpr == p.fpr;
            if same_row || same_col {
                self.points[n - 1] = p;
                return;
            }
        }
        self.points.push(p);
    }

    /// Two-column `fpr,tpr` CSV with a header row.
    pub fn write_csv(&self, writer: impl io::Write) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["fpr", "tpr"])?;
        for p in &self.points {
            wtr.write_record([p.fpr.to_string(), p.tpr.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Sweeps the threshold down through all distinct scores. At a score shared
/// by positives and negatives the negative step is taken first, giving the
/// lower staircase.
pub fn roc_curve(sa: &ScoreAssignment) -> RocCurve {
    let mut all: Vec<(f64, bool)> = sa
        .pos
        .iter()
        .map(|&s| (s, true))
        .chain(sa.neg.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| desc(a.0, b.0));
    let (np, nn) = (sa.pos.len() as f64, sa.neg.len() as f64);
    let mut curve = RocCurve { points: vec![RocPoint { fpr: 0.0, tpr: 0.0 }] };
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < all.len() {
        let value = all[i].0;
        let (mut dp, mut dn) = (0, 0);
        while i < all.len() && all[i].0 == value {
            if all[i].1 {
                dp += 1;
            } else {
                dn += 1;
            }
            i += 1;
        }
        if dn > 0 {
            fp += dn;
            curve.push(RocPoint { fpr: fp as f64 / nn, tpr: tp as f64 / np });
        }
        if dp > 0 {
            tp += dp;
            curve.push(RocPoint { fpr: fp as f64 / nn, tpr: tp as f64 / np });
        }
    }
    curve
}

/// Integral of the ROC staircase over `[alpha, beta]`, divided by the band
/// width. Each segment is clipped to the band and integrated exactly.
pub fn pauc_by_integration(roc: &RocCurve, range: PaucRange) -> f64 {
    let (lo, hi) = (range.alpha, range.beta);
    let mut area = 0.0;
    for w in roc.points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b.fpr <= a.fpr {
            continue;
        }
        let left = a.fpr.max(lo);
        let right = b.fpr.min(hi);
        if right <= left {
            continue;
        }
        let slope = (b.tpr - a.tpr) / (b.fpr - a.fpr);
        let at = |u: f64| a.tpr + slope * (u - a.fpr);
        area += 0.5 * (at(left) + at(right)) * (right - left);
    }
    (area / range.width()).clamp(0.0, 1.0)
}

/// Largest TPR among curve vertices with FPR not above `fpr`.
pub fn tpr_at_fpr(roc: &RocCurve, fpr: f64) -> f64 {
    roc.points
        .iter()
        .take_while(|p| p.fpr <= fpr + INTEGRALITY_EPS)
        .map(|p| p.tpr)
        .fold(0.0, f64::max)
}
