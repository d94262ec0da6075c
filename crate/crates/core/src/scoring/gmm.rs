//! Diagonal-covariance Gaussian mixtures: log-density, parameter gradient,
//! and maximum-likelihood fitting by EM.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, streams};

pub const STDDEV_MIN: f64 = 1e-6;
/// `ln(STDDEV_MIN)`; log standard deviations are clamped to this on read.
pub const LOG_STDDEV_MIN: f64 = -13.815_510_557_964_274;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_7;

/// One class's mixture. Weights are `softmax(log_weights)`, standard
/// deviations `exp(max(log_stddevs, LOG_STDDEV_MIN))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmParams {
    pub log_weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub log_stddevs: Vec<Vec<f64>>,
}

pub(super) fn block_len(k: usize, dim: usize) -> usize {
    k + 2 * k * dim
}

pub(super) fn block_l1_mask(k: usize, dim: usize) -> Vec<bool> {
    let mut mask = vec![false; block_len(k, dim)];
    mask[k..k + k * dim].iter_mut().for_each(|m| *m = true);
    mask
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `log N(x; mean, diag(exp(log_std)^2))`.
fn log_normal_diag(x: &[f64], mean: &[f64], log_std: &[f64]) -> f64 {
    x.iter()
        .zip(mean)
        .zip(log_std)
        .map(|((xv, m), s)| {
            let s = s.max(LOG_STDDEV_MIN);
            let z = (xv - m) * (-s).exp();
            -HALF_LN_2PI - s - 0.5 * z * z
        })
        .sum()
}

struct BlockView<'a> {
    k: usize,
    dim: usize,
    raw: &'a [f64],
}

impl<'a> BlockView<'a> {
    fn new(dim: usize, raw: &'a [f64]) -> Self {
        let k = raw.len() / (1 + 2 * dim);
        Self { k, dim, raw }
    }

    fn log_weights(&self) -> &'a [f64] {
        &self.raw[..self.k]
    }

    fn mean(&self, c: usize) -> &'a [f64] {
        let start = self.k + c * self.dim;
        &self.raw[start..start + self.dim]
    }

    fn log_std(&self, c: usize) -> &'a [f64] {
        let start = self.k + self.k * self.dim + c * self.dim;
        &self.raw[start..start + self.dim]
    }

    /// Per-component `log w_k + log N_k(x)`.
    fn joint(&self, x: &[f64]) -> Vec<f64> {
        let norm = log_sum_exp(self.log_weights());
        (0..self.k)
            .map(|c| self.log_weights()[c] - norm + log_normal_diag(x, self.mean(c), self.log_std(c)))
            .collect()
    }
}

pub(super) fn block_log_density(dim: usize, raw: &[f64], x: &[f64]) -> f64 {
    log_sum_exp(&BlockView::new(dim, raw).joint(x))
}

/// Adds `weight * d log p(x) / d block` into `out`; returns `log p(x)`.
pub(super) fn block_log_density_grad(dim: usize, raw: &[f64], x: &[f64], weight: f64, out: &mut [f64]) -> f64 {
    let view = BlockView::new(dim, raw);
    let k = view.k;
    let joint = view.joint(x);
    let log_p = log_sum_exp(&joint);
    let lw_norm = log_sum_exp(view.log_weights());
    for c in 0..k {
        let resp = (joint[c] - log_p).exp();
        let w = (view.log_weights()[c] - lw_norm).exp();
        out[c] += weight * (resp - w);
        for d in 0..dim {
            let s_raw = view.log_std(c)[d];
            let s = s_raw.max(LOG_STDDEV_MIN);
            let inv = (-s).exp();
            let z = (x[d] - view.mean(c)[d]) * inv;
            out[k + c * dim + d] += weight * resp * z * inv;
            if s_raw > LOG_STDDEV_MIN {
                out[k + k * dim + c * dim + d] += weight * resp * (z * z - 1.0);
            }
        }
    }
    log_p
}

impl GmmParams {
    pub fn k(&self) -> usize {
        self.log_weights.len()
    }

    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        let (k, d) = (self.k(), self.dim());
        if k == 0 || d == 0 {
            return Err(Error::BadShape("mixture needs K >= 1 and d >= 1".into()));
        }
        if self.means.len() != k || self.log_stddevs.len() != k {
            return Err(Error::BadShape("mixture arrays disagree on K".into()));
        }
        if self.means.iter().chain(&self.log_stddevs).any(|v| v.len() != d) {
            return Err(Error::BadShape("mixture component dimensions disagree".into()));
        }
        Ok(())
    }

    /// Normalized mixture weights.
    pub fn weights(&self) -> Vec<f64> {
        let norm = log_sum_exp(&self.log_weights);
        self.log_weights.iter().map(|w| (w - norm).exp()).collect()
    }

    pub fn stddevs(&self) -> Vec<Vec<f64>> {
        self.log_stddevs
            .iter()
            .map(|row| row.iter().map(|s| s.max(LOG_STDDEV_MIN).exp()).collect())
            .collect()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.log_weights.clone();
        v.extend(self.means.iter().flatten());
        v.extend(self.log_stddevs.iter().flatten());
        v
    }

    pub fn from_flat(k: usize, dim: usize, raw: &[f64]) -> Self {
        let view = BlockView { k, dim, raw };
        Self {
            log_weights: view.log_weights().to_vec(),
            means: (0..k).map(|c| view.mean(c).to_vec()).collect(),
            log_stddevs: (0..k).map(|c| view.log_std(c).to_vec()).collect(),
        }
    }

    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        gmm_log_density(self, x)
    }
}

/// `log sum_k w_k N(x; mu_k, diag(sigma_k^2))`, evaluated with log-sum-exp.
pub fn gmm_log_density(g: &GmmParams, x: &[f64]) -> Result<f64> {
    if x.len() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), got: x.len() });
    }
    Ok(block_log_density(g.dim(), &g.to_flat(), x))
}

/// Result of [`fit_em`].
#[derive(Debug, Clone, PartialEq)]
pub struct EmFit {
    pub params: GmmParams,
    /// Mean per-sample log-likelihood at the initial parameters and after
    /// every M-step.
    pub log_likelihood: Vec<f64>,
    pub converged: bool,
    /// Components whose responsibility mass vanished or whose variance hit
    /// the floor at some iteration.
    pub degenerate: Vec<usize>,
}

impl EmFit {
    pub fn iterations(&self) -> usize {
        self.log_likelihood.len().saturating_sub(1)
    }
}

/// k-means++ seeding: the first center uniformly at random, each later one
/// with probability proportional to squared distance to the nearest center.
fn seed_means(samples: &[Vec<f64>], k: usize, rng: &mut rng::Rng) -> Vec<Vec<f64>> {
    let mut centers = vec![samples[rng.random_range(0..samples.len())].clone()];
    let sq = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
    let mut dist: Vec<f64> = samples.iter().map(|s| sq(s, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = samples.len() - 1;
            for (i, d) in dist.iter().enumerate() {
                if target < *d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.random_range(0..samples.len())
        };
        let c = samples[pick].clone();
        for (d, s) in dist.iter_mut().zip(samples) {
            *d = d.min(sq(s, &c));
        }
        centers.push(c);
    }
    centers
}

struct EStep {
    resp: Vec<Vec<f64>>,
    mean_ll: f64,
}

fn e_step(g: &GmmParams, samples: &[Vec<f64>]) -> EStep {
    let flat = g.to_flat();
    let view = BlockView::new(g.dim(), &flat);
    let mut total = 0.0;
    let resp = samples
        .iter()
        .map(|x| {
            let joint = view.joint(x);
            let lp = log_sum_exp(&joint);
            total += lp;
            joint.iter().map(|j| (j - lp).exp()).collect()
        })
        .collect();
    EStep { resp, mean_ll: total / samples.len() as f64 }
}

/// Returns the indices of components that needed a floor.
fn m_step(g: &mut GmmParams, samples: &[Vec<f64>], resp: &[Vec<f64>]) -> Vec<usize> {
    let n = samples.len() as f64;
    let d = g.dim();
    let mut degenerate = Vec::new();
    for c in 0..g.k() {
        let mass: f64 = resp.iter().map(|r| r[c]).sum();
        if !(mass > f64::MIN_POSITIVE * n) {
            degenerate.push(c);
            g.log_weights[c] = (f64::MIN_POSITIVE).ln();
            continue;
        }
        g.log_weights[c] = (mass / n).ln();
        let mut mean = vec![0.0; d];
        for (x, r) in samples.iter().zip(resp) {
            for (m, v) in mean.iter_mut().zip(x) {
                *m += r[c] * v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= mass);
        let mut var = vec![0.0; d];
        for (x, r) in samples.iter().zip(resp) {
            for ((s, v), m) in var.iter_mut().zip(x).zip(&mean) {
                *s += r[c] * (v - m) * (v - m);
            }
        }
        let mut floored = false;
        g.log_stddevs[c] = var
            .iter()
            .map(|s| {
                let sd = (s / mass).sqrt();
                if sd < STDDEV_MIN {
                    floored = true;
                }
                sd.max(STDDEV_MIN).ln()
            })
            .collect();
        g.means[c] = mean;
        if floored {
            degenerate.push(c);
        }
    }
    degenerate
}

/// Maximum-likelihood fit of a `k`-component diagonal Gaussian mixture.
///
/// Means start from a seeded k-means++ selection, standard deviations from
/// the per-dimension spread of the data, weights uniform. Iteration stops
/// once the mean log-likelihood improves by less than `tol` or after
/// `max_iter` M-steps. Collapsed components keep the floor and are reported
/// in [`EmFit::degenerate`] rather than failing the fit.
pub fn fit_em(samples: &[Vec<f64>], k: usize, seed: u64, tol: f64, max_iter: usize) -> Result<EmFit> {
    if k == 0 {
        return Err(Error::BadShape("mixture needs at least one component".into()));
    }
    if samples.len() < k {
        return Err(Error::TooFewSamples { needed: k, got: samples.len() });
    }
    let d = samples[0].len();
    if d == 0 {
        return Err(Error::BadShape("samples must have dimension >= 1".into()));
    }
    if let Some(bad) = samples.iter().find(|s| s.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: bad.len() });
    }

    let n = samples.len() as f64;
    let mut spread = vec![0.0; d];
    let mut centroid = vec![0.0; d];
    for x in samples {
        centroid.iter_mut().zip(x).for_each(|(c, v)| *c += v / n);
    }
    for x in samples {
        for ((s, v), c) in spread.iter_mut().zip(x).zip(&centroid) {
            *s += (v - c) * (v - c) / n;
        }
    }
    let init_log_std: Vec<f64> = spread.iter().map(|v| v.sqrt().max(STDDEV_MIN).ln()).collect();

    let mut rng = rng::stream(seed, streams::EM);
    let mut g = GmmParams {
        log_weights: vec![-(k as f64).ln(); k],
        means: seed_means(samples, k, &mut rng),
        log_stddevs: vec![init_log_std; k],
    };

    let mut e = e_step(&g, samples);
    let mut trace = vec![e.mean_ll];
    let mut degenerate = Vec::new();
    let mut converged = false;
    for _ in 0..max_iter {
        for c in m_step(&mut g, samples, &e.resp) {
            if !degenerate.contains(&c) {
                log::warn!("EM component {c} degenerate; variance floor {STDDEV_MIN} applied");
                degenerate.push(c);
            }
        }
        let prev = e.mean_ll;
        e = e_step(&g, samples);
        trace.push(e.mean_ll);
        if e.mean_ll - prev < tol {
            converged = true;
            break;
        }
    }
    degenerate.sort_unstable();
    Ok(EmFit { params: g, log_likelihood: trace, converged, degenerate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::StandardNormal;
    use std::f64::consts::PI;

    fn single(mean: f64, log_std: f64) -> GmmParams {
        GmmParams { log_weights: vec![0.0], means: vec![vec![mean]], log_stddevs: vec![vec![log_std]] }
    }

    #[test]
    fn log_stddev_floor_constant() {
        assert_eq!(LOG_STDDEV_MIN, STDDEV_MIN.ln());
        assert_eq!(HALF_LN_2PI, 0.5 * (2.0 * PI).ln());
    }

    #[test]
    fn standard_normal_mode() {
        let v = gmm_log_density(&single(0.0, 0.0), &[0.0]).unwrap();
        assert!((v + 0.918_938_5).abs() < 1e-7);
    }

    #[test]
    fn far_tail_is_finite() {
        let v = gmm_log_density(&single(0.0, 0.0), &[40.0]).unwrap();
        assert!((v - (-800.0 - HALF_LN_2PI)).abs() < 1e-9);
        let two = GmmParams {
            log_weights: vec![0.0, 0.0],
            means: vec![vec![0.0], vec![5.0]],
            log_stddevs: vec![vec![0.0], vec![0.0]],
        };
        assert!(gmm_log_density(&two, &[1e3]).unwrap().is_finite());
    }

    #[test]
    fn duplicated_component_collapses() {
        let one = GmmParams {
            log_weights: vec![0.0],
            means: vec![vec![0.3, -1.0]],
            log_stddevs: vec![vec![0.2, -0.4]],
        };
        let two = GmmParams {
            log_weights: vec![1.7, 1.7],
            means: vec![vec![0.3, -1.0]; 2],
            log_stddevs: vec![vec![0.2, -0.4]; 2],
        };
        for x in [[0.0, 0.0], [2.0, -3.0]] {
            let a = gmm_log_density(&one, &x).unwrap();
            let b = gmm_log_density(&two, &x).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            gmm_log_density(&single(0.0, 0.0), &[0.0, 1.0]),
            Err(Error::DimensionMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn em_too_few_samples() {
        let s = vec![vec![0.0], vec![1.0], vec![2.0]];
        assert!(matches!(fit_em(&s, 5, 0, 1e-8, 100), Err(Error::TooFewSamples { needed: 5, got: 3 })));
    }

    #[test]
    fn em_single_component_is_closed_form() {
        let samples: Vec<Vec<f64>> = (0..37).map(|i| vec![(i as f64 * 0.37).sin() * 3.0, i as f64 * 0.1]).collect();
        let fit = fit_em(&samples, 1, 5, 1e-10, 50).unwrap();
        assert!(fit.converged);
        let n = samples.len() as f64;
        for d in 0..2 {
            let mean = samples.iter().map(|x| x[d]).sum::<f64>() / n;
            let sd = (samples.iter().map(|x| (x[d] - mean).powi(2)).sum::<f64>() / n).sqrt();
            assert!((fit.params.means[0][d] - mean).abs() < 1e-12);
            assert!((fit.params.stddevs()[0][d] - sd).abs() < 1e-12);
        }
    }

    #[test]
    fn em_recovers_separated_clusters() {
        let mut rng = rng::stream(42, 0);
        let truth = [[-4.0, 0.0], [4.0, 1.0]];
        let sd = 0.5;
        let samples: Vec<Vec<f64>> = truth
            .iter()
            .flat_map(|m| std::iter::repeat_n(m, 50))
            .map(|m| m.iter().map(|v| v + sd * rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let fit = fit_em(&samples, 2, 1, 1e-10, 500).unwrap();
        let bound = 3.0 * sd / 50f64.sqrt();
        for m in &truth {
            let hit = fit.params.means.iter().any(|est| est.iter().zip(m).all(|(a, b)| (a - b).abs() < bound));
            assert!(hit, "no component near {m:?}: {:?}", fit.params.means);
        }
        for w in fit.log_likelihood.windows(2) {
            assert!(w[1] >= w[0] - 1e-9);
        }
    }

    #[test]
    fn em_floors_collapsed_component() {
        let samples = vec![vec![1.0]; 6];
        let fit = fit_em(&samples, 2, 0, 1e-10, 20).unwrap();
        assert!(!fit.degenerate.is_empty());
        assert!(fit.params.stddevs().iter().flatten().all(|&s| s >= STDDEV_MIN * (1.0 - 1e-12)));
    }
}
