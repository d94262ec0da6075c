//! Scoring functions `f(x; theta)` over a flat parameter vector.
//!
//! Three families share one [`Scorer`] type:
//!
//! - `Linear`: `f(x) = theta . x`.
//! - `Mlp`: feedforward network with `tanh` or `selu` hidden layers and a
//!   single linear output unit.
//! - `GmmRatio`: `f(x) = log p(x; theta+) - log p(x; theta-)` for two
//!   diagonal-covariance Gaussian mixtures.
//!
//! Parameter layouts:
//!
//! - `Linear`: `d` weights, no bias.
//! - `Mlp`: for each layer in order, the weight matrix (row-major,
//!   `out x in`) followed by the `out` biases. The last layer has `out = 1`.
//! - `GmmRatio`: the positive mixture block then the negative one. Each block
//!   is `K` raw log-weights (softmax-normalized), `K x d` means, then
//!   `K x d` log standard deviations.

mod gmm;
mod mlp;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, streams};

pub use gmm::{fit_em, gmm_log_density, EmFit, GmmParams, LOG_STDDEV_MIN, STDDEV_MIN};
pub use mlp::{Activation, SELU_ALPHA, SELU_LAMBDA};

/// Family and layout of a [`Scorer`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Shape {
    Linear { dim: usize },
    Mlp { dim: usize, hidden: Vec<usize>, activation: Activation },
    GmmRatio { dim: usize, k_pos: usize, k_neg: usize },
}

impl Shape {
    pub fn dim(&self) -> usize {
        match *self {
            Shape::Linear { dim } | Shape::Mlp { dim, .. } | Shape::GmmRatio { dim, .. } => dim,
        }
    }

    pub fn family(&self) -> Family {
        match self {
            Shape::Linear { .. } => Family::Linear,
            Shape::Mlp { .. } => Family::Mlp,
            Shape::GmmRatio { .. } => Family::GmmRatio,
        }
    }

    /// Number of parameters implied by the layout.
    pub fn param_len(&self) -> usize {
        match self {
            Shape::Linear { dim } => *dim,
            Shape::Mlp { dim, hidden, .. } => mlp::param_len(*dim, hidden),
            Shape::GmmRatio { dim, k_pos, k_neg } => {
                gmm::block_len(*k_pos, *dim) + gmm::block_len(*k_neg, *dim)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dim() == 0 {
            return Err(Error::BadShape("input dimension must be at least 1".into()));
        }
        match self {
            Shape::Linear { .. } => Ok(()),
            Shape::Mlp { hidden, .. } => {
                if hidden.is_empty() {
                    Err(Error::BadShape("mlp needs at least one hidden layer".into()))
                } else if hidden.contains(&0) {
                    Err(Error::BadShape("hidden layer widths must be at least 1".into()))
                } else {
                    Ok(())
                }
            }
            Shape::GmmRatio { k_pos, k_neg, .. } => {
                if *k_pos == 0 || *k_neg == 0 {
                    Err(Error::BadShape("mixtures need at least one component".into()))
                } else {
                    Ok(())
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Linear,
    Mlp,
    GmmRatio,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Linear => "linear",
            Family::Mlp => "mlp",
            Family::GmmRatio => "gmm_ratio",
        })
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Family::Linear),
            "mlp" => Ok(Family::Mlp),
            "gmm_ratio" | "gmm" => Ok(Family::GmmRatio),
            other => Err(Error::Config(format!("unknown scorer family `{other}`"))),
        }
    }
}

/// A scoring function with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScorerDoc", into = "ScorerDoc")]
pub struct Scorer {
    shape: Shape,
    params: Vec<f64>,
}

impl Scorer {
    pub fn new(shape: Shape, params: Vec<f64>) -> Result<Self> {
        shape.validate()?;
        let expected = shape.param_len();
        if params.len() != expected {
            return Err(Error::ParamLength { expected, got: params.len() });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::BadShape("parameters must be finite".into()));
        }
        Ok(Self { shape, params })
    }

    /// Linear scorer with all-zero weights.
    pub fn init_linear(dim: usize) -> Result<Self> {
        Self::new(Shape::Linear { dim }, vec![0.0; dim])
    }

    /// Network with the given hidden widths and a linear output unit.
    /// Weights are uniform in `±sqrt(3 / fan_in)`, biases zero.
    pub fn init_mlp(dim: usize, hidden: &[usize], activation: Activation, seed: u64) -> Result<Self> {
        let shape = Shape::Mlp { dim, hidden: hidden.to_vec(), activation };
        shape.validate()?;
        let params = mlp::init_params(dim, hidden, &mut rng::stream(seed, streams::INIT_MLP));
        Self::new(shape, params)
    }

    pub fn gmm_ratio(positive: &GmmParams, negative: &GmmParams) -> Result<Self> {
        let dim = positive.dim();
        if negative.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: negative.dim() });
        }
        positive.validate()?;
        negative.validate()?;
        let mut params = positive.to_flat();
        params.extend(negative.to_flat());
        Self::new(Shape::GmmRatio { dim, k_pos: positive.k(), k_neg: negative.k() }, params)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn family(&self) -> Family {
        self.shape.family()
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// The positive and negative mixtures of a `GmmRatio` scorer.
    pub fn gmm_blocks(&self) -> Option<(GmmParams, GmmParams)> {
        match self.shape {
            Shape::GmmRatio { dim, k_pos, k_neg } => {
                let (p, n) = self.params.split_at(gmm::block_len(k_pos, dim));
                Some((GmmParams::from_flat(k_pos, dim, p), GmmParams::from_flat(k_neg, dim, n)))
            }
            _ => None,
        }
    }

    /// Which coordinates L1 shrinkage applies to. Mixture log-weights and
    /// log standard deviations are excluded.
    pub fn l1_mask(&self) -> Vec<bool> {
        match self.shape {
            Shape::GmmRatio { dim, k_pos, k_neg } => {
                let mut mask = gmm::block_l1_mask(k_pos, dim);
                mask.extend(gmm::block_l1_mask(k_neg, dim));
                mask
            }
            _ => vec![true; self.params.len()],
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() })
        }
    }

    pub fn score(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(match &self.shape {
            Shape::Linear { .. } => dot(&self.params, x),
            Shape::Mlp { dim, hidden, activation } => {
                mlp::forward(*dim, hidden, *activation, &self.params, x)
            }
            Shape::GmmRatio { dim, k_pos, .. } => {
                let (p, n) = self.params.split_at(gmm::block_len(*k_pos, *dim));
                gmm::block_log_density(*dim, p, x) - gmm::block_log_density(*dim, n, x)
            }
        })
    }

    pub fn scores(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        xs.iter().map(|x| self.score(x)).collect()
    }

    /// `out += weight * df/dtheta (x)`; returns `f(x)`.
    pub fn accumulate_grad(&self, x: &[f64], weight: f64, out: &mut [f64]) -> Result<f64> {
        self.check_dim(x)?;
        if out.len() != self.params.len() {
            return Err(Error::LengthMismatch(out.len(), self.params.len()));
        }
        Ok(match &self.shape {
            Shape::Linear { .. } => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o += weight * v;
                }
                dot(&self.params, x)
            }
            Shape::Mlp { dim, hidden, activation } => {
                mlp::backward(*dim, hidden, *activation, &self.params, x, weight, out)
            }
            Shape::GmmRatio { dim, k_pos, .. } => {
                let split = gmm::block_len(*k_pos, *dim);
                let (p, n) = self.params.split_at(split);
                let (out_p, out_n) = out.split_at_mut(split);
                gmm::block_log_density_grad(*dim, p, x, weight, out_p)
                    - gmm::block_log_density_grad(*dim, n, x, -weight, out_n)
            }
        })
    }

    /// `df/dtheta` at `x`.
    pub fn grad_params(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut g = vec![0.0; self.params.len()];
        self.accumulate_grad(x, 1.0, &mut g)?;
        Ok(g)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub const SCORER_FORMAT_VERSION: &str = "1";

/// On-disk form: `{version, family, shape, params}`.
#[derive(Serialize, Deserialize)]
struct ScorerDoc {
    version: String,
    family: Family,
    shape: ShapeDoc,
    params: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ShapeDoc {
    dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hidden: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    activation: Option<Activation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k_pos: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k_neg: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    covariance: Option<String>,
}

impl From<Scorer> for ScorerDoc {
    fn from(sc: Scorer) -> Self {
        let mut shape = ShapeDoc {
            dim: sc.dim(),
            hidden: None,
            activation: None,
            k_pos: None,
            k_neg: None,
            covariance: None,
        };
        match &sc.shape {
            Shape::Linear { .. } => {}
            Shape::Mlp { hidden, activation, .. } => {
                shape.hidden = Some(hidden.clone());
                shape.activation = Some(*activation);
            }
            Shape::GmmRatio { k_pos, k_neg, .. } => {
                shape.k_pos = Some(*k_pos);
                shape.k_neg = Some(*k_neg);
                shape.covariance = Some("diagonal".into());
            }
        }
        ScorerDoc {
            version: SCORER_FORMAT_VERSION.into(),
            family: sc.family(),
            shape,
            params: sc.params,
        }
    }
}

impl TryFrom<ScorerDoc> for Scorer {
    type Error = Error;

    fn try_from(doc: ScorerDoc) -> Result<Self> {
        if doc.version != SCORER_FORMAT_VERSION {
            return Err(Error::Config(format!("unsupported scorer version `{}`", doc.version)));
        }
        let missing = |field: &str| Error::Config(format!("{} scorer missing shape.{field}", doc.family));
        let dim = doc.shape.dim;
        let shape = match doc.family {
            Family::Linear => Shape::Linear { dim },
            Family::Mlp => Shape::Mlp {
                dim,
                hidden: doc.shape.hidden.clone().ok_or_else(|| missing("hidden"))?,
                activation: doc.shape.activation.ok_or_else(|| missing("activation"))?,
            },
            Family::GmmRatio => {
                if let Some(cov) = &doc.shape.covariance {
                    if cov != "diagonal" {
                        return Err(Error::Config(format!("unsupported covariance `{cov}`")));
                    }
                }
                Shape::GmmRatio {
                    dim,
                    k_pos: doc.shape.k_pos.ok_or_else(|| missing("k_pos"))?,
                    k_neg: doc.shape.k_neg.ok_or_else(|| missing("k_neg"))?,
                }
            }
        };
        Scorer::new(shape, doc.params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_gmm(mean: f64) -> GmmParams {
        GmmParams { log_weights: vec![0.0], means: vec![vec![mean]], log_stddevs: vec![vec![0.0]] }
    }

    #[test]
    fn linear_score_and_grad() {
        let sc = Scorer::new(Shape::Linear { dim: 2 }, vec![1.0, -2.0]).unwrap();
        assert_eq!(sc.score(&[3.0, 1.0]).unwrap(), 1.0);
        assert_eq!(sc.grad_params(&[3.0, 1.0]).unwrap(), vec![3.0, 1.0]);
        assert!(matches!(sc.score(&[1.0]), Err(Error::DimensionMismatch { expected: 2, got: 1 })));
    }

    #[test]
    fn init_linear_zeros() {
        let sc = Scorer::init_linear(13).unwrap();
        assert_eq!(sc.params(), &[0.0; 13]);
    }

    #[test]
    fn symmetric_gmm_ratio_is_2x() {
        let sc = Scorer::gmm_ratio(&unit_gmm(1.0), &unit_gmm(-1.0)).unwrap();
        assert!(sc.score(&[0.0]).unwrap().abs() < 1e-15);
        assert!((sc.score(&[1.0]).unwrap() - 2.0).abs() < 1e-14);
        assert!((sc.score(&[-3.5]).unwrap() + 7.0).abs() < 1e-13);
    }

    #[test]
    fn symmetric_gmm_ratio_mean_gradients() {
        // layout per block: [log_w, mean, log_std]
        let sc = Scorer::gmm_ratio(&unit_gmm(1.0), &unit_gmm(-1.0)).unwrap();
        let g = sc.grad_params(&[0.0]).unwrap();
        let h = 1e-6;
        for idx in [1usize, 4] {
            let mut plus = sc.clone();
            plus.params_mut()[idx] += h;
            let mut minus = sc.clone();
            minus.params_mut()[idx] -= h;
            let fd = (plus.score(&[0.0]).unwrap() - minus.score(&[0.0]).unwrap()) / (2.0 * h);
            assert!((g[idx] - fd).abs() < 1e-8, "param {idx}: {} vs {fd}", g[idx]);
        }
        // d f / d mu+ = (x - mu+) = -1, d f / d mu- = -(x - mu-) = -1
        assert!((g[1] + 1.0).abs() < 1e-15);
        assert!((g[4] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn identical_mixtures_score_zero() {
        let g = GmmParams {
            log_weights: vec![0.3, -0.2],
            means: vec![vec![0.5, -1.0], vec![2.0, 0.1]],
            log_stddevs: vec![vec![0.1, -0.3], vec![0.0, 0.4]],
        };
        let sc = Scorer::gmm_ratio(&g, &g).unwrap();
        for x in [[0.0, 0.0], [3.0, -7.0], [100.0, 50.0]] {
            assert_eq!(sc.score(&x).unwrap(), 0.0);
        }
    }

    #[test]
    fn zero_mlp_scores_zero() {
        let shape = Shape::Mlp { dim: 3, hidden: vec![4, 2], activation: Activation::Tanh };
        let sc = Scorer::new(shape.clone(), vec![0.0; shape.param_len()]).unwrap();
        assert_eq!(sc.score(&[1.0, -2.0, 3.0]).unwrap(), 0.0);
    }

    #[test]
    fn mlp_init_is_seeded() {
        let a = Scorer::init_mlp(13, &[50], Activation::Tanh, 1).unwrap();
        let b = Scorer::init_mlp(13, &[50], Activation::Tanh, 1).unwrap();
        let c = Scorer::init_mlp(13, &[50], Activation::Tanh, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.params().len(), 13 * 50 + 50 + 50 + 1);
        assert!(matches!(Scorer::init_mlp(13, &[], Activation::Tanh, 1), Err(Error::BadShape(_))));
        assert!(matches!(Scorer::init_mlp(13, &[3, 0], Activation::Selu, 1), Err(Error::BadShape(_))));
    }

    #[test]
    fn param_length_is_checked() {
        assert!(matches!(
            Scorer::new(Shape::Linear { dim: 3 }, vec![0.0; 2]),
            Err(Error::ParamLength { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let sc = Scorer::init_mlp(3, &[5, 2], Activation::Selu, 9).unwrap();
        let text = serde_json::to_string(&sc).unwrap();
        assert!(text.starts_with(r#"{"version":"1","family":"mlp""#));
        let back: Scorer = serde_json::from_str(&text).unwrap();
        assert_eq!(back, sc);

        let gmm = Scorer::gmm_ratio(&unit_gmm(0.1), &unit_gmm(-1.0 / 3.0)).unwrap();
        let back: Scorer = serde_json::from_str(&serde_json::to_string(&gmm).unwrap()).unwrap();
        assert_eq!(back, gmm);

        let bad = r#"{"version":"2","family":"linear","shape":{"dim":1},"params":[0.0]}"#;
        assert!(serde_json::from_str::<Scorer>(bad).is_err());
    }

    #[test]
    fn l1_mask_skips_gmm_scale_and_weight() {
        let g = GmmParams {
            log_weights: vec![0.0, 0.0],
            means: vec![vec![0.0], vec![1.0]],
            log_stddevs: vec![vec![0.0], vec![0.0]],
        };
        let sc = Scorer::gmm_ratio(&g, &unit_gmm(0.0)).unwrap();
        let expected = [false, false, true, true, false, false, false, true, false];
        assert_eq!(sc.l1_mask(), expected);
    }
}
