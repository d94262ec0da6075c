use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::rng::Rng;

pub const SELU_LAMBDA: f64 = 1.050_700_987_355_480_5;
pub const SELU_ALPHA: f64 = 1.673_263_242_354_377_3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Selu,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Selu => {
                if z > 0.0 {
                    SELU_LAMBDA * z
                } else {
                    SELU_LAMBDA * SELU_ALPHA * z.exp_m1()
                }
            }
        }
    }

    /// Derivative given the preactivation `z` and the output `a`.
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Selu => {
                if z > 0.0 {
                    SELU_LAMBDA
                } else {
                    SELU_LAMBDA * SELU_ALPHA * z.exp()
                }
            }
        }
    }
}

impl std::fmt::Display for Activation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Activation::Tanh => "tanh",
            Activation::Selu => "selu",
        })
    }
}

impl std::str::FromStr for Activation {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "tanh" => Ok(Activation::Tanh),
            "selu" => Ok(Activation::Selu),
            other => Err(crate::Error::Config(format!("unknown activation `{other}`"))),
        }
    }
}

/// `(fan_in, fan_out)` of each layer, output unit included.
fn layers(dim: usize, hidden: &[usize]) -> impl Iterator<Item = (usize, usize)> + '_ {
    let widths = std::iter::once(dim).chain(hidden.iter().copied()).chain(std::iter::once(1));
    widths.clone().zip(widths.skip(1))
}

pub(super) fn param_len(dim: usize, hidden: &[usize]) -> usize {
    layers(dim, hidden).map(|(i, o)| o * i + o).sum()
}

pub(super) fn init_params(dim: usize, hidden: &[usize], rng: &mut Rng) -> Vec<f64> {
    let mut params = Vec::with_capacity(param_len(dim, hidden));
    for (fan_in, fan_out) in layers(dim, hidden) {
        let limit = (3.0 / fan_in as f64).sqrt();
        params.extend((0..fan_in * fan_out).map(|_| rng.random_range(-limit..limit)));
        params.extend(std::iter::repeat_n(0.0, fan_out));
    }
    params
}

/// One affine layer: `out = W x + b` with `W` row-major.
fn affine(w: &[f64], b: &[f64], x: &[f64], out: &mut Vec<f64>) {
    out.clear();
    out.extend(b.iter().enumerate().map(|(o, bias)| {
        let row = &w[o * x.len()..(o + 1) * x.len()];
        bias + super::dot(row, x)
    }));
}

pub(super) fn forward(dim: usize, hidden: &[usize], act: Activation, params: &[f64], x: &[f64]) -> f64 {
    let mut a = x.to_vec();
    let mut z = Vec::new();
    let mut offset = 0;
    let n_layers = hidden.len() + 1;
    for (l, (fan_in, fan_out)) in layers(dim, hidden).enumerate() {
        let w = &params[offset..offset + fan_in * fan_out];
        let b = &params[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
        offset += fan_in * fan_out + fan_out;
        affine(w, b, &a, &mut z);
        if l + 1 == n_layers {
            return z[0];
        }
        a.clear();
        a.extend(z.iter().map(|&v| act.apply(v)));
    }
    unreachable!("network always has an output layer")
}

/// Reverse-mode pass. Adds `weight * df/dtheta` into `out` and returns `f(x)`.
pub(super) fn backward(
    dim: usize,
    hidden: &[usize],
    act: Activation,
    params: &[f64],
    x: &[f64],
    weight: f64,
    out: &mut [f64],
) -> f64 {
    let shapes: Vec<(usize, usize)> = layers(dim, hidden).collect();
    let mut offsets = Vec::with_capacity(shapes.len());
    let mut offset = 0;
    for &(i, o) in &shapes {
        offsets.push(offset);
        offset += i * o + o;
    }

    // activations[l] is the input to layer l; pre[l] its preactivation
    let mut activations: Vec<Vec<f64>> = vec![x.to_vec()];
    let mut pre: Vec<Vec<f64>> = Vec::with_capacity(shapes.len());
    for (l, &(fan_in, fan_out)) in shapes.iter().enumerate() {
        let w = &params[offsets[l]..offsets[l] + fan_in * fan_out];
        let b = &params[offsets[l] + fan_in * fan_out..offsets[l] + fan_in * fan_out + fan_out];
        let mut z = Vec::new();
        affine(w, b, &activations[l], &mut z);
        if l + 1 < shapes.len() {
            activations.push(z.iter().map(|&v| act.apply(v)).collect());
        }
        pre.push(z);
    }
    let value = pre[shapes.len() - 1][0];

    let mut delta = vec![weight];
    for l in (0..shapes.len()).rev() {
        let (fan_in, fan_out) = shapes[l];
        let input = &activations[l];
        let base = offsets[l];
        for o in 0..fan_out {
            let row = &mut out[base + o * fan_in..base + (o + 1) * fan_in];
            for (g, a) in row.iter_mut().zip(input) {
                *g += delta[o] * a;
            }
            out[base + fan_in * fan_out + o] += delta[o];
        }
        if l == 0 {
            break;
        }
        let w = &params[base..base + fan_in * fan_out];
        let mut prev = vec![0.0; fan_in];
        for (o, d) in delta.iter().enumerate() {
            for (p, wv) in prev.iter_mut().zip(&w[o * fan_in..(o + 1) * fan_in]) {
                *p += d * wv;
            }
        }
        for ((p, z), a) in prev.iter_mut().zip(&pre[l - 1]).zip(&activations[l]) {
            *p *= act.derivative(*z, *a);
        }
        delta = prev;
    }
    value
}
