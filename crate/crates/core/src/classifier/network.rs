use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HIDDEN_UNITS: usize = 80;
const PROB_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Logistic,
    Mlp80,
    LinearSvm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Logistic, ModelKind::Mlp80, ModelKind::LinearSvm];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Logistic => "logistic",
            ModelKind::Mlp80 => "mlp80",
            ModelKind::LinearSvm => "linear_svm",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown model kind {s:?}")))
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Sigmoid,
    Tanh,
    Relu,
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sigmoid" => Ok(Activation::Sigmoid),
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            other => Err(Error::InvalidArgument(format!("unknown activation {other:?}"))),
        }
    }
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Sigmoid => sigmoid(z),
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative expressed through the activation output `a`.
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Hidden-unit dropout mask. Kept units are scaled by `1 / (1 - rate)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMask {
    pub keep: Vec<bool>,
    pub rate: f64,
}

impl DropoutMask {
    pub fn sample<R: Rng + ?Sized>(units: usize, rate: f64, rng: &mut R) -> Self {
        let keep = (0..units).map(|_| rng.random::<f64>() >= rate).collect();
        Self { keep, rate }
    }

    fn scale(&self, j: usize) -> f64 {
        if self.keep[j] {
            1.0 / (1.0 - self.rate)
        } else {
            0.0
        }
    }
}

/// Parameters of one of the three classifiers, stored as a single flat
/// vector so the optimizer and gradient checks can treat them uniformly.
///
/// Layout: linear models hold `[w (n_in), b]`; the shallow network holds
/// `[W1 (hidden x n_in, row-major), b1 (hidden), W2 (hidden), b2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub kind: ModelKind,
    pub n_in: usize,
    pub n_hidden: usize,
    pub activation: Activation,
    /// L2 penalty on weights (not biases), part of the training loss.
    pub l2: f64,
    pub params: Vec<f64>,
}

impl Network {
    pub fn zeros(kind: ModelKind, n_in: usize, activation: Activation, l2: f64) -> Self {
        let n_hidden = if kind == ModelKind::Mlp80 { HIDDEN_UNITS } else { 0 };
        Self::with_hidden(kind, n_in, n_hidden, activation, l2)
    }

    /// A network with an arbitrary hidden width; only meaningful for
    /// [`ModelKind::Mlp80`], used to keep tests small.
    pub fn with_hidden(kind: ModelKind, n_in: usize, n_hidden: usize, activation: Activation, l2: f64) -> Self {
        let n_params = if kind == ModelKind::Mlp80 { n_hidden * n_in + 2 * n_hidden + 1 } else { n_in + 1 };
        Self {
            kind,
            n_in,
            n_hidden,
            activation,
            l2,
            params: vec![0.0; n_params],
        }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init_glorot<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let mut fill = |slice: &mut [f64], fan_in: usize, fan_out: usize| {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for w in slice {
                *w = rng.random_range(-limit..limit);
            }
        };
        let (n_in, h) = (self.n_in, self.n_hidden);
        match self.kind {
            ModelKind::Mlp80 => {
                fill(&mut self.params[..h * n_in], n_in, h);
                fill(&mut self.params[h * n_in + h..h * n_in + 2 * h], h, 1);
            }
            _ => fill(&mut self.params[..n_in], n_in, 1),
        }
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    fn is_weight(&self, idx: usize) -> bool {
        match self.kind {
            ModelKind::Mlp80 => {
                let h = self.n_hidden;
                idx < h * self.n_in || (h * self.n_in + h..h * self.n_in + 2 * h).contains(&idx)
            }
            _ => idx < self.n_in,
        }
    }

    /// Named tensors with their shapes, for serialization.
    pub fn tensors(&self) -> Vec<(&'static str, Vec<usize>, &[f64])> {
        let (n, h) = (self.n_in, self.n_hidden);
        let p = &self.params;
        match self.kind {
            ModelKind::Mlp80 => vec![
                ("W1", vec![h, n], &p[..h * n]),
                ("b1", vec![h], &p[h * n..h * n + h]),
                ("W2", vec![1, h], &p[h * n + h..h * n + 2 * h]),
                ("b2", vec![1], &p[h * n + 2 * h..]),
            ],
            _ => vec![("w", vec![1, n], &p[..n]), ("b", vec![1], &p[n..])],
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_in {
            return Err(Error::Dimension {
                expected: self.n_in,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Pre-activation output: the logit for logistic/mlp, the margin for SVM.
    pub fn score(&self, x: &[f64], mask: Option<&DropoutMask>) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.score_unchecked(x, mask, None))
    }

    fn score_unchecked(&self, x: &[f64], mask: Option<&DropoutMask>, hidden: Option<&mut Vec<(f64, f64)>>) -> f64 {
        let n = self.n_in;
        let p = &self.params;
        match self.kind {
            ModelKind::Mlp80 => {
                let h = self.n_hidden;
                let (w1, rest) = p.split_at(h * n);
                let (b1, rest) = rest.split_at(h);
                let (w2, b2) = rest.split_at(h);
                let mut z2 = b2[0];
                let mut cache = hidden;
                if let Some(c) = cache.as_deref_mut() {
                    c.clear();
                }
                for j in 0..h {
                    let row = &w1[j * n..(j + 1) * n];
                    let z1 = b1[j] + row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>();
                    let a = self.activation.apply(z1);
                    let scale = mask.map_or(1.0, |m| m.scale(j));
                    z2 += w2[j] * a * scale;
                    if let Some(c) = cache.as_deref_mut() {
                        c.push((z1, a));
                    }
                }
                z2
            }
            _ => p[n] + p[..n].iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>(),
        }
    }

    /// Output probability through the sigmoid head.
    pub fn forward(&self, x: &[f64], mask: Option<&DropoutMask>) -> Result<f64> {
        Ok(sigmoid(self.score(x, mask)?))
    }

    fn penalty(&self) -> f64 {
        if self.l2 == 0.0 {
            return 0.0;
        }
        0.5 * self.l2
            * self
                .params
                .iter()
                .enumerate()
                .filter(|(i, _)| self.is_weight(*i))
                .map(|(_, w)| w * w)
                .sum::<f64>()
    }

    /// Per-example loss from the raw score and the 0/1 target.
    fn example_loss(&self, score: f64, y: f64) -> (f64, f64) {
        match self.kind {
            ModelKind::LinearSvm => {
                let s = 2.0 * y - 1.0;
                let slack = 1.0 - s * score;
                if slack > 0.0 {
                    (slack, -s)
                } else {
                    (0.0, 0.0)
                }
            }
            _ => {
                let p = sigmoid(score).clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
                let loss = -(y * p.ln() + (1.0 - y) * (1.0 - p).ln());
                // d/dscore of cross-entropy through the sigmoid
                (loss, sigmoid(score) - y)
            }
        }
    }

    /// Mean loss over the batch plus the L2 penalty. No gradient is formed.
    pub fn loss(&self, xs: &[&[f64]], ys: &[f64], masks: Option<&[DropoutMask]>) -> Result<f64> {
        if xs.is_empty() {
            return Err(Error::Insufficient("batch examples"));
        }
        let mut total = 0.0;
        for (i, (x, &y)) in xs.iter().zip(ys).enumerate() {
            self.check_dim(x)?;
            let s = self.score_unchecked(x, masks.map(|m| &m[i]), None);
            total += self.example_loss(s, y).0;
        }
        Ok(total / xs.len() as f64 + self.penalty())
    }

    /// Mean batch loss and its exact gradient for the given dropout masks.
    /// Cross-entropy uses probabilities clamped to `[1e-12, 1 - 1e-12]`; the
    /// gradient is that of the unclamped loss. The hinge gradient at the kink
    /// is taken as zero.
    pub fn loss_and_grad(&self, xs: &[&[f64]], ys: &[f64], masks: Option<&[DropoutMask]>) -> Result<(f64, Vec<f64>)> {
        if xs.is_empty() {
            return Err(Error::Insufficient("batch examples"));
        }
        if ys.len() != xs.len() {
            return Err(Error::Dimension {
                expected: xs.len(),
                got: ys.len(),
            });
        }
        let inv_n = 1.0 / xs.len() as f64;
        let mut grad = vec![0.0; self.params.len()];
        let mut total = 0.0;
        let mut hidden = Vec::with_capacity(self.n_hidden);
        let n = self.n_in;
        for (i, (x, &y)) in xs.iter().zip(ys).enumerate() {
            self.check_dim(x)?;
            let mask = masks.map(|m| &m[i]);
            let score = self.score_unchecked(x, mask, Some(&mut hidden));
            let (loss, dscore) = self.example_loss(score, y);
            total += loss;
            let dz = dscore * inv_n;
            if dz == 0.0 {
                continue;
            }
            match self.kind {
                ModelKind::Mlp80 => {
                    let h = self.n_hidden;
                    let (w2_off, b2_off) = (h * n + h, h * n + 2 * h);
                    grad[b2_off] += dz;
                    for (j, &(z1, a)) in hidden.iter().enumerate() {
                        let scale = mask.map_or(1.0, |m| m.scale(j));
                        grad[w2_off + j] += dz * a * scale;
                        let dz1 = dz * self.params[w2_off + j] * scale * self.activation.derivative(z1, a);
                        if dz1 == 0.0 {
                            continue;
                        }
                        grad[h * n + j] += dz1;
                        for (g, xi) in grad[j * n..(j + 1) * n].iter_mut().zip(x.iter()) {
                            *g += dz1 * xi;
                        }
                    }
                }
                _ => {
                    for (g, xi) in grad[..n].iter_mut().zip(x.iter()) {
                        *g += dz * xi;
                    }
                    grad[n] += dz;
                }
            }
        }
        if self.l2 != 0.0 {
            for (i, g) in grad.iter_mut().enumerate() {
                if self.is_weight(i) {
                    *g += self.l2 * self.params[i];
                }
            }
        }
        Ok((total * inv_n + self.penalty(), grad))
    }
}
