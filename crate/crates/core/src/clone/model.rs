use rand::Rng;

use super::encode::{encode, FEATURE_DIM};
use crate::gridworld::{Action, Observation};

pub const OUTPUTS: usize = Action::COUNT;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingMeta {
    pub examples: u64,
    pub epochs: u32,
    pub seed: u64,
    pub final_loss: f64,
    pub train_accuracy: f64,
}

/// One-hidden-layer ReLU classifier over encoded observations.
///
/// All parameters live in one flat buffer laid out as
/// `[w1 (input × hidden), b1 (hidden), w2 (hidden × 7), b2 (7)]`,
/// with `w1` stored row-per-input so sparse inputs touch contiguous rows.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyModel {
    input_dim: usize,
    hidden: usize,
    params: Vec<f64>,
    pub meta: TrainingMeta,
}

/// Per-example intermediate values kept for backprop.
struct Activations {
    hidden: Vec<f64>,
    mask: Vec<f64>,
    probs: [f64; OUTPUTS],
}

impl PolicyModel {
    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        PolicyModel {
            input_dim,
            hidden,
            params: vec![0.0; Self::param_count(input_dim, hidden)],
            meta: TrainingMeta::default(),
        }
    }

    /// Xavier-uniform weights, zero biases.
    pub fn initialized<R: Rng>(input_dim: usize, hidden: usize, rng: &mut R) -> Self {
        let mut m = Self::zeros(input_dim, hidden);
        let a1 = (6.0 / (input_dim + hidden) as f64).sqrt();
        let a2 = (6.0 / (hidden + OUTPUTS) as f64).sqrt();
        let (w1, w2) = (m.w1_range(), m.w2_range());
        for p in &mut m.params[w1] {
            *p = rng.gen_range(-a1..a1);
        }
        for p in &mut m.params[w2] {
            *p = rng.gen_range(-a2..a2);
        }
        m
    }

    pub(crate) fn from_parts(input_dim: usize, hidden: usize, params: Vec<f64>, meta: TrainingMeta) -> Option<Self> {
        (params.len() == Self::param_count(input_dim, hidden)).then_some(PolicyModel {
            input_dim,
            hidden,
            params,
            meta,
        })
    }

    pub fn param_count(input_dim: usize, hidden: usize) -> usize {
        input_dim * hidden + hidden + hidden * OUTPUTS + OUTPUTS
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn w1_range(&self) -> std::ops::Range<usize> {
        0..self.input_dim * self.hidden
    }

    fn b1_range(&self) -> std::ops::Range<usize> {
        let s = self.input_dim * self.hidden;
        s..s + self.hidden
    }

    fn w2_range(&self) -> std::ops::Range<usize> {
        let s = self.b1_range().end;
        s..s + self.hidden * OUTPUTS
    }

    fn b2_range(&self) -> std::ops::Range<usize> {
        let s = self.w2_range().end;
        s..s + OUTPUTS
    }

    fn forward(&self, x: &[f64], mask: Option<&[f64]>) -> Activations {
        debug_assert_eq!(x.len(), self.input_dim);
        let h = self.hidden;
        let mut pre = self.params[self.b1_range()].to_vec();
        let w1 = &self.params[self.w1_range()];
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                let row = &w1[i * h..(i + 1) * h];
                for (acc, w) in pre.iter_mut().zip(row) {
                    *acc += xi * w;
                }
            }
        }
        let mask = match mask {
            Some(m) => m.to_vec(),
            None => vec![1.0; h],
        };
        let hidden: Vec<f64> = pre
            .iter()
            .zip(&mask)
            .map(|(&p, &m)| if p > 0.0 { p * m } else { 0.0 })
            .collect();
        let mut logits = [0.0; OUTPUTS];
        logits.copy_from_slice(&self.params[self.b2_range()]);
        let w2 = &self.params[self.w2_range()];
        for (j, &hj) in hidden.iter().enumerate() {
            if hj != 0.0 {
                for (k, l) in logits.iter_mut().enumerate() {
                    *l += hj * w2[j * OUTPUTS + k];
                }
            }
        }
        Activations {
            hidden,
            mask,
            probs: softmax(&logits),
        }
    }

    /// Action distribution for an encoded observation (no dropout).
    pub fn predict_features(&self, x: &[f64]) -> [f64; OUTPUTS] {
        self.forward(x, None).probs
    }

    pub fn predict(&self, obs: &Observation) -> [f64; OUTPUTS] {
        self.predict_features(&encode(obs))
    }

    /// Mean cross-entropy over `batch` with dropout disabled.
    pub fn loss(&self, batch: &[(Vec<f64>, Action)]) -> f64 {
        let total: f64 = batch
            .iter()
            .map(|(x, a)| -self.forward(x, None).probs[a.index()].ln())
            .sum();
        total / batch.len() as f64
    }

    /// Mean cross-entropy and its gradient. `masks`, when given, holds one
    /// (already rescaled) dropout mask per example.
    pub fn loss_and_gradient(
        &self,
        batch: &[(Vec<f64>, Action)],
        masks: Option<&[Vec<f64>]>,
    ) -> (f64, Vec<f64>) {
        let h = self.hidden;
        let n = batch.len() as f64;
        let mut grad = vec![0.0; self.params.len()];
        let (w1r, b1r, w2r, b2r) = (self.w1_range(), self.b1_range(), self.w2_range(), self.b2_range());
        let w2 = &self.params[w2r.clone()];
        let mut loss = 0.0;
        for (e, (x, a)) in batch.iter().enumerate() {
            let act = self.forward(x, masks.map(|m| m[e].as_slice()));
            loss -= act.probs[a.index()].ln();
            let mut dlogits = act.probs;
            dlogits[a.index()] -= 1.0;
            for d in &mut dlogits {
                *d /= n;
            }
            for (g, d) in grad[b2r.clone()].iter_mut().zip(&dlogits) {
                *g += d;
            }
            let mut dpre = vec![0.0; h];
            for j in 0..h {
                let hj = act.hidden[j];
                let row = &w2[j * OUTPUTS..(j + 1) * OUTPUTS];
                let gw2 = &mut grad[w2r.start + j * OUTPUTS..w2r.start + (j + 1) * OUTPUTS];
                let mut dh = 0.0;
                for k in 0..OUTPUTS {
                    gw2[k] += hj * dlogits[k];
                    dh += row[k] * dlogits[k];
                }
                // hidden = relu(pre) * mask, so a positive output means pre > 0.
                if hj > 0.0 {
                    dpre[j] = dh * act.mask[j];
                }
            }
            for (g, d) in grad[b1r.clone()].iter_mut().zip(&dpre) {
                *g += d;
            }
            for (i, &xi) in x.iter().enumerate() {
                if xi != 0.0 {
                    let gw1 = &mut grad[w1r.start + i * h..w1r.start + (i + 1) * h];
                    for (g, d) in gw1.iter_mut().zip(&dpre) {
                        *g += xi * d;
                    }
                }
            }
        }
        (loss / n, grad)
    }
}

impl Default for PolicyModel {
    fn default() -> Self {
        Self::zeros(FEATURE_DIM, super::DEFAULT_HIDDEN)
    }
}

pub fn softmax(logits: &[f64; OUTPUTS]) -> [f64; OUTPUTS] {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = [0.0; OUTPUTS];
    let mut sum = 0.0;
    for (o, &l) in out.iter_mut().zip(logits) {
        *o = (l - max).exp();
        sum += *o;
    }
    for o in &mut out {
        *o /= sum;
    }
    out
}
