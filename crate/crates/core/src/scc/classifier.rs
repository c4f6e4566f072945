//! Linear softmax connectivity classifier trained by minibatch SGD.
//!
//! Training stops after a fixed number of iterations with no convergence
//! test: a short warm-up fits the majority (clean) labels first, so the
//! loss of each item afterwards is a noise signal.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::SccConfig;

/// Per-channel z-scoring fitted on the training pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn identity(dim: usize) -> Self {
        Self { mean: vec![0.0; dim], scale: vec![1.0; dim] }
    }

    pub fn fit<'a>(rows: impl IntoIterator<Item = &'a [f64]>, dim: usize) -> Self {
        let rows: Vec<&[f64]> = rows.into_iter().collect();
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; dim];
        for r in &rows {
            for (m, v) in mean.iter_mut().zip(*r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for r in &rows {
            for ((s, v), m) in var.iter_mut().zip(*r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.mean).zip(&self.scale).map(|((v, m), s)| (v - m) / s).collect()
    }
}

/// Linear layer over standardized pooled features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierHead {
    pub dim: usize,
    pub num_classes: usize,
    /// Row-major `dim x num_classes`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub standardizer: Standardizer,
}

impl ClassifierHead {
    pub fn zeros(dim: usize, num_classes: usize) -> Self {
        Self {
            dim,
            num_classes,
            weights: vec![0.0; dim * num_classes],
            bias: vec![0.0; num_classes],
            standardizer: Standardizer::identity(dim),
        }
    }

    fn logits_standardized(&self, z: &[f64]) -> Vec<f64> {
        let k = self.num_classes;
        let mut out = self.bias.clone();
        for (d, &v) in z.iter().enumerate() {
            let row = &self.weights[d * k..(d + 1) * k];
            for (o, w) in out.iter_mut().zip(row) {
                *o += v * w;
            }
        }
        out
    }

    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        self.logits_standardized(&self.standardizer.apply(x))
    }

    pub fn probs(&self, x: &[f64]) -> Vec<f64> {
        softmax(&self.logits(x))
    }

    /// Cross-entropy of `label` for a raw (unstandardized) feature vector.
    pub fn loss(&self, x: &[f64], label: u8) -> f64 {
        let logits = self.logits(x);
        log_sum_exp(&logits) - logits[label as usize]
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / sum).collect()
}

pub(crate) fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Trains for exactly `cfg.warmup_iters` minibatch steps of momentum SGD on
/// cross-entropy. Each item is a pooled feature vector and its label; every
/// item carries equal weight.
pub fn train_classifier(items: &[(Vec<f64>, u8)], num_classes: usize, cfg: &SccConfig) -> Result<ClassifierHead> {
    let dim = items.first().map(|(x, _)| x.len()).ok_or(Error::DegenerateDataset)?;
    if items.iter().any(|(x, _)| x.len() != dim) {
        return Err(Error::Invalid("pooled feature vectors differ in length".into()));
    }
    if let Some((_, l)) = items.iter().find(|(_, l)| *l as usize >= num_classes) {
        return Err(Error::Invalid(format!("label {l} out of range for {num_classes} classes")));
    }
    let first = items[0].1;
    if items.iter().all(|(_, l)| *l == first) {
        return Err(Error::DegenerateDataset);
    }

    let standardizer = Standardizer::fit(items.iter().map(|(x, _)| x.as_slice()), dim);
    let z: Vec<Vec<f64>> = items.iter().map(|(x, _)| standardizer.apply(x)).collect();
    let mut head = ClassifierHead::zeros(dim, num_classes);
    let k = num_classes;
    let mut vel_w = vec![0.0; dim * k];
    let mut vel_b = vec![0.0; k];
    let mut grad_w = vec![0.0; dim * k];
    let mut grad_b = vec![0.0; k];

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..items.len()).collect();
    let batch = cfg.batch_size.min(items.len());
    let mut cursor = items.len();

    for _ in 0..cfg.warmup_iters {
        if cursor + batch > order.len() {
            order.shuffle(&mut rng);
            cursor = 0;
        }
        grad_w.iter_mut().for_each(|g| *g = 0.0);
        grad_b.iter_mut().for_each(|g| *g = 0.0);
        for &i in &order[cursor..cursor + batch] {
            let mut delta = softmax(&head.logits_standardized(&z[i]));
            delta[items[i].1 as usize] -= 1.0;
            for (d, &v) in z[i].iter().enumerate() {
                for (g, dl) in grad_w[d * k..(d + 1) * k].iter_mut().zip(&delta) {
                    *g += v * dl;
                }
            }
            for (g, dl) in grad_b.iter_mut().zip(&delta) {
                *g += dl;
            }
        }
        cursor += batch;
        let scale = 1.0 / batch as f64;
        for ((w, v), g) in head.weights.iter_mut().zip(&mut vel_w).zip(&grad_w) {
            *v = cfg.momentum * *v + g * scale;
            *w -= cfg.learning_rate * *v;
        }
        for ((b, v), g) in head.bias.iter_mut().zip(&mut vel_b).zip(&grad_b) {
            *v = cfg.momentum * *v + g * scale;
            *b -= cfg.learning_rate * *v;
        }
    }
    head.standardizer = standardizer;
    Ok(head)
}

/// Cross-entropy of each item under `head`.
pub fn per_connectivity_loss(head: &ClassifierHead, items: &[(Vec<f64>, u8)]) -> Vec<f64> {
    items.iter().map(|(x, l)| head.loss(x, *l)).collect()
}
