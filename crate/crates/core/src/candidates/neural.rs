//! Two-hidden-layer ReLU network trained by mini-batch gradient descent.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{rng_from_seed, std_normal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeuralLoss {
    /// Pinball loss at the critical ratio.
    Pinball,
    /// Squared error, followed by a constant residual-quantile shift.
    Mse,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Loss {
    Pinball { ratio: f64 },
    Mse,
}

impl Loss {
    #[inline]
    fn value_and_slope(&self, out: f64, y: f64) -> (f64, f64) {
        let r = out - y;
        match *self {
            Loss::Pinball { ratio } => {
                if r > 0.0 {
                    ((1.0 - ratio) * r, 1.0 - ratio)
                } else {
                    (-ratio * r, -ratio)
                }
            }
            Loss::Mse => (r * r, 2.0 * r),
        }
    }
}

/// Fully connected `input → h1 → h2 → 1` network with ReLU hidden units.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    input: usize,
    h1: usize,
    h2: usize,
    params: Vec<f64>,
}

struct Offsets {
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
    w3: usize,
    b3: usize,
}

struct Cache {
    z1: Vec<f64>,
    a1: Vec<f64>,
    z2: Vec<f64>,
    a2: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl Mlp {
    /// He-normal weights, zero biases.
    pub fn new<R: Rng + ?Sized>(input: usize, hidden: [usize; 2], rng: &mut R) -> Self {
        let [h1, h2] = hidden;
        let mut net = Self { input, h1, h2, params: vec![0.0; Self::param_count(input, hidden)] };
        let o = net.offsets();
        let fill = |p: &mut [f64], fan_in: usize, rng: &mut R| {
            let s = (2.0 / fan_in.max(1) as f64).sqrt();
            p.iter_mut().for_each(|v| *v = s * std_normal(rng));
        };
        fill(&mut net.params[o.w1..o.b1], input, rng);
        fill(&mut net.params[o.w2..o.b2], h1, rng);
        fill(&mut net.params[o.w3..o.b3], h2, rng);
        net
    }

    pub fn param_count(input: usize, hidden: [usize; 2]) -> usize {
        let [h1, h2] = hidden;
        h1 * input + h1 + h2 * h1 + h2 + h2 + 1
    }

    fn offsets(&self) -> Offsets {
        let w1 = 0;
        let b1 = w1 + self.h1 * self.input;
        let w2 = b1 + self.h1;
        let b2 = w2 + self.h2 * self.h1;
        let w3 = b2 + self.h2;
        let b3 = w3 + self.h2;
        Offsets { w1, b1, w2, b2, w3, b3 }
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn cache(&self) -> Cache {
        Cache {
            z1: vec![0.0; self.h1],
            a1: vec![0.0; self.h1],
            z2: vec![0.0; self.h2],
            a2: vec![0.0; self.h2],
            d1: vec![0.0; self.h1],
            d2: vec![0.0; self.h2],
        }
    }

    fn forward_cached(&self, x: &[f64], c: &mut Cache) -> f64 {
        let o = self.offsets();
        let p = &self.params;
        for i in 0..self.h1 {
            let row = &p[o.w1 + i * self.input..o.w1 + (i + 1) * self.input];
            let z = p[o.b1 + i] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            c.z1[i] = z;
            c.a1[i] = z.max(0.0);
        }
        for i in 0..self.h2 {
            let row = &p[o.w2 + i * self.h1..o.w2 + (i + 1) * self.h1];
            let z = p[o.b2 + i] + row.iter().zip(&c.a1).map(|(w, v)| w * v).sum::<f64>();
            c.z2[i] = z;
            c.a2[i] = z.max(0.0);
        }
        p[o.b3] + p[o.w3..o.b3].iter().zip(&c.a2).map(|(w, v)| w * v).sum::<f64>()
    }

    pub fn forward(&self, x: &[f64]) -> f64 {
        let mut c = self.cache();
        self.forward_cached(x, &mut c)
    }

    /// Mean loss over the batch and its gradient with respect to the
    /// flattened parameters (backpropagation; ReLU'(0) = 0).
    pub fn loss_and_gradient(&self, xs: &[Vec<f64>], ys: &[f64], loss: Loss) -> (f64, Vec<f64>) {
        let idx: Vec<usize> = (0..xs.len()).collect();
        let mut grad = vec![0.0; self.params.len()];
        let mut c = self.cache();
        let l = self.accumulate(xs, ys, &idx, loss, &mut grad, &mut c);
        (l, grad)
    }

    fn accumulate(&self, xs: &[Vec<f64>], ys: &[f64], batch: &[usize], loss: Loss, grad: &mut [f64], c: &mut Cache) -> f64 {
        let o = self.offsets();
        let p = &self.params;
        grad.iter_mut().for_each(|g| *g = 0.0);
        let scale = 1.0 / batch.len().max(1) as f64;
        let mut total = 0.0;
        for &j in batch {
            let x = &xs[j];
            let out = self.forward_cached(x, c);
            let (l, slope) = loss.value_and_slope(out, ys[j]);
            total += l;
            let g_out = slope * scale;
            grad[o.b3] += g_out;
            for i in 0..self.h2 {
                grad[o.w3 + i] += g_out * c.a2[i];
                c.d2[i] = if c.z2[i] > 0.0 { g_out * p[o.w3 + i] } else { 0.0 };
            }
            c.d1.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..self.h2 {
                let d = c.d2[i];
                if d == 0.0 {
                    continue;
                }
                grad[o.b2 + i] += d;
                let base = o.w2 + i * self.h1;
                for k in 0..self.h1 {
                    grad[base + k] += d * c.a1[k];
                    c.d1[k] += d * p[base + k];
                }
            }
            for k in 0..self.h1 {
                if c.z1[k] <= 0.0 {
                    continue;
                }
                let d = c.d1[k];
                grad[o.b1 + k] += d;
                let base = o.w1 + k * self.input;
                for (g, v) in grad[base..base + self.input].iter_mut().zip(x) {
                    *g += d * v;
                }
            }
        }
        total * scale
    }

    /// Plain mini-batch SGD with a reshuffle every epoch.
    pub fn train(&mut self, xs: &[Vec<f64>], ys: &[f64], loss: Loss, cfg: &TrainConfig, seed: u64) {
        let mut rng = rng_from_seed(seed);
        let mut order: Vec<usize> = (0..xs.len()).collect();
        let mut grad = vec![0.0; self.params.len()];
        let mut c = self.cache();
        let batch = cfg.batch_size.max(1);
        for _ in 0..cfg.epochs {
            order.shuffle(&mut rng);
            for chunk in order.chunks(batch) {
                self.accumulate(xs, ys, chunk, loss, &mut grad, &mut c);
                for (w, g) in self.params.iter_mut().zip(&grad) {
                    *w -= cfg.learning_rate * g;
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
}
