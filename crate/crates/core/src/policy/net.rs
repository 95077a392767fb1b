//! Small fully connected regressor for the flip moment.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const LAYER_SIZES: [usize; 4] = [3, 10, 10, 1];

pub fn elu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        x.exp_m1()
    }
}

fn elu_grad(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        x.exp()
    }
}

/// Elu on hidden layers, identity output. Targets are standardized during
/// training; `predict` returns de-standardized units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionNet {
    pub sizes: Vec<usize>,
    /// `weights[l][o][i]` maps unit `i` of layer `l` to unit `o` of layer `l + 1`.
    pub weights: Vec<Vec<Vec<f64>>>,
    pub biases: Vec<Vec<f64>>,
    pub target_mean: f64,
    pub target_std: f64,
}

impl ActionNet {
    pub fn zeros(sizes: &[usize]) -> Self {
        let weights = sizes
            .windows(2)
            .map(|w| vec![vec![0.0; w[0]]; w[1]])
            .collect();
        let biases = sizes[1..].iter().map(|&n| vec![0.0; n]).collect();
        Self {
            sizes: sizes.to_vec(),
            weights,
            biases,
            target_mean: 0.0,
            target_std: 1.0,
        }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init(sizes: &[usize], seed: u64) -> Self {
        let mut net = Self::zeros(sizes);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (l, w) in net.weights.iter_mut().enumerate() {
            let lim = (6.0 / (sizes[l] + sizes[l + 1]) as f64).sqrt();
            for row in w.iter_mut() {
                for v in row.iter_mut() {
                    *v = rng.gen_range(-lim..lim);
                }
            }
        }
        net
    }

    pub fn n_params(&self) -> usize {
        self.sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    /// Flattened parameters, layer by layer: weights row-major then biases.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            for row in w {
                out.extend_from_slice(row);
            }
            out.extend_from_slice(b);
        }
        out
    }

    pub fn set_params(&mut self, p: &[f64]) {
        let mut k = 0;
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            for row in w.iter_mut() {
                for v in row.iter_mut() {
                    *v = p[k];
                    k += 1;
                }
            }
            for v in b.iter_mut() {
                *v = p[k];
                k += 1;
            }
        }
    }

    /// Raw output in standardized target units.
    pub fn forward(&self, x: &[f64]) -> f64 {
        let mut a = x.to_vec();
        let last = self.weights.len() - 1;
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let z: Vec<f64> = w
                .iter()
                .zip(b)
                .map(|(row, bi)| bi + row.iter().zip(&a).map(|(wi, ai)| wi * ai).sum::<f64>())
                .collect();
            a = if l == last { z } else { z.into_iter().map(elu).collect() };
        }
        a[0]
    }

    /// De-standardized output (N·mm), unclamped.
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.forward(x) * self.target_std + self.target_mean
    }

    /// Mean squared error over the batch (standardized targets) and its
    /// gradient with respect to `params()`.
    pub fn loss_and_grad(&self, xs: &[[f64; 3]], ys: &[f64]) -> (f64, Vec<f64>) {
        let n = xs.len() as f64;
        let nl = self.weights.len();
        let mut grad_w: Vec<Vec<Vec<f64>>> = self
            .weights
            .iter()
            .map(|w| vec![vec![0.0; w[0].len()]; w.len()])
            .collect();
        let mut grad_b: Vec<Vec<f64>> = self.biases.iter().map(|b| vec![0.0; b.len()]).collect();
        let mut loss = 0.0;
        for (x, y) in xs.iter().zip(ys) {
            // Forward with caches.
            let mut acts = vec![x.to_vec()];
            let mut pre = Vec::with_capacity(nl);
            for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
                let a = &acts[l];
                let z: Vec<f64> = w
                    .iter()
                    .zip(b)
                    .map(|(row, bi)| bi + row.iter().zip(a).map(|(wi, ai)| wi * ai).sum::<f64>())
                    .collect();
                let next = if l == nl - 1 { z.clone() } else { z.iter().map(|&v| elu(v)).collect() };
                pre.push(z);
                acts.push(next);
            }
            let err = acts[nl][0] - y;
            loss += err * err / n;
            // Backward.
            let mut delta = vec![2.0 * err / n];
            for l in (0..nl).rev() {
                for (o, d) in delta.iter().enumerate() {
                    grad_b[l][o] += d;
                    for (i, a) in acts[l].iter().enumerate() {
                        grad_w[l][o][i] += d * a;
                    }
                }
                if l > 0 {
                    let w = &self.weights[l];
                    delta = (0..acts[l].len())
                        .map(|i| {
                            let s: f64 = delta.iter().enumerate().map(|(o, d)| d * w[o][i]).sum();
                            s * elu_grad(pre[l - 1][i])
                        })
                        .collect();
                }
            }
        }
        let mut g = Vec::with_capacity(self.n_params());
        for (w, b) in grad_w.iter().zip(&grad_b) {
            for row in w {
                g.extend_from_slice(row);
            }
            g.extend_from_slice(b);
        }
        (loss, g)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.params().iter().all(|v| v.is_finite())
            && self.target_mean.is_finite()
            && self.target_std.is_finite()
            && self.target_std > 0.0;
        let shape = self.sizes.len() >= 2
            && self.weights.len() == self.sizes.len() - 1
            && self.biases.len() == self.sizes.len() - 1
            && self.weights.iter().enumerate().all(|(l, w)| {
                w.len() == self.sizes[l + 1] && w.iter().all(|r| r.len() == self.sizes[l])
            })
            && self.biases.iter().enumerate().all(|(l, b)| b.len() == self.sizes[l + 1])
            && self.sizes[0] == 3
            && *self.sizes.last().unwrap() == 1;
        if finite && shape {
            Ok(())
        } else {
            Err(Error::InvalidParameter("malformed action network".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainSettings {
    pub learning_rate: f64,
    pub momentum: f64,
    pub max_steps: usize,
    /// Stop once the loss improves by less than `plateau_tol` (relative) over this many steps.
    pub plateau_window: usize,
    pub plateau_tol: f64,
    pub seed: u64,
}

impl Default for TrainSettings {
    fn default() -> Self {
        Self {
            learning_rate: 1e-2,
            momentum: 0.9,
            max_steps: 50_000,
            plateau_window: 100,
            plateau_tol: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub steps: usize,
    /// Final MSE in standardized units.
    pub loss: f64,
    /// Training RMSE in target units (N·mm).
    pub rmse: f64,
    pub target_std: f64,
}

/// Full-batch gradient descent with momentum on already-normalized inputs.
pub fn train_action(
    xs: &[[f64; 3]],
    targets: &[f64],
    settings: &TrainSettings,
) -> Result<(ActionNet, TrainReport)> {
    if xs.is_empty() || xs.len() != targets.len() {
        return Err(Error::InsufficientData(format!(
            "{} inputs for {} targets",
            xs.len(),
            targets.len()
        )));
    }
    let n = targets.len() as f64;
    let mean = targets.iter().sum::<f64>() / n;
    let var = targets.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / n;
    let std = if var.sqrt() < 1e-12 { 1.0 } else { var.sqrt() };
    let ys: Vec<f64> = targets.iter().map(|t| (t - mean) / std).collect();

    let mut net = ActionNet::init(&LAYER_SIZES, settings.seed);
    net.target_mean = mean;
    net.target_std = std;
    let mut p = net.params();
    let mut vel = vec![0.0; p.len()];
    let mut history: Vec<f64> = Vec::new();
    let mut last_finite = f64::NAN;
    let mut steps = 0;
    let mut loss;
    loop {
        let (l, g) = net.loss_and_grad(xs, &ys);
        loss = l;
        if !l.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::TrainingDiverged { last_finite_loss: last_finite });
        }
        last_finite = l;
        history.push(l);
        let w = settings.plateau_window;
        if history.len() > w {
            // A rise is momentum overshoot, not a plateau; only a flat loss stops.
            let old = history[history.len() - 1 - w];
            if old <= 0.0 || ((old - l) / old).abs() < settings.plateau_tol {
                break;
            }
        }
        if steps >= settings.max_steps {
            break;
        }
        for ((pi, vi), gi) in p.iter_mut().zip(vel.iter_mut()).zip(&g) {
            *vi = settings.momentum * *vi - settings.learning_rate * gi;
            *pi += *vi;
        }
        net.set_params(&p);
        steps += 1;
    }
    let report = TrainReport {
        steps,
        loss,
        rmse: loss.sqrt() * std,
        target_std: std,
    };
    Ok((net, report))
}
