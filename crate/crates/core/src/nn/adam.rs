//! Adam with bias correction and a step-decay learning-rate schedule.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Multiplier applied to the learning rate every `decay_every` epochs.
    pub decay_factor: f64,
    pub decay_every: usize,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.009,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            decay_factor: 0.9,
            decay_every: 250,
        }
    }
}

impl AdamConfig {
    /// `lr * decay_factor^floor(epoch / decay_every)`
    pub fn learning_rate_at(&self, epoch: usize) -> f64 {
        let periods = epoch.checked_div(self.decay_every).unwrap_or(0);
        self.learning_rate * libm::pow(self.decay_factor, periods as f64)
    }
}

/// First and second moments mirroring a list of parameter buffers.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub config: AdamConfig,
    step: u64,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(config: AdamConfig, sizes: &[usize]) -> Self {
        Self {
            config,
            step: 0,
            first: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            second: sizes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// One update of every buffer in `params` using the learning rate for `epoch`.
    pub fn step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]], epoch: usize) -> Result<()> {
        if params.len() != self.first.len() || grads.len() != self.first.len() {
            bail!(
                Shape,
                "optimizer tracks {} buffers, got {} params and {} grads",
                self.first.len(),
                params.len(),
                grads.len()
            );
        }
        for (i, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.len() != self.first[i].len() || g.len() != self.first[i].len() {
                bail!(Shape, "buffer {i}: parameter/gradient length mismatch");
            }
        }
        self.step += 1;
        let c = self.config;
        let lr = c.learning_rate_at(epoch);
        let t = self.step as f64;
        let bias1 = 1.0 - libm::pow(c.beta1, t);
        let bias2 = 1.0 - libm::pow(c.beta2, t);
        for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            let m = &mut self.first[i];
            let v = &mut self.second[i];
            for k in 0..p.len() {
                m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
                v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
                let m_hat = m[k] / bias1;
                let v_hat = v[k] / bias2;
                p[k] -= lr * m_hat / (libm::sqrt(v_hat) + c.epsilon);
            }
        }
        Ok(())
    }
}
