//! Activation, pooling and normalisation kernels with their backward passes.

use alloc::vec;
use alloc::vec::Vec;

use super::Tensor4;
use crate::error::{bail, Result};

pub fn relu(x: &Tensor4) -> Tensor4 {
    let mut y = x.clone();
    y.data_mut().iter_mut().for_each(|v| *v = v.max(0.0));
    y
}

/// Passes the gradient where the forward input was strictly positive.
pub fn relu_backward(x: &Tensor4, grad_out: &Tensor4) -> Tensor4 {
    let mut g = grad_out.clone();
    for (gv, &xv) in g.data_mut().iter_mut().zip(x.data()) {
        if xv <= 0.0 {
            *gv = 0.0;
        }
    }
    g
}

/// Max-pool output plus the flat input index of every selected maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxPoolOutput {
    pub output: Tensor4,
    pub argmax: Vec<usize>,
}

/// Windowed max. Ties go to the first element in row-major window order.
pub fn maxpool(x: &Tensor4, window: usize, stride: usize) -> Result<MaxPoolOutput> {
    let [n, c, h, w] = x.shape();
    if window == 0 || stride == 0 {
        bail!(InvalidArgument, "pool window and stride must be positive");
    }
    if window > h || window > w {
        bail!(Shape, "pool window {window} larger than input {h}x{w}");
    }
    let ho = (h - window) / stride + 1;
    let wo = (w - window) / stride + 1;
    let mut output = Tensor4::zeros([n, c, ho, wo]);
    let mut argmax = Vec::with_capacity(output.len());
    let src = x.data();
    let mut o = 0;
    for plane in 0..n * c {
        let base = plane * h * w;
        for oy in 0..ho {
            for ox in 0..wo {
                let mut best = base + oy * stride * w + ox * stride;
                for i in 0..window {
                    for j in 0..window {
                        let at = base + (oy * stride + i) * w + ox * stride + j;
                        if src[at] > src[best] {
                            best = at;
                        }
                    }
                }
                output.data_mut()[o] = src[best];
                argmax.push(best);
                o += 1;
            }
        }
    }
    Ok(MaxPoolOutput { output, argmax })
}

pub fn maxpool_backward(input_shape: [usize; 4], argmax: &[usize], grad_out: &Tensor4) -> Tensor4 {
    let mut g = Tensor4::zeros(input_shape);
    for (&at, &v) in argmax.iter().zip(grad_out.data()) {
        g.data_mut()[at] += v;
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Batch statistics; running statistics are updated by the caller.
    Train,
    /// Running statistics; output is independent of the rest of the batch.
    Eval,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchNormParams {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    pub eps: f64,
    pub momentum: f64,
}

impl BatchNormParams {
    pub fn new(channels: usize) -> Self {
        Self {
            gamma: vec![1.0; channels],
            beta: vec![0.0; channels],
            running_mean: vec![0.0; channels],
            running_var: vec![1.0; channels],
            eps: 1e-5,
            momentum: 0.1,
        }
    }

    pub fn channels(&self) -> usize {
        self.gamma.len()
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.channels();
        if self.beta.len() != c || self.running_mean.len() != c || self.running_var.len() != c {
            bail!(Shape, "batch-norm vectors disagree in length");
        }
        if !(self.eps > 0.0) {
            bail!(InvalidArgument, "batch-norm epsilon must be positive");
        }
        if self.running_var.iter().any(|&v| !(v >= 0.0)) {
            bail!(InvalidInput, "running variance must be non-negative");
        }
        Ok(())
    }

    /// Exponential update of the running statistics from one batch.
    pub fn update_running(&mut self, stats: &BatchStats) {
        self.blend_running(stats, self.momentum);
    }

    /// `running = (1 - w) running + w batch`.
    pub fn blend_running(&mut self, stats: &BatchStats, w: f64) {
        let m = w;
        for c in 0..self.channels() {
            self.running_mean[c] = (1.0 - m) * self.running_mean[c] + m * stats.mean[c];
            self.running_var[c] = (1.0 - m) * self.running_var[c] + m * stats.unbiased_var[c];
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchStats {
    pub mean: Vec<f64>,
    pub unbiased_var: Vec<f64>,
}

/// Everything the backward pass needs from a batch-norm forward.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchNormCache {
    pub normalized: Tensor4,
    pub inv_std: Vec<f64>,
    pub stats: Option<BatchStats>,
}

pub fn batchnorm(x: &Tensor4, p: &BatchNormParams, mode: Mode) -> Result<(Tensor4, BatchNormCache)> {
    let [n, c, h, w] = x.shape();
    if c != p.channels() {
        bail!(Shape, "batch-norm over {} channels got {c}", p.channels());
    }
    let count = n * h * w;
    let plane = h * w;
    let (mean, var, stats) = match mode {
        Mode::Eval => (p.running_mean.clone(), p.running_var.clone(), None),
        Mode::Train => {
            let mut mean = vec![0.0; c];
            let mut var = vec![0.0; c];
            for b in 0..n {
                let s = x.sample(b);
                for ch in 0..c {
                    mean[ch] += s[ch * plane..(ch + 1) * plane].iter().sum::<f64>();
                }
            }
            mean.iter_mut().for_each(|m| *m /= count as f64);
            for b in 0..n {
                let s = x.sample(b);
                for ch in 0..c {
                    var[ch] += s[ch * plane..(ch + 1) * plane]
                        .iter()
                        .map(|v| (v - mean[ch]) * (v - mean[ch]))
                        .sum::<f64>();
                }
            }
            let unbiased = var
                .iter()
                .map(|v| if count > 1 { v / (count - 1) as f64 } else { 0.0 })
                .collect();
            var.iter_mut().for_each(|v| *v /= count as f64);
            let stats = BatchStats {
                mean: mean.clone(),
                unbiased_var: unbiased,
            };
            (mean, var, Some(stats))
        }
    };
    let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / libm::sqrt(v + p.eps)).collect();
    let mut normalized = x.clone();
    let mut y = x.clone();
    for b in 0..n {
        let xs = normalized.sample_mut(b);
        for ch in 0..c {
            xs[ch * plane..(ch + 1) * plane]
                .iter_mut()
                .for_each(|v| *v = (*v - mean[ch]) * inv_std[ch]);
        }
        let src = normalized.sample(b);
        let ys = y.sample_mut(b);
        for ch in 0..c {
            for k in ch * plane..(ch + 1) * plane {
                ys[k] = p.gamma[ch] * src[k] + p.beta[ch];
            }
        }
    }
    Ok((
        y,
        BatchNormCache {
            normalized,
            inv_std,
            stats,
        },
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchNormGrads {
    pub input: Tensor4,
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
}

pub fn batchnorm_backward(
    p: &BatchNormParams,
    cache: &BatchNormCache,
    grad_out: &Tensor4,
) -> BatchNormGrads {
    let [n, c, h, w] = grad_out.shape();
    let plane = h * w;
    let count = (n * plane) as f64;
    let mut d_gamma = vec![0.0; c];
    let mut d_beta = vec![0.0; c];
    for b in 0..n {
        let g = grad_out.sample(b);
        let xh = cache.normalized.sample(b);
        for ch in 0..c {
            for k in ch * plane..(ch + 1) * plane {
                d_beta[ch] += g[k];
                d_gamma[ch] += g[k] * xh[k];
            }
        }
    }
    let mut input = Tensor4::zeros(grad_out.shape());
    for b in 0..n {
        let g = grad_out.sample(b);
        let xh = cache.normalized.sample(b);
        let dx = input.sample_mut(b);
        for ch in 0..c {
            let scale = p.gamma[ch] * cache.inv_std[ch];
            for k in ch * plane..(ch + 1) * plane {
                dx[k] = if cache.stats.is_some() {
                    scale * (g[k] - d_beta[ch] / count - xh[k] * d_gamma[ch] / count)
                } else {
                    scale * g[k]
                };
            }
        }
    }
    BatchNormGrads {
        input,
        gamma: d_gamma,
        beta: d_beta,
    }
}

/// Mean over the spatial axes: `(n, c, h, w) -> (n, c, 1, 1)`.
pub fn global_avg_pool(x: &Tensor4) -> Tensor4 {
    let [n, c, h, w] = x.shape();
    let plane = h * w;
    Tensor4::from_fn([n, c, 1, 1], |[b, ch, _, _]| {
        x.sample(b)[ch * plane..(ch + 1) * plane].iter().sum::<f64>() / plane as f64
    })
}

pub fn global_avg_pool_backward(input_shape: [usize; 4], grad_out: &Tensor4) -> Tensor4 {
    let plane = (input_shape[2] * input_shape[3]) as f64;
    Tensor4::from_fn(input_shape, |[b, c, _, _]| grad_out.get([b, c, 0, 0]) / plane)
}
