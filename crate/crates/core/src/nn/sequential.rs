//! A linear stack of layers with recorded forward traces and reverse-mode
//! gradients.

use alloc::string::String;
use alloc::vec::Vec;

use super::conv::{group_conv2d, group_conv2d_backward, ConvParams};
use super::layers::{
    batchnorm, batchnorm_backward, global_avg_pool, global_avg_pool_backward, maxpool,
    maxpool_backward, relu, relu_backward, BatchNormCache, BatchNormParams, Mode,
};
use super::Tensor4;
use crate::error::{bail, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Conv { name: String, params: ConvParams },
    Relu,
    MaxPool { window: usize, stride: usize },
    BatchNorm { name: String, params: BatchNormParams },
    GlobalAvgPool,
}

/// Structural kind of a layer, used for architecture assertions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    Conv,
    GroupConv,
    Relu,
    MaxPool,
    BatchNorm,
    GlobalAvgPool,
}

impl Layer {
    pub fn kind(&self) -> LayerKind {
        match self {
            Layer::Conv { params, .. } if params.groups > 1 => LayerKind::GroupConv,
            Layer::Conv { .. } => LayerKind::Conv,
            Layer::Relu => LayerKind::Relu,
            Layer::MaxPool { .. } => LayerKind::MaxPool,
            Layer::BatchNorm { .. } => LayerKind::BatchNorm,
            Layer::GlobalAvgPool => LayerKind::GlobalAvgPool,
        }
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            Layer::Conv { name, .. } | Layer::BatchNorm { name, .. } => Some(name),
            _ => None,
        }
    }

    pub fn parameter_count(&self) -> usize {
        match self {
            Layer::Conv { params, .. } => params.parameter_count(),
            Layer::BatchNorm { params, .. } => 2 * params.channels(),
            _ => 0,
        }
    }

    /// Output shape for a given input shape, validating compatibility.
    pub fn output_shape(&self, [n, c, h, w]: [usize; 4]) -> Result<[usize; 4]> {
        match self {
            Layer::Conv { params, .. } => {
                if c != params.in_channels() {
                    bail!(Shape, "conv expects {} channels, got {c}", params.in_channels());
                }
                let (ho, wo) = params.output_size(h, w)?;
                Ok([n, params.out_channels(), ho, wo])
            }
            Layer::Relu => Ok([n, c, h, w]),
            Layer::MaxPool { window, stride } => {
                if *window > h || *window > w {
                    bail!(Shape, "pool window {window} larger than input {h}x{w}");
                }
                Ok([n, c, (h - window) / stride + 1, (w - window) / stride + 1])
            }
            Layer::BatchNorm { params, .. } => {
                if c != params.channels() {
                    bail!(Shape, "batch-norm expects {} channels, got {c}", params.channels());
                }
                Ok([n, c, h, w])
            }
            Layer::GlobalAvgPool => Ok([n, c, 1, 1]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Cache {
    Input(Tensor4),
    Pool { input_shape: [usize; 4], argmax: Vec<usize> },
    Norm(BatchNormCache),
    Shape([usize; 4]),
}

/// Recorded forward pass, valid until the network's parameters change.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    generation: u64,
    mode: Mode,
    caches: Vec<Cache>,
    output: Tensor4,
}

impl Trace {
    pub fn output(&self) -> &Tensor4 {
        &self.output
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }
}

/// Parameter gradients, one entry per parameter buffer in
/// [`Sequential::parameters`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub input: Tensor4,
    pub params: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sequential {
    layers: Vec<Layer>,
    generation: u64,
}

impl Sequential {
    pub fn new(layers: Vec<Layer>) -> Self {
        Self {
            layers,
            generation: 0,
        }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(Layer::parameter_count).sum()
    }

    pub fn output_shape(&self, input: [usize; 4]) -> Result<[usize; 4]> {
        self.layers.iter().try_fold(input, |s, l| l.output_shape(s))
    }

    pub fn forward(&self, x: &Tensor4, mode: Mode) -> Result<Trace> {
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut cur = x.clone();
        for layer in &self.layers {
            let (next, cache) = match layer {
                Layer::Conv { params, .. } => (group_conv2d(&cur, params)?, Cache::Input(cur)),
                Layer::Relu => (relu(&cur), Cache::Input(cur)),
                Layer::MaxPool { window, stride } => {
                    let out = maxpool(&cur, *window, *stride)?;
                    let cache = Cache::Pool {
                        input_shape: cur.shape(),
                        argmax: out.argmax,
                    };
                    (out.output, cache)
                }
                Layer::BatchNorm { params, .. } => {
                    let (y, cache) = batchnorm(&cur, params, mode)?;
                    (y, Cache::Norm(cache))
                }
                Layer::GlobalAvgPool => (global_avg_pool(&cur), Cache::Shape(cur.shape())),
            };
            caches.push(cache);
            cur = next;
        }
        Ok(Trace {
            generation: self.generation,
            mode,
            caches,
            output: cur,
        })
    }

    /// Output only, without keeping the caches alive longer than needed.
    pub fn infer(&self, x: &Tensor4) -> Result<Tensor4> {
        let mut cur = x.clone();
        for layer in &self.layers {
            cur = match layer {
                Layer::Conv { params, .. } => group_conv2d(&cur, params)?,
                Layer::Relu => relu(&cur),
                Layer::MaxPool { window, stride } => maxpool(&cur, *window, *stride)?.output,
                Layer::BatchNorm { params, .. } => batchnorm(&cur, params, Mode::Eval)?.0,
                Layer::GlobalAvgPool => global_avg_pool(&cur),
            };
        }
        Ok(cur)
    }

    /// Reverse pass from `grad_output`, the loss gradient at the trace output.
    pub fn backward(&self, trace: &Trace, grad_output: &Tensor4) -> Result<Gradients> {
        if trace.generation != self.generation || trace.caches.len() != self.layers.len() {
            return Err(Error::StaleTrace);
        }
        if grad_output.shape() != trace.output.shape() {
            bail!(Shape, "upstream gradient {:?} vs output {:?}", grad_output.shape(), trace.output.shape());
        }
        let mut grads: Vec<Vec<f64>> = Vec::new();
        let mut g = grad_output.clone();
        for (layer, cache) in self.layers.iter().zip(&trace.caches).rev() {
            g = match (layer, cache) {
                (Layer::Conv { params, .. }, Cache::Input(x)) => {
                    let cg = group_conv2d_backward(x, params, &g)?;
                    grads.push(cg.bias);
                    grads.push(cg.weight);
                    cg.input
                }
                (Layer::Relu, Cache::Input(x)) => relu_backward(x, &g),
                (Layer::MaxPool { .. }, Cache::Pool { input_shape, argmax }) => {
                    maxpool_backward(*input_shape, argmax, &g)
                }
                (Layer::BatchNorm { params, .. }, Cache::Norm(c)) => {
                    let bg = batchnorm_backward(params, c, &g);
                    grads.push(bg.beta);
                    grads.push(bg.gamma);
                    bg.input
                }
                (Layer::GlobalAvgPool, Cache::Shape(s)) => global_avg_pool_backward(*s, &g),
                _ => return Err(Error::StaleTrace),
            };
        }
        grads.reverse();
        Ok(Gradients { input: g, params: grads })
    }

    /// Parameter buffers in a fixed order: per layer, weight then bias
    /// (conv) or gamma then beta (batch-norm).
    pub fn parameters(&self) -> Vec<(String, &[f64])> {
        let mut out = Vec::new();
        for layer in &self.layers {
            match layer {
                Layer::Conv { name, params } => {
                    out.push((alloc::format!("{name}.weight"), params.weight.data()));
                    out.push((alloc::format!("{name}.bias"), &params.bias[..]));
                }
                Layer::BatchNorm { name, params } => {
                    out.push((alloc::format!("{name}.gamma"), &params.gamma[..]));
                    out.push((alloc::format!("{name}.beta"), &params.beta[..]));
                }
                _ => {}
            }
        }
        out
    }

    /// Mutable access to the trainable buffers; invalidates outstanding traces.
    pub fn parameters_mut(&mut self) -> Vec<&mut [f64]> {
        self.generation += 1;
        let mut out: Vec<&mut [f64]> = Vec::new();
        for layer in &mut self.layers {
            match layer {
                Layer::Conv { params, .. } => {
                    out.push(params.weight.data_mut());
                    out.push(&mut params.bias[..]);
                }
                Layer::BatchNorm { params, .. } => {
                    out.push(&mut params.gamma[..]);
                    out.push(&mut params.beta[..]);
                }
                _ => {}
            }
        }
        out
    }

    /// Batch-norm running statistics as `(name, mean, var)`.
    pub fn running_stats(&self) -> Vec<(&str, &[f64], &[f64])> {
        self.layers
            .iter()
            .filter_map(|l| match l {
                Layer::BatchNorm { name, params } => {
                    Some((name.as_str(), &params.running_mean[..], &params.running_var[..]))
                }
                _ => None,
            })
            .collect()
    }

    pub fn running_stats_mut(&mut self) -> Vec<(&str, &mut Vec<f64>, &mut Vec<f64>)> {
        self.generation += 1;
        self.layers
            .iter_mut()
            .filter_map(|l| match l {
                Layer::BatchNorm { name, params } => Some((
                    name.as_str(),
                    &mut params.running_mean,
                    &mut params.running_var,
                )),
                _ => None,
            })
            .collect()
    }

    /// Fold the batch statistics of a training trace into the running averages.
    pub fn commit_batch_stats(&mut self, trace: &Trace) -> Result<()> {
        if trace.generation != self.generation {
            return Err(Error::StaleTrace);
        }
        for (layer, cache) in self.layers.iter_mut().zip(&trace.caches) {
            if let (Layer::BatchNorm { params, .. }, Cache::Norm(c)) = (layer, cache) {
                if let Some(stats) = &c.stats {
                    params.update_running(stats);
                }
            }
        }
        self.generation += 1;
        Ok(())
    }
}

impl Sequential {
    /// Replace every running mean/variance with the plain average of the
    /// train-mode batch statistics over `batches`. Returns the batch count.
    pub fn recalibrate_batch_stats(
        &mut self,
        batches: impl IntoIterator<Item = Result<Tensor4>>,
    ) -> Result<usize> {
        let mut seen = 0usize;
        for batch in batches {
            let trace = self.forward(&batch?, Mode::Train)?;
            let w = 1.0 / (seen + 1) as f64;
            for (layer, cache) in self.layers.iter_mut().zip(&trace.caches) {
                if let (Layer::BatchNorm { params, .. }, Cache::Norm(c)) = (layer, cache) {
                    if let Some(stats) = &c.stats {
                        params.blend_running(stats, w);
                    }
                }
            }
            seen += 1;
        }
        self.generation += 1;
        Ok(seen)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::gradcheck::{central_difference, max_relative_error};
    use alloc::string::ToString;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tiny(rng: &mut ChaCha8Rng) -> Sequential {
        Sequential::new(vec![
            Layer::Conv {
                name: "a".to_string(),
                params: ConvParams::kaiming(2, 4, 3, 1, 1, 2, rng).unwrap(),
            },
            Layer::Relu,
            Layer::MaxPool { window: 2, stride: 2 },
            Layer::BatchNorm {
                name: "bn".to_string(),
                params: BatchNormParams::new(4),
            },
            Layer::Conv {
                name: "b".to_string(),
                params: ConvParams::kaiming(4, 3, 1, 1, 0, 1, rng).unwrap(),
            },
            Layer::GlobalAvgPool,
        ])
    }

    fn weighted_sum(out: &Tensor4, w: &[f64]) -> f64 {
        out.data().iter().zip(w).map(|(a, b)| a * b).sum()
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let net = tiny(&mut rng);
        let x = Tensor4::from_fn([3, 2, 6, 6], |_| rng.gen_range(-1.0..1.0));
        let trace = net.forward(&x, Mode::Train).unwrap();
        let w: Vec<f64> = (0..trace.output().len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let up = Tensor4::new(trace.output().shape(), w.clone()).unwrap();
        let grads = net.backward(&trace, &up).unwrap();

        let names: Vec<String> = net.parameters().into_iter().map(|(n, _)| n).collect();
        for (idx, name) in names.iter().enumerate() {
            let base = net.parameters()[idx].1.to_vec();
            let numeric = central_difference(
                |probe| {
                    let mut n2 = net.clone();
                    n2.parameters_mut()[idx].copy_from_slice(probe);
                    weighted_sum(n2.forward(&x, Mode::Train).unwrap().output(), &w)
                },
                &base,
                1e-5,
            );
            let err = max_relative_error(&grads.params[idx], &numeric, 1e-7);
            assert!(err < 1e-4, "{name}: relative error {err}");
        }
        let numeric = central_difference(
            |probe| {
                let xi = Tensor4::new(x.shape(), probe.to_vec()).unwrap();
                weighted_sum(net.forward(&xi, Mode::Train).unwrap().output(), &w)
            },
            x.data(),
            1e-5,
        );
        assert!(max_relative_error(grads.input.data(), &numeric, 1e-7) < 1e-4);
    }

    #[test]
    fn stale_trace_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut net = tiny(&mut rng);
        let x = Tensor4::from_fn([2, 2, 4, 4], |_| rng.gen_range(-1.0..1.0));
        let trace = net.forward(&x, Mode::Train).unwrap();
        net.parameters_mut()[0][0] += 0.1;
        let up = Tensor4::zeros(trace.output().shape());
        assert_eq!(net.backward(&trace, &up), Err(Error::StaleTrace));
    }

    #[test]
    fn zero_and_scaled_upstream() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let net = tiny(&mut rng);
        let x = Tensor4::from_fn([2, 2, 4, 4], |_| rng.gen_range(-1.0..1.0));
        let trace = net.forward(&x, Mode::Train).unwrap();
        let zero = net.backward(&trace, &Tensor4::zeros(trace.output().shape())).unwrap();
        assert!(zero.params.iter().flatten().all(|&g| g == 0.0));

        let up = Tensor4::from_fn(trace.output().shape(), |_| rng.gen_range(-1.0..1.0));
        let mut up2 = up.clone();
        up2.data_mut().iter_mut().for_each(|v| *v *= 2.0);
        let g1 = net.backward(&trace, &up).unwrap();
        let g2 = net.backward(&trace, &up2).unwrap();
        for (a, b) in g1.params.iter().flatten().zip(g2.params.iter().flatten()) {
            assert!((2.0 * a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn recalibration_averages_batch_statistics() {
        let mut net = Sequential::new(vec![Layer::BatchNorm {
            name: "bn".to_string(),
            params: BatchNormParams::new(1),
        }]);
        let a = Tensor4::new([2, 1, 1, 1], vec![0.0, 2.0]).unwrap();
        let b = Tensor4::new([2, 1, 1, 1], vec![4.0, 10.0]).unwrap();
        assert_eq!(net.recalibrate_batch_stats([Ok(a), Ok(b)]).unwrap(), 2);
        let (_, mean, var) = net.running_stats()[0];
        assert!((mean[0] - 4.0).abs() < 1e-12);
        // Unbiased variances 2 and 18.
        assert!((var[0] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn output_shape_matches_forward() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let net = tiny(&mut rng);
        let x = Tensor4::zeros([2, 2, 8, 6]);
        let out = net.forward(&x, Mode::Eval).unwrap();
        assert_eq!(net.output_shape(x.shape()).unwrap(), out.output().shape());
        assert_eq!(net.infer(&x).unwrap(), *out.output());
    }
}
