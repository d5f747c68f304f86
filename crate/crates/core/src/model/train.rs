//! Mini-batch training with Adam on the joint 16-way cross-entropy.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{build_model, evaluate, images_to_tensor, logit_rows, ModelConfig, ProxEmoNet, Sample};
use crate::error::{bail, Result};
use crate::nn::{
    cross_entropy_from_logits, softmax_grid, Adam, AdamConfig, Mode, Tensor4, GRID_CELLS,
};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub model: ModelConfig,
    pub optimizer: AdamConfig,
    pub epochs: usize,
    pub batch_size: usize,
    /// Seed for shuffling; model initialisation uses `model.seed`.
    pub seed: u64,
    /// Fraction of each cell used for training when a split is requested.
    pub train_fraction: f64,
    /// Stop once an epoch's running training accuracy reaches this fraction.
    pub stop_at_train_accuracy: Option<f64>,
    /// After the last epoch, reset batch-norm running statistics to the
    /// average batch statistics over the whole training set.
    pub recalibrate_batch_norm: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            model: ModelConfig::default(),
            optimizer: AdamConfig::default(),
            epochs: 500,
            batch_size: 32,
            seed: 0,
            train_fraction: 0.9,
            stop_at_train_accuracy: None,
            recalibrate_batch_norm: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.batch_size == 0 {
            bail!(Config, "batch size must be positive");
        }
        if !(self.train_fraction > 0.0 && self.train_fraction <= 1.0) {
            bail!(Config, "train fraction must lie in (0, 1]");
        }
        let o = &self.optimizer;
        if !(o.learning_rate > 0.0 && o.epsilon > 0.0)
            || !(0.0..1.0).contains(&o.beta1)
            || !(0.0..1.0).contains(&o.beta2)
        {
            bail!(Config, "invalid optimizer settings {o:?}");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub learning_rate: f64,
    /// Mean batch loss over the epoch (train-mode forward passes).
    pub loss: f64,
    /// Fraction of training samples whose train-mode argmax was right.
    pub train_accuracy: f64,
    /// Eval-mode mean accuracy (percent) on the validation set, if given,
    /// measured with the running statistics as they stand after the epoch.
    pub val_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainHistory {
    /// Eval-mode loss of the untrained model on the training set.
    pub initial_loss: f64,
    pub epochs: Vec<EpochStats>,
}

fn mean_eval_loss(net: &ProxEmoNet, data: &[Sample]) -> Result<f64> {
    let mut total = 0.0;
    for chunk in data.chunks(64) {
        let x = images_to_tensor(chunk.iter().map(|s| &s.image))?;
        for (s, l) in chunk.iter().zip(net.logits(&x)?) {
            total += cross_entropy_from_logits(&l, s.target);
        }
    }
    Ok(total / data.len() as f64)
}

/// Train a freshly built model on `data`, optionally tracking a validation set.
pub fn train(
    data: &[Sample],
    validation: Option<&[Sample]>,
    config: &TrainConfig,
) -> Result<(ProxEmoNet, TrainHistory)> {
    config.validate()?;
    if data.is_empty() {
        bail!(Config, "training set is empty");
    }
    let first = data[0].target;
    if data.iter().all(|s| s.target == first) {
        bail!(Config, "training set holds a single class");
    }
    let size = config.model.input_size;
    if let Some(bad) = data.iter().find(|s| s.image.height() != size || s.image.width() != size) {
        bail!(
            Config,
            "sample of size {}x{} does not match input size {size}",
            bad.image.height(),
            bad.image.width()
        );
    }

    let mut net = build_model(&config.model)?;
    let sizes: Vec<usize> = net.network().parameters().iter().map(|(_, p)| p.len()).collect();
    let mut adam = Adam::new(config.optimizer, &sizes);
    let mut history = TrainHistory {
        initial_loss: mean_eval_loss(&net, data)?,
        epochs: Vec::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let (mut loss_sum, mut correct, mut batches) = (0.0, 0usize, 0usize);
        for batch in batches_of(&order, config.batch_size) {
            let x = images_to_tensor(batch.iter().map(|&i| &data[i].image))?;
            let trace = net.network().forward(&x, Mode::Train)?;
            let logits = logit_rows(trace.output());
            let m = batch.len() as f64;
            let mut grad = Tensor4::zeros(trace.output().shape());
            for (n, (&i, l)) in batch.iter().zip(&logits).enumerate() {
                let target = data[i].target;
                loss_sum += cross_entropy_from_logits(l, target) / m;
                let grid = softmax_grid(l);
                let (e, v) = grid.argmax();
                correct += usize::from(e == target.emotion && v == target.view);
                let g = grad.sample_mut(n);
                g.copy_from_slice(&grid.to_flat());
                g[target.cell()] -= 1.0;
                g.iter_mut().for_each(|v| *v /= m);
            }
            batches += 1;
            let grads = net.network().backward(&trace, &grad)?;
            net.network_mut().commit_batch_stats(&trace)?;
            let grad_refs: Vec<&[f64]> = grads.params.iter().map(Vec::as_slice).collect();
            adam.step(&mut net.network_mut().parameters_mut(), &grad_refs, epoch)?;
        }
        let train_accuracy = correct as f64 / data.len() as f64;
        let val_accuracy = match validation {
            Some(v) if !v.is_empty() => Some(evaluate(&net, v)?.mean_accuracy),
            _ => None,
        };
        history.epochs.push(EpochStats {
            epoch,
            learning_rate: config.optimizer.learning_rate_at(epoch),
            loss: loss_sum / batches as f64,
            train_accuracy,
            val_accuracy,
        });
        if config.stop_at_train_accuracy.is_some_and(|t| train_accuracy >= t) {
            break;
        }
    }
    if config.recalibrate_batch_norm {
        let batches = batches_of(&order, config.batch_size)
            .into_iter()
            .map(|b| images_to_tensor(b.iter().map(|&i| &data[i].image)));
        net.network_mut().recalibrate_batch_stats(batches)?;
    }
    Ok((net, history))
}

/// Consecutive batches of `order`; a trailing singleton joins the previous
/// batch so batch statistics always see at least two samples.
fn batches_of(order: &[usize], size: usize) -> Vec<&[usize]> {
    let mut out: Vec<&[usize]> = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = (start + size).min(order.len());
        if order.len() - end == 1 {
            end = order.len();
        }
        out.push(&order[start..end]);
        start = end;
    }
    out
}

const _: () = assert!(GRID_CELLS == 16);
