//! Joint softmax over the emotion x view-group grid and its cross-entropy.

use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::gait::{EmotionClass, ViewGroup, N_EMOTIONS, N_VIEW_GROUPS};

pub const GRID_CELLS: usize = N_EMOTIONS * N_VIEW_GROUPS;

/// `probs[i][j]` is the probability of emotion `i` seen from view-group `j`.
/// All sixteen entries sum to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftmaxGrid {
    probs: [[f64; N_VIEW_GROUPS]; N_EMOTIONS],
}

impl SoftmaxGrid {
    /// Validates that entries are probabilities summing to one (1e-9).
    pub fn from_probs(probs: [[f64; N_VIEW_GROUPS]; N_EMOTIONS]) -> Result<Self> {
        let flat = probs.iter().flatten();
        if flat.clone().any(|p| !(0.0..=1.0).contains(p)) {
            bail!(InvalidInput, "grid entries must lie in [0, 1]");
        }
        let total: f64 = flat.sum();
        if (total - 1.0).abs() > 1e-9 {
            bail!(InvalidInput, "grid sums to {total}, not 1");
        }
        Ok(Self { probs })
    }

    pub fn uniform() -> Self {
        Self {
            probs: [[1.0 / GRID_CELLS as f64; N_VIEW_GROUPS]; N_EMOTIONS],
        }
    }

    pub fn one_hot(emotion: EmotionClass, view: ViewGroup) -> Self {
        let mut probs = [[0.0; N_VIEW_GROUPS]; N_EMOTIONS];
        probs[emotion.index()][view.index()] = 1.0;
        Self { probs }
    }

    pub fn get(&self, emotion: EmotionClass, view: ViewGroup) -> f64 {
        self.probs[emotion.index()][view.index()]
    }

    pub fn probs(&self) -> &[[f64; N_VIEW_GROUPS]; N_EMOTIONS] {
        &self.probs
    }

    /// Row-major `(emotion, view)` flattening.
    pub fn to_flat(&self) -> [f64; GRID_CELLS] {
        let mut out = [0.0; GRID_CELLS];
        for (i, row) in self.probs.iter().enumerate() {
            out[i * N_VIEW_GROUPS..(i + 1) * N_VIEW_GROUPS].copy_from_slice(row);
        }
        out
    }

    /// Largest probability of `emotion` over the view-groups.
    pub fn emotion_max(&self, emotion: EmotionClass) -> f64 {
        self.probs[emotion.index()].iter().copied().fold(0.0, f64::max)
    }

    /// Highest cell; ties go to the lowest `(emotion, view)` index.
    pub fn argmax(&self) -> (EmotionClass, ViewGroup) {
        let mut best = (0, 0);
        for i in 0..N_EMOTIONS {
            for j in 0..N_VIEW_GROUPS {
                if self.probs[i][j] > self.probs[best.0][best.1] {
                    best = (i, j);
                }
            }
        }
        (EmotionClass::ALL[best.0], ViewGroup::ALL[best.1])
    }

    pub fn max_prob(&self) -> f64 {
        let (e, v) = self.argmax();
        self.get(e, v)
    }
}

/// `E_ij = exp(e_ij) / sum_kl exp(e_kl)`, stabilised by subtracting the max.
pub fn softmax_grid(logits: &[f64; GRID_CELLS]) -> SoftmaxGrid {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut exps = [0.0; GRID_CELLS];
    for (e, &l) in exps.iter_mut().zip(logits.iter()) {
        *e = libm::exp(l - max);
    }
    let total: f64 = exps.iter().sum();
    let mut probs = [[0.0; N_VIEW_GROUPS]; N_EMOTIONS];
    for (k, e) in exps.iter().enumerate() {
        probs[k / N_VIEW_GROUPS][k % N_VIEW_GROUPS] = e / total;
    }
    SoftmaxGrid { probs }
}

/// One-hot `(emotion, view)` training target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Target {
    pub emotion: EmotionClass,
    pub view: ViewGroup,
}

impl Target {
    pub fn new(emotion: EmotionClass, view: ViewGroup) -> Self {
        Self { emotion, view }
    }

    pub fn cell(&self) -> usize {
        self.emotion.index() * N_VIEW_GROUPS + self.view.index()
    }

    /// Recover a target from a dense grid, rejecting anything not one-hot.
    pub fn from_dense(grid: &[[f64; N_VIEW_GROUPS]; N_EMOTIONS]) -> Result<Self> {
        let mut hot = None;
        for (i, row) in grid.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v == 1.0 && hot.is_none() {
                    hot = Some((i, j));
                } else if v != 0.0 {
                    bail!(InvalidInput, "target is not one-hot");
                }
            }
        }
        match hot {
            Some((i, j)) => Ok(Self::new(EmotionClass::ALL[i], ViewGroup::ALL[j])),
            None => bail!(InvalidInput, "target has no hot cell"),
        }
    }
}

/// Batch-averaged cross-entropy `(1/m) sum_m sum_ij -y log E`.
pub fn cross_entropy(preds: &[SoftmaxGrid], targets: &[Target]) -> Result<f64> {
    if preds.len() != targets.len() || preds.is_empty() {
        bail!(
            InvalidInput,
            "need equal, nonzero numbers of predictions and targets ({} vs {})",
            preds.len(),
            targets.len()
        );
    }
    let mut total = 0.0;
    for (p, t) in preds.iter().zip(targets) {
        let e = p.get(t.emotion, t.view);
        if !(e > 0.0) {
            bail!(InvalidInput, "predicted probability of the target is {e}");
        }
        total -= libm::log(e);
    }
    Ok(total / preds.len() as f64)
}

/// Per-sample cross-entropy computed from raw logits via log-sum-exp, so a
/// vanishing target probability gives a large finite loss instead of an error.
pub fn cross_entropy_from_logits(logits: &[f64; GRID_CELLS], target: Target) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + libm::log(logits.iter().map(|&l| libm::exp(l - max)).sum::<f64>());
    lse - logits[target.cell()]
}

/// Dense-target variant; rejects targets that are not one-hot.
pub fn cross_entropy_dense(
    preds: &[SoftmaxGrid],
    targets: &[[[f64; N_VIEW_GROUPS]; N_EMOTIONS]],
) -> Result<f64> {
    let t = targets.iter().map(Target::from_dense).collect::<Result<Vec<_>>>()?;
    cross_entropy(preds, &t)
}

/// Gradient of the batch-averaged loss with respect to each sample's logits.
pub fn cross_entropy_logit_grad(preds: &[SoftmaxGrid], targets: &[Target]) -> Vec<[f64; GRID_CELLS]> {
    let m = preds.len() as f64;
    preds
        .iter()
        .zip(targets)
        .map(|(p, t)| {
            let mut g = p.to_flat();
            g[t.cell()] -= 1.0;
            g.iter_mut().for_each(|v| *v /= m);
            g
        })
        .collect()
}
