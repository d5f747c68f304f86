//! Confusion matrix and the mean accuracy / mean F1 metrics.

use alloc::vec::Vec;

use super::{images_to_tensor, ProxEmoNet, Sample};
use crate::error::{bail, Result};
use crate::gait::{EmotionClass, ViewGroup, N_EMOTIONS, N_VIEW_GROUPS};
use crate::nn::{softmax_grid, Target, GRID_CELLS};

const EVAL_BATCH: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMetrics {
    pub emotion: EmotionClass,
    pub view: ViewGroup,
    /// Samples whose true label is this cell.
    pub support: usize,
    pub true_positives: usize,
    pub predicted: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// `confusion[true_cell][predicted_cell]` over the 16 joint classes.
    pub confusion: [[usize; GRID_CELLS]; GRID_CELLS],
    pub cells: Vec<CellMetrics>,
    /// Mean of `TP / N` over cells with `N > 0`, in percent.
    pub mean_accuracy: f64,
    /// Mean of `2 Pr Rc / (Pr + Rc)` over cells with `N > 0`.
    pub mean_f1: f64,
    /// Cells left out of the means because they had no samples.
    pub excluded: Vec<(EmotionClass, ViewGroup)>,
    pub samples: usize,
}

impl EvalReport {
    /// Build a report from `(truth, prediction)` pairs.
    pub fn from_pairs(pairs: &[(Target, Target)]) -> Result<Self> {
        if pairs.is_empty() {
            bail!(InvalidInput, "cannot evaluate an empty dataset");
        }
        let mut confusion = [[0usize; GRID_CELLS]; GRID_CELLS];
        for (t, p) in pairs {
            confusion[t.cell()][p.cell()] += 1;
        }
        let mut cells = Vec::with_capacity(GRID_CELLS);
        let mut excluded = Vec::new();
        let (mut acc_sum, mut f1_sum, mut present) = (0.0, 0.0, 0usize);
        for k in 0..GRID_CELLS {
            let support: usize = confusion[k].iter().sum();
            let predicted: usize = confusion.iter().map(|row| row[k]).sum();
            let tp = confusion[k][k];
            let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
            let (precision, recall) = (ratio(tp, predicted), ratio(tp, support));
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            let emotion = EmotionClass::ALL[k / N_VIEW_GROUPS];
            let view = ViewGroup::ALL[k % N_VIEW_GROUPS];
            if support == 0 {
                excluded.push((emotion, view));
            } else {
                acc_sum += recall;
                f1_sum += f1;
                present += 1;
            }
            cells.push(CellMetrics {
                emotion,
                view,
                support,
                true_positives: tp,
                predicted,
                precision,
                recall,
                f1,
            });
        }
        Ok(Self {
            confusion,
            cells,
            mean_accuracy: 100.0 * acc_sum / present as f64,
            mean_f1: f1_sum / present as f64,
            excluded,
            samples: pairs.len(),
        })
    }

    /// Collapse the joint confusion matrix onto the emotion axis.
    pub fn emotion_confusion(&self) -> [[usize; N_EMOTIONS]; N_EMOTIONS] {
        let mut out = [[0; N_EMOTIONS]; N_EMOTIONS];
        for (t, row) in self.confusion.iter().enumerate() {
            for (p, &n) in row.iter().enumerate() {
                out[t / N_VIEW_GROUPS][p / N_VIEW_GROUPS] += n;
            }
        }
        out
    }

    /// Fraction of samples whose emotion (ignoring view group) is right.
    pub fn emotion_accuracy(&self) -> f64 {
        let c = self.emotion_confusion();
        (0..N_EMOTIONS).map(|i| c[i][i]).sum::<usize>() as f64 / self.samples as f64
    }
}

/// Eval-mode predictions over `dataset`, scored against its labels.
pub fn evaluate(net: &ProxEmoNet, dataset: &[Sample]) -> Result<EvalReport> {
    if dataset.is_empty() {
        bail!(InvalidInput, "cannot evaluate an empty dataset");
    }
    let mut pairs = Vec::with_capacity(dataset.len());
    for chunk in dataset.chunks(EVAL_BATCH) {
        let x = images_to_tensor(chunk.iter().map(|s| &s.image))?;
        for (s, logits) in chunk.iter().zip(net.logits(&x)?) {
            let (e, v) = softmax_grid(&logits).argmax();
            pairs.push((s.target, Target::new(e, v)));
        }
    }
    EvalReport::from_pairs(&pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use EmotionClass::*;
    use ViewGroup::*;

    fn t(e: EmotionClass, v: ViewGroup) -> Target {
        Target::new(e, v)
    }

    #[test]
    fn perfect_predictor() {
        let pairs: Vec<_> = EmotionClass::ALL
            .iter()
            .flat_map(|&e| ViewGroup::ALL.iter().map(move |&v| (t(e, v), t(e, v))))
            .collect();
        let r = EvalReport::from_pairs(&pairs).unwrap();
        assert_eq!(r.mean_accuracy, 100.0);
        assert_eq!(r.mean_f1, 1.0);
        assert!(r.excluded.is_empty());
    }

    #[test]
    fn constant_predictor_on_balanced_data() {
        let pairs: Vec<_> = EmotionClass::ALL
            .iter()
            .flat_map(|&e| ViewGroup::ALL.iter().map(move |&v| (t(e, v), t(Angry, Front))))
            .collect();
        let r = EvalReport::from_pairs(&pairs).unwrap();
        assert!((r.mean_accuracy - 6.25).abs() < 1e-12);
        // Only angry/front scores: Pr = 1/16, Rc = 1.
        let f1 = 2.0 * (1.0 / 16.0) / (1.0 / 16.0 + 1.0);
        assert!((r.mean_f1 - f1 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn three_sample_hand_case() {
        let pairs = [
            (t(Angry, Front), t(Angry, Front)),
            (t(Angry, Front), t(Sad, Back)),
            (t(Sad, Back), t(Sad, Back)),
        ];
        let r = EvalReport::from_pairs(&pairs).unwrap();
        let af = r.cells[t(Angry, Front).cell()];
        assert_eq!((af.precision, af.recall), (1.0, 0.5));
        let sb = r.cells[t(Sad, Back).cell()];
        assert_eq!((sb.precision, sb.recall), (0.5, 1.0));
        assert!((r.mean_accuracy - 75.0).abs() < 1e-12);
        assert!((r.mean_f1 - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.excluded.len(), 14);
        let rows: Vec<usize> = r.confusion.iter().map(|row| row.iter().sum()).collect();
        assert_eq!(rows[t(Angry, Front).cell()], 2);
        assert_eq!(r.emotion_confusion()[0], [1, 1, 0, 0]);
    }

    #[test]
    fn order_does_not_matter() {
        let mut pairs = alloc::vec![
            (t(Happy, Left), t(Happy, Left)),
            (t(Neutral, Right), t(Happy, Left)),
            (t(Sad, Front), t(Sad, Front)),
            (t(Sad, Front), t(Angry, Back)),
        ];
        let a = EvalReport::from_pairs(&pairs).unwrap();
        pairs.reverse();
        assert_eq!(a, EvalReport::from_pairs(&pairs).unwrap());
        assert!(EvalReport::from_pairs(&[]).is_err());
    }
}
