//! Labelled image samples and the synthetic training corpus.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::embedding::{gait_to_image, GaitImage, CHANNELS};
use crate::error::{bail, Result};
use crate::gait::{
    augment_gait, AugmentationParams, EmotionClass, GaitGenerator, GaitSource, LabeledGait, ViewGroup,
    AUGMENTATION_ANGLE_STEP_DEG, AUGMENTATION_DEPTHS_M, DEFAULT_FRAME_RATE,
};
use crate::nn::{Target, Tensor4, GRID_CELLS};

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub image: GaitImage,
    pub target: Target,
}

/// Stack same-sized images into an `[n, 3, h, w]` tensor.
pub fn images_to_tensor<'a>(images: impl Iterator<Item = &'a GaitImage>) -> Result<Tensor4> {
    let mut data = Vec::new();
    let mut dims: Option<(usize, usize)> = None;
    let mut n = 0;
    for im in images {
        let d = (im.height(), im.width());
        match dims {
            None => dims = Some(d),
            Some(prev) if prev != d => bail!(Shape, "mixed image sizes {prev:?} and {d:?}"),
            _ => {}
        }
        data.extend_from_slice(im.data());
        n += 1;
    }
    let Some((h, w)) = dims else {
        bail!(InvalidInput, "no images to stack");
    };
    Tensor4::new([n, CHANNELS, h, w], data)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetConfig {
    /// Samples generated for each of the 16 (emotion, view-group) cells.
    pub per_cell: usize,
    pub input_size: usize,
    /// Joint noise standard deviation in metres.
    pub noise: f64,
    pub seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            per_cell: 100,
            input_size: 64,
            noise: 0.01,
            seed: 0,
        }
    }
}

/// Augmentation angles (degrees, in `[0, 360)`) whose view group is `view`.
fn sector_angles(view: ViewGroup) -> Vec<f64> {
    let steps = (360.0 / AUGMENTATION_ANGLE_STEP_DEG) as usize;
    (0..steps)
        .map(|k| k as f64 * AUGMENTATION_ANGLE_STEP_DEG)
        .filter(|&a| crate::gait::view_group_of(a) == view)
        .collect()
}

/// Balanced synthetic walks: every cell gets `per_cell` distinct walkers,
/// each rotated to a random grid angle inside the cell's sector and placed
/// at a random augmentation depth.
pub fn synthetic_gaits(config: &DatasetConfig) -> Result<Vec<LabeledGait>> {
    if config.per_cell == 0 {
        bail!(Config, "per_cell must be positive");
    }
    let mut out = Vec::with_capacity(config.per_cell * GRID_CELLS);
    for emotion in EmotionClass::ALL {
        for view in ViewGroup::ALL {
            let angles = sector_angles(view);
            for k in 0..config.per_cell {
                let cell_seed = config
                    .seed
                    .wrapping_mul(0x5851_f42d_4c95_7f2d)
                    .wrapping_add(((emotion.index() * 4 + view.index()) as u64) << 32 | k as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(cell_seed);
                let walker = GaitGenerator::from_seed(emotion, rng.gen());
                let gait = walker.sample(DEFAULT_FRAME_RATE, config.noise, &mut rng);
                let theta = angles[rng.gen_range(0..angles.len())];
                let depth = AUGMENTATION_DEPTHS_M[rng.gen_range(0..AUGMENTATION_DEPTHS_M.len())];
                let params = AugmentationParams::new(theta, [0.0, 0.0, depth]);
                out.push(LabeledGait {
                    gait: augment_gait(&gait, &params)?,
                    emotion,
                    view_group: view,
                    source: GaitSource::Synthetic,
                });
            }
        }
    }
    Ok(out)
}

/// Embed labelled gaits as `size x size` training samples.
pub fn samples_from_gaits<'a>(
    gaits: impl IntoIterator<Item = &'a LabeledGait>,
    size: usize,
) -> Result<Vec<Sample>> {
    gaits
        .into_iter()
        .map(|g| {
            Ok(Sample {
                image: gait_to_image(&g.gait, size)?,
                target: Target::new(g.emotion, g.view_group),
            })
        })
        .collect()
}

/// [`synthetic_gaits`] embedded at `config.input_size`.
pub fn synthetic_dataset(config: &DatasetConfig) -> Result<Vec<Sample>> {
    samples_from_gaits(&synthetic_gaits(config)?, config.input_size)
}

/// Split each cell independently so both parts stay balanced. Returns
/// `(train, held_out)`; every non-empty cell keeps at least one training
/// sample.
pub fn split_stratified(
    samples: Vec<Sample>,
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<Sample>, Vec<Sample>)> {
    if !(train_fraction > 0.0 && train_fraction <= 1.0) {
        bail!(Config, "train fraction must lie in (0, 1], got {train_fraction}");
    }
    let mut cells: Vec<Vec<Sample>> = (0..GRID_CELLS).map(|_| Vec::new()).collect();
    for s in samples {
        cells[s.target.cell()].push(s);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut held) = (Vec::new(), Vec::new());
    for mut cell in cells {
        cell.shuffle(&mut rng);
        let keep = (libm::round(cell.len() as f64 * train_fraction) as usize)
            .clamp(cell.len().min(1), cell.len());
        let rest = cell.split_off(keep);
        train.extend(cell);
        held.extend(rest);
    }
    Ok((train, held))
}
