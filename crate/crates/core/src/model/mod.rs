//! The emotion and view-group classifier: architecture, training and metrics.

mod dataset;
mod eval;
mod train;

pub use dataset::{
    images_to_tensor, samples_from_gaits, split_stratified, synthetic_dataset, synthetic_gaits,
    DatasetConfig, Sample,
};
pub use eval::{evaluate, CellMetrics, EvalReport};
pub use train::{train, EpochStats, TrainConfig, TrainHistory};

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::embedding::{GaitImage, CHANNELS, DEFAULT_INPUT_SIZE};
use crate::error::{bail, Result};
use crate::gait::{EmotionClass, ViewGroup, N_EMOTIONS, N_VIEW_GROUPS};
use crate::nn::{
    softmax_grid, BatchNormParams, ConvParams, Layer, LayerKind, Sequential, SoftmaxGrid,
    Tensor4, GRID_CELLS,
};

/// Layer widths and input size. Kernel sizes are fixed: 7x7 stride-2 stem,
/// 3x3 group convolutions, 2x2 pooling, then 3x3 and 1x1 head convolutions.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub input_size: usize,
    pub groups: usize,
    pub stem_channels: usize,
    pub stage1_channels: usize,
    pub stage2_channels: usize,
    pub head_channels: usize,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            input_size: DEFAULT_INPUT_SIZE,
            groups: N_VIEW_GROUPS,
            stem_channels: 32,
            stage1_channels: 128,
            stage2_channels: 256,
            head_channels: 24,
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn with_input_size(mut self, size: usize) -> Self {
        self.input_size = size;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.groups;
        if g == 0 {
            bail!(Config, "group count must be positive");
        }
        for (name, c) in [
            ("stem", self.stem_channels),
            ("stage 1", self.stage1_channels),
            ("stage 2", self.stage2_channels),
        ] {
            if c == 0 || c % g != 0 {
                bail!(Config, "{name} channels ({c}) must be a positive multiple of {g} groups");
            }
        }
        if self.head_channels == 0 {
            bail!(Config, "head channels must be positive");
        }
        Ok(())
    }
}

/// Smallest input side the fixed kernel/pool plan accepts.
pub const MIN_INPUT_SIZE: usize = 63;

#[derive(Debug, Clone, PartialEq)]
pub struct ProxEmoNet {
    config: ModelConfig,
    net: Sequential,
}

/// Construct a freshly initialised network.
pub fn build_model(config: &ModelConfig) -> Result<ProxEmoNet> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let g = config.groups;
    let conv = |name: &str, params: ConvParams| Layer::Conv {
        name: name.to_string(),
        params,
    };
    let norm = |name: &str, c: usize| Layer::BatchNorm {
        name: name.to_string(),
        params: BatchNormParams::new(c),
    };
    let pool = || Layer::MaxPool { window: 2, stride: 2 };
    let (s, c1, c2, h) = (
        config.stem_channels,
        config.stage1_channels,
        config.stage2_channels,
        config.head_channels,
    );
    let layers = vec![
        conv("stem", ConvParams::kaiming(CHANNELS, s, 7, 2, 3, 1, &mut rng)?),
        Layer::Relu,
        pool(),
        conv("stage1.gc1", ConvParams::kaiming(s, c1, 3, 1, 1, g, &mut rng)?),
        Layer::Relu,
        pool(),
        conv("stage1.gc2", ConvParams::kaiming(c1, c1, 3, 1, 1, g, &mut rng)?),
        Layer::Relu,
        pool(),
        norm("stage1.bn", c1),
        conv("stage2.gc1", ConvParams::kaiming(c1, c2, 3, 1, 1, g, &mut rng)?),
        Layer::Relu,
        pool(),
        conv("stage2.gc2", ConvParams::kaiming(c2, c2, 3, 1, 1, g, &mut rng)?),
        Layer::Relu,
        pool(),
        norm("stage2.bn", c2),
        conv("head1", ConvParams::kaiming(c2, h, 3, 1, 1, 1, &mut rng)?),
        Layer::Relu,
        conv("head2", ConvParams::kaiming(h, GRID_CELLS, 1, 1, 0, 1, &mut rng)?),
        Layer::GlobalAvgPool,
    ];
    ProxEmoNet::from_parts(config.clone(), Sequential::new(layers))
}

impl ProxEmoNet {
    /// Wrap an existing layer stack, checking it maps the configured input to
    /// 16 logits.
    pub fn from_parts(config: ModelConfig, net: Sequential) -> Result<Self> {
        config.validate()?;
        let size = config.input_size;
        match net.output_shape([1, CHANNELS, size, size]) {
            Ok([1, GRID_CELLS, 1, 1]) => Ok(Self { config, net }),
            Ok(shape) => bail!(Config, "network output {shape:?} is not 16 logits"),
            Err(e) => bail!(Config, "input size {size} incompatible with the layer plan: {e}"),
        }
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn network(&self) -> &Sequential {
        &self.net
    }

    pub fn network_mut(&mut self) -> &mut Sequential {
        &mut self.net
    }

    pub fn parameter_count(&self) -> usize {
        self.net.parameter_count()
    }

    /// `(layer name, trainable parameters)` for every parameterised layer.
    pub fn parameter_table(&self) -> Vec<(String, usize)> {
        self.net
            .layers()
            .iter()
            .filter_map(|l| l.name().map(|n| (n.to_string(), l.parameter_count())))
            .collect()
    }

    /// True when every layer is convolutional, pooling, normalisation or an
    /// activation, i.e. there is no dense layer anywhere in the graph.
    pub fn is_fully_convolutional(&self) -> bool {
        self.net.layers().iter().all(|l| {
            matches!(
                l.kind(),
                LayerKind::Conv
                    | LayerKind::GroupConv
                    | LayerKind::Relu
                    | LayerKind::MaxPool
                    | LayerKind::BatchNorm
                    | LayerKind::GlobalAvgPool
            )
        })
    }

    fn check_image(&self, image: &GaitImage) -> Result<()> {
        let s = self.config.input_size;
        if image.height() != s || image.width() != s {
            bail!(
                Shape,
                "model expects {s}x{s} input, got {}x{}",
                image.height(),
                image.width()
            );
        }
        Ok(())
    }

    /// Eval-mode logits for a batch tensor, one 16-vector per sample.
    pub fn logits(&self, batch: &Tensor4) -> Result<Vec<[f64; GRID_CELLS]>> {
        let s = self.config.input_size;
        if batch.shape()[1..] != [CHANNELS, s, s] {
            bail!(Shape, "model expects [n, 3, {s}, {s}], got {:?}", batch.shape());
        }
        let out = self.net.infer(batch)?;
        Ok(logit_rows(&out))
    }

    pub fn forward_batch(&self, images: &[GaitImage]) -> Result<Vec<SoftmaxGrid>> {
        for im in images {
            self.check_image(im)?;
        }
        if images.is_empty() {
            return Ok(Vec::new());
        }
        let x = images_to_tensor(images.iter())?;
        Ok(self.logits(&x)?.iter().map(softmax_grid).collect())
    }

    pub fn forward(&self, image: &GaitImage) -> Result<SoftmaxGrid> {
        self.check_image(image)?;
        let x = images_to_tensor(core::iter::once(image))?;
        Ok(softmax_grid(&self.logits(&x)?[0]))
    }

    /// Argmax cell of the eval-mode grid.
    pub fn predict(&self, image: &GaitImage) -> Result<(EmotionClass, ViewGroup)> {
        Ok(self.forward(image)?.argmax())
    }
}

pub(crate) fn logit_rows(out: &Tensor4) -> Vec<[f64; GRID_CELLS]> {
    (0..out.batch())
        .map(|n| {
            let mut row = [0.0; GRID_CELLS];
            row.copy_from_slice(out.sample(n));
            row
        })
        .collect()
}

const _: () = assert!(N_EMOTIONS * N_VIEW_GROUPS == GRID_CELLS);
