//! Per-subcommand settings shared by command-line flags and the TOML config
//! file.
//!
//! Every setting is optional in both places. The effective value is the
//! flag if given, else the config file entry, else the built-in default:
//! `flag > config > default`. A config file has one table per subcommand,
//! keyed like the flags with `_` in place of `-`:
//!
//! ```toml
//! [train]
//! data = "corpus"
//! epochs = 12
//! learning_rate = 0.009
//!
//! [simulate]
//! builtin = "front-approach"
//! emotion = "sad"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{read_text, write_bytes, CliError, Result};

macro_rules! settings {
    (
        $(#[$m:meta])*
        $name:ident {
            $( $(#[$fm:meta])* $field:ident : $ty:ty, )*
        }
    ) => {
        $(#[$m])*
        #[derive(Debug, Clone, Default, PartialEq, clap::Args, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            $(
                $(#[$fm])*
                #[arg(long)]
                #[serde(default, skip_serializing_if = "Option::is_none")]
                pub $field: Option<$ty>,
            )*
        }

        impl $name {
            /// Field-wise: values set in `self` win over `base`.
            pub fn over(self, base: Self) -> Self {
                Self { $( $field: self.$field.or(base.$field), )* }
            }
        }
    };
}

settings! {
    SynthSettings {
        /// Emotion to synthesise: angry, sad, happy, neutral or all.
        emotion: String,
        /// Seed of the first walker; later walkers use seed+1, seed+2, ...
        seed: u64,
        /// Walkers per emotion.
        count: usize,
        /// Joint noise standard deviation in metres.
        noise: f64,
        /// Write a balanced corpus with this many walkers per (emotion, view)
        /// cell instead, each at a random view angle and depth.
        per_cell: usize,
        /// Output directory.
        out: PathBuf,
    }
}

settings! {
    AugmentSettings {
        /// Gait file to expand.
        input: PathBuf,
        /// Output directory for the 288 rotated and translated copies.
        out: PathBuf,
    }
}

settings! {
    EmbedSettings {
        /// Gait file or directory of gait files.
        input: PathBuf,
        /// Output directory.
        out: PathBuf,
        /// Image side length in pixels.
        size: usize,
        /// Also write an 8-bit PNG next to each float image.
        #[arg(num_args = 0..=1, default_missing_value = "true")]
        png: bool,
    }
}

settings! {
    TrainSettings {
        /// Directory of labelled gait files.
        data: PathBuf,
        /// Checkpoint to write.
        out: PathBuf,
        /// Per-epoch history CSV (default: next to the checkpoint).
        history: PathBuf,
        epochs: usize,
        batch_size: usize,
        learning_rate: f64,
        /// Input image side length.
        input_size: usize,
        /// Groups of the group convolutions.
        groups: usize,
        /// Seed for initialisation, shuffling and the held-out split.
        seed: u64,
        /// Fraction of each cell used for training; the rest is held out
        /// and scored every epoch. 1 trains on everything.
        train_fraction: f64,
        /// Stop early once an epoch's training accuracy reaches this fraction.
        stop_at: f64,
        /// Reset batch-norm statistics to full-data averages after training.
        #[arg(num_args = 0..=1, default_missing_value = "true")]
        recalibrate: bool,
    }
}

settings! {
    EvalSettings {
        checkpoint: PathBuf,
        /// Directory of labelled gait files.
        data: PathBuf,
        /// Directory for metrics.csv, confusion.csv and summary.txt.
        out: PathBuf,
    }
}

settings! {
    InferSettings {
        checkpoint: PathBuf,
        /// Gait file to classify.
        gait: PathBuf,
    }
}

settings! {
    SimulateSettings {
        /// Scenario TOML file.
        scenario: PathBuf,
        /// Built-in scenario instead of a file: empty, front-approach or back-approach.
        builtin: String,
        /// Pedestrian emotion for built-in scenarios.
        emotion: String,
        /// Emotion source: proxemo (needs --checkpoint), oracle or no-emotion.
        mode: String,
        checkpoint: PathBuf,
        /// Output directory for episode.csv and report.csv.
        out: PathBuf,
        /// Also dump the LIDAR scan and admissible grid seen at this step.
        dump_step: usize,
    }
}

settings! {
    PlotSettings {
        /// Episode CSV to draw as an overhead SVG.
        episode: PathBuf,
        /// Scenario file whose walls are drawn under the episode.
        scenario: PathBuf,
        /// Training history CSV to draw as loss and accuracy curves.
        history: PathBuf,
        /// Float image to export as PNG.
        image: PathBuf,
        /// Output file.
        out: PathBuf,
    }
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub augment: Option<AugmentSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embed: Option<EmbedSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<TrainSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval: Option<EvalSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infer: Option<InferSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot: Option<PlotSettings>,
}

impl ConfigFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("settings serialise to TOML")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_bytes(path, self.to_toml().as_bytes())
    }
}

/// Unwrap a setting that has no default.
pub fn required<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| CliError::Config(format!("--{flag} is required (flag or config file)")))
}
