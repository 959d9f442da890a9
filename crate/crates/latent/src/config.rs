//! Experiment configuration files.
//!
//! TOML with one section per subsystem (`[io]`, `[encoding]`, `[privacy]`,
//! `[conv]`, `[dense]`, `[augment]`); unknown keys are rejected so typos
//! fail fast instead of silently running defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::augment::AugmentParams;
use crate::conv::{ConvConfig, LayerSpec};
use crate::dense::{DenseNetConfig, Optimizer};
use crate::encoding::EncodingSpec;
use crate::ldp::ProtocolKind;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("{0}")]
    Invalid(String),
    #[error("referenced file does not exist: {0}")]
    MissingFile(PathBuf),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub io: IoConfig,
    pub encoding: EncodingSection,
    pub privacy: PrivacySection,
    pub conv: ConvSection,
    pub dense: DenseSection,
    #[serde(default)]
    pub augment: Option<AugmentSection>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoConfig {
    pub train_csv: PathBuf,
    pub test_csv: PathBuf,
    #[serde(default)]
    pub label_column: usize,
    pub image_height: usize,
    pub image_width: usize,
    #[serde(default = "one")]
    pub image_channels: usize,
    pub output_dir: PathBuf,
    /// Optional nearest-neighbor upscale applied before extraction.
    #[serde(default)]
    pub resize_height: Option<usize>,
    #[serde(default)]
    pub resize_width: Option<usize>,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodingSection {
    pub whole_bits: u32,
    pub frac_bits: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrivacySection {
    pub epsilon: f64,
    pub alpha: f64,
    pub protocol: ProtocolKind,
    /// `false` runs the non-private p = 1 override (no randomization).
    #[serde(default = "yes")]
    pub randomize: bool,
    /// Base seed for per-record randomization streams.
    #[serde(default)]
    pub seed: u64,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvSection {
    /// `toy8`, `mnist`, `cifar`, or `custom` (with a `layers` list).
    pub preset: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub layers: Vec<LayerSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenseSection {
    pub hidden: Vec<usize>,
    pub activations: Vec<Activation>,
    #[serde(default)]
    pub dropout: Vec<f64>,
    pub optimizer: String,
    pub learning_rate: f64,
    #[serde(default)]
    pub momentum: f64,
    #[serde(default = "default_beta1")]
    pub beta1: f64,
    #[serde(default = "default_beta2")]
    pub beta2: f64,
    #[serde(default = "default_adam_epsilon")]
    pub adam_epsilon: f64,
    pub batch_size: usize,
    pub epochs: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_beta1() -> f64 {
    0.9
}

fn default_beta2() -> f64 {
    0.999
}

fn default_adam_epsilon() -> f64 {
    1e-8
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentSection {
    #[serde(default)]
    pub max_shift_x: f64,
    #[serde(default)]
    pub max_shift_y: f64,
    #[serde(default)]
    pub max_rotation_degrees: f64,
    #[serde(default)]
    pub horizontal_flip: bool,
    /// Augmented copies generated per training image.
    #[serde(default)]
    pub copies: usize,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self, ConfigError> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|source| ConfigError::Parse {
            path: origin.to_path_buf(),
            source,
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = Self::from_toml_str(&text, path)?;
        // Paths are relative to the config file's directory.
        if let Some(base) = path.parent() {
            config.io.train_csv = resolve(base, &config.io.train_csv);
            config.io.test_csv = resolve(base, &config.io.test_csv);
            config.io.output_dir = resolve(base, &config.io.output_dir);
        }
        Ok(config)
    }

    /// Checks referenced input files exist; run before any work starts.
    pub fn check_files(&self) -> Result<(), ConfigError> {
        for path in [&self.io.train_csv, &self.io.test_csv] {
            if !path.exists() {
                return Err(ConfigError::MissingFile(path.clone()));
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.encoding.whole_bits + self.encoding.frac_bits == 0 {
            return Err(ConfigError::Invalid(
                "encoding needs at least one magnitude bit".into(),
            ));
        }
        if !self.privacy.epsilon.is_finite() || self.privacy.epsilon <= 0.0 {
            return Err(ConfigError::Invalid(format!(
                "privacy.epsilon must be positive, got {}",
                self.privacy.epsilon
            )));
        }
        if !self.privacy.alpha.is_finite() || self.privacy.alpha < 1.0 {
            return Err(ConfigError::Invalid(format!(
                "privacy.alpha must be >= 1, got {}",
                self.privacy.alpha
            )));
        }
        if self.dense.activations.len() != self.dense.hidden.len() {
            return Err(ConfigError::Invalid(format!(
                "dense.activations has {} entries for {} hidden layers",
                self.dense.activations.len(),
                self.dense.hidden.len()
            )));
        }
        if !self.dense.dropout.is_empty() && self.dense.dropout.len() != self.dense.hidden.len() {
            return Err(ConfigError::Invalid(format!(
                "dense.dropout has {} entries for {} hidden layers",
                self.dense.dropout.len(),
                self.dense.hidden.len()
            )));
        }
        match self.conv.preset.as_str() {
            "toy8" | "mnist" | "cifar" => {}
            "custom" => {
                if self.conv.layers.is_empty() {
                    return Err(ConfigError::Invalid(
                        "conv.preset = \"custom\" requires a conv.layers list".into(),
                    ));
                }
            }
            other => {
                return Err(ConfigError::Invalid(format!(
                    "unknown conv preset {other:?} (expected toy8, mnist, cifar, custom)"
                )))
            }
        }
        match self.dense.optimizer.as_str() {
            "sgd" | "adam" | "adadelta" => {}
            other => {
                return Err(ConfigError::Invalid(format!(
                    "unknown optimizer {other:?} (expected sgd, adam, adadelta)"
                )))
            }
        }
        if let Some(augment) = &self.augment {
            self.augment_params_of(augment)
                .validate()
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        Ok(())
    }

    pub fn encoding_spec(&self) -> EncodingSpec {
        EncodingSpec::new(self.encoding.whole_bits, self.encoding.frac_bits)
            .expect("validated encoding section")
    }

    /// Image shape after the optional resize.
    pub fn effective_image_shape(&self) -> (usize, usize, usize) {
        (
            self.io.resize_height.unwrap_or(self.io.image_height),
            self.io.resize_width.unwrap_or(self.io.image_width),
            self.io.image_channels,
        )
    }

    pub fn conv_config(&self) -> ConvConfig {
        let (height, width, channels) = self.effective_image_shape();
        let mut config = match self.conv.preset.as_str() {
            "mnist" => ConvConfig::mnist_baseline(self.conv.seed),
            "cifar" => ConvConfig::cifar_baseline(self.conv.seed),
            "toy8" => ConvConfig::toy8(self.conv.seed),
            _custom => ConvConfig {
                input_height: height,
                input_width: width,
                input_channels: channels,
                layers: self.conv.layers.clone(),
                seed: self.conv.seed,
            },
        };
        config.input_height = height;
        config.input_width = width;
        config.input_channels = channels;
        config
    }

    /// Dense trainer configuration for a given input width and class count.
    /// The `adadelta` setting maps to Adam (with a warning).
    pub fn dense_config(&self, input_len: usize, classes: usize) -> DenseNetConfig {
        let optimizer = match self.dense.optimizer.as_str() {
            "sgd" => Optimizer::Sgd {
                learning_rate: self.dense.learning_rate,
                momentum: self.dense.momentum,
            },
            "adadelta" => {
                log::warn!("optimizer \"adadelta\" is mapped to adam");
                Optimizer::Adam {
                    learning_rate: self.dense.learning_rate,
                    beta1: self.dense.beta1,
                    beta2: self.dense.beta2,
                    epsilon: self.dense.adam_epsilon,
                }
            }
            _adam => Optimizer::Adam {
                learning_rate: self.dense.learning_rate,
                beta1: self.dense.beta1,
                beta2: self.dense.beta2,
                epsilon: self.dense.adam_epsilon,
            },
        };
        let dropout = if self.dense.dropout.is_empty() {
            vec![0.0; self.dense.hidden.len()]
        } else {
            self.dense.dropout.clone()
        };
        DenseNetConfig {
            input_len,
            hidden: self.dense.hidden.clone(),
            hidden_activations: self.dense.activations.clone(),
            classes,
            dropout,
            optimizer,
            batch_size: self.dense.batch_size,
            epochs: self.dense.epochs,
            seed: self.dense.seed,
        }
    }

    fn augment_params_of(&self, section: &AugmentSection) -> AugmentParams {
        AugmentParams {
            max_shift_x: section.max_shift_x,
            max_shift_y: section.max_shift_y,
            max_rotation_degrees: section.max_rotation_degrees,
            horizontal_flip: section.horizontal_flip,
            seed: section.seed,
        }
    }

    /// Augmentation plan: the params plus copies per training image.
    pub fn augment_plan(&self) -> Option<(AugmentParams, usize)> {
        self.augment
            .as_ref()
            .filter(|a| a.copies > 0)
            .map(|a| (self.augment_params_of(a), a.copies))
    }
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

/// A ready-to-edit configuration for the in-repo toy dataset.
pub const TOY_CONFIG_TEMPLATE: &str = r#"[io]
train_csv = "data/toy_train.csv"
test_csv = "data/toy_test.csv"
label_column = 0
image_height = 8
image_width = 8
image_channels = 1
output_dir = "out"

[encoding]
whole_bits = 4
frac_bits = 5

[privacy]
epsilon = 0.5
alpha = 7.0
protocol = "uer"
randomize = true
seed = 99

[conv]
preset = "toy8"
seed = 11

[dense]
hidden = [32]
activations = ["relu"]
dropout = [0.0]
optimizer = "adam"
learning_rate = 0.01
batch_size = 32
epochs = 40
seed = 5
"#;
