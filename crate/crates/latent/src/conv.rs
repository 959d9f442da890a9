//! Untrained convolutional feature extractor.
//!
//! The extractor maps a raw image tensor to a flat feature vector of length
//! `r` through a fixed chain of valid-padding convolutions, max-pooling and a
//! final flatten. Filters are initialized once from a seed (uniform, scaled
//! by fan-in) and never trained; the whole module is deterministic and
//! reentrant. Dropout does not exist here by construction.

use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::rng::RngStream;

#[derive(Debug, thiserror::Error)]
pub enum ConvError {
    #[error("layer {index}: {reason}")]
    BadLayerChain { index: usize, reason: String },
    #[error("configuration must end with a flatten layer")]
    MissingFlatten,
    #[error("flatten must be the final layer")]
    EarlyFlatten,
    #[error("input shape mismatch: module expects {expected:?}, image is {found:?}")]
    ShapeMismatch {
        expected: (usize, usize, usize),
        found: (usize, usize, usize),
    },
    #[error("loaded filter bank {index} has {found} weights, expected {expected}")]
    FilterSizeMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("expected {expected} filter banks, got {found}")]
    FilterBankCount { expected: usize, found: usize },
}

/// A dense rank-3 tensor in height x width x channels layout.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(height: usize, width: usize, channels: usize) -> Self {
        Tensor3 {
            height,
            width,
            channels,
            data: vec![0.0; height * width * channels],
        }
    }

    pub fn from_flat(
        height: usize,
        width: usize,
        channels: usize,
        data: Vec<f64>,
    ) -> Option<Self> {
        (data.len() == height * width * channels).then_some(Tensor3 {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, c: usize, v: f64) {
        self.data[(y * self.width + x) * self.channels + c] = v;
    }

    /// Row-major (y, x, c) view of the data.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn scale(&self, factor: f64) -> Tensor3 {
        Tensor3 {
            height: self.height,
            width: self.width,
            channels: self.channels,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// Nearest-neighbor resize, used to upscale low-resolution inputs.
    pub fn resize_nearest(&self, new_height: usize, new_width: usize) -> Tensor3 {
        let mut out = Tensor3::zeros(new_height, new_width, self.channels);
        for y in 0..new_height {
            let sy = (y * self.height / new_height).min(self.height - 1);
            for x in 0..new_width {
                let sx = (x * self.width / new_width).min(self.width - 1);
                for c in 0..self.channels {
                    out.set(y, x, c, self.get(sy, sx, c));
                }
            }
        }
        out
    }
}

/// One stage of the extractor chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LayerSpec {
    Conv {
        filters: usize,
        kernel: usize,
        stride: usize,
        activation: Activation,
    },
    /// Non-overlapping max pooling; trailing rows/columns that do not fill a
    /// window are dropped.
    Pool { window: usize },
    Flatten,
}

/// Fixed extractor architecture plus the seed its filters derive from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvConfig {
    pub input_height: usize,
    pub input_width: usize,
    pub input_channels: usize,
    pub layers: Vec<LayerSpec>,
    pub seed: u64,
}

impl ConvConfig {
    /// 28x28 grayscale chain: conv 32@3x3, conv 64@3x3, pool 2; flattens to
    /// 9216 features.
    pub fn mnist_baseline(seed: u64) -> Self {
        ConvConfig {
            input_height: 28,
            input_width: 28,
            input_channels: 1,
            layers: vec![
                LayerSpec::Conv {
                    filters: 32,
                    kernel: 3,
                    stride: 1,
                    activation: Activation::Relu,
                },
                LayerSpec::Conv {
                    filters: 64,
                    kernel: 3,
                    stride: 1,
                    activation: Activation::Relu,
                },
                LayerSpec::Pool { window: 2 },
                LayerSpec::Flatten,
            ],
            seed,
        }
    }

    /// 32x32 RGB chain: conv 32@3x3 twice, pool 2, conv 64@3x3, pool 2;
    /// flattens to 2304 features (9216 when the input is upscaled to 56x56).
    pub fn cifar_baseline(seed: u64) -> Self {
        ConvConfig {
            input_height: 32,
            input_width: 32,
            input_channels: 3,
            layers: vec![
                LayerSpec::Conv {
                    filters: 32,
                    kernel: 3,
                    stride: 1,
                    activation: Activation::Relu,
                },
                LayerSpec::Conv {
                    filters: 32,
                    kernel: 3,
                    stride: 1,
                    activation: Activation::Relu,
                },
                LayerSpec::Pool { window: 2 },
                LayerSpec::Conv {
                    filters: 64,
                    kernel: 3,
                    stride: 1,
                    activation: Activation::Relu,
                },
                LayerSpec::Pool { window: 2 },
                LayerSpec::Flatten,
            ],
            seed,
        }
    }

    /// Small chain for 8x8 toy images: conv 4@3x3, pool 2; 36 features.
    pub fn toy8(seed: u64) -> Self {
        ConvConfig {
            input_height: 8,
            input_width: 8,
            input_channels: 1,
            layers: vec![
                LayerSpec::Conv {
                    filters: 4,
                    kernel: 3,
                    stride: 1,
                    activation: Activation::Relu,
                },
                LayerSpec::Pool { window: 2 },
                LayerSpec::Flatten,
            ],
            seed,
        }
    }

    /// Walks the layer chain, returning the shape after every stage.
    fn shape_chain(&self) -> Result<Vec<(usize, usize, usize)>, ConvError> {
        let mut shapes = vec![(self.input_height, self.input_width, self.input_channels)];
        let mut flattened = false;
        if self.layers.last() != Some(&LayerSpec::Flatten) {
            return Err(ConvError::MissingFlatten);
        }
        for (index, layer) in self.layers.iter().enumerate() {
            if flattened {
                return Err(ConvError::EarlyFlatten);
            }
            let (h, w, c) = *shapes.last().unwrap();
            let next = match *layer {
                LayerSpec::Conv {
                    filters,
                    kernel,
                    stride,
                    ..
                } => {
                    if filters == 0 || kernel == 0 || stride == 0 {
                        return Err(ConvError::BadLayerChain {
                            index,
                            reason: "filters, kernel and stride must be positive".into(),
                        });
                    }
                    if kernel > h || kernel > w {
                        return Err(ConvError::BadLayerChain {
                            index,
                            reason: format!("kernel {kernel} exceeds input {h}x{w}"),
                        });
                    }
                    ((h - kernel) / stride + 1, (w - kernel) / stride + 1, filters)
                }
                LayerSpec::Pool { window } => {
                    if window == 0 || window > h || window > w {
                        return Err(ConvError::BadLayerChain {
                            index,
                            reason: format!("pool window {window} invalid for input {h}x{w}"),
                        });
                    }
                    (h / window, w / window, c)
                }
                LayerSpec::Flatten => {
                    flattened = true;
                    (1, 1, h * w * c)
                }
            };
            shapes.push(next);
        }
        Ok(shapes)
    }

    /// Flattened output length of the configured chain.
    pub fn output_len(&self) -> Result<usize, ConvError> {
        Ok(self.shape_chain()?.last().unwrap().2)
    }
}

/// Weights for one convolution layer, `[filter][in_channel][ky][kx]` order.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterBank {
    pub filters: usize,
    pub in_channels: usize,
    pub kernel: usize,
    pub weights: Vec<f64>,
}

impl FilterBank {
    #[inline]
    fn weight(&self, f: usize, c: usize, ky: usize, kx: usize) -> f64 {
        self.weights[((f * self.in_channels + c) * self.kernel + ky) * self.kernel + kx]
    }
}

/// A built extractor: immutable filters and the advertised output length.
#[derive(Clone, Debug)]
pub struct ConvModule {
    config: ConvConfig,
    banks: Vec<FilterBank>,
    output_len: usize,
}

/// Builds the extractor, seeding one filter bank per convolution layer.
///
/// Weights are uniform in `±1/sqrt(fan_in)` with `fan_in = kernel²·channels`,
/// drawn from a ChaCha stream keyed by the config seed.
pub fn build_conv_module(config: &ConvConfig) -> Result<ConvModule, ConvError> {
    let shapes = config.shape_chain()?;
    let output_len = shapes.last().unwrap().2;
    let mut rng = RngStream::new(config.seed);
    let mut banks = Vec::new();
    for (index, layer) in config.layers.iter().enumerate() {
        if let LayerSpec::Conv {
            filters, kernel, ..
        } = *layer
        {
            let in_channels = shapes[index].2;
            let fan_in = (kernel * kernel * in_channels) as f64;
            let bound = 1.0 / fan_in.sqrt();
            let weights = (0..filters * in_channels * kernel * kernel)
                .map(|_| rng.next_range(-bound, bound))
                .collect();
            banks.push(FilterBank {
                filters,
                in_channels,
                kernel,
                weights,
            });
        }
    }
    Ok(ConvModule {
        config: config.clone(),
        banks,
        output_len,
    })
}

impl ConvModule {
    /// Output feature count `r`.
    pub fn output_len(&self) -> usize {
        self.output_len
    }

    pub fn config(&self) -> &ConvConfig {
        &self.config
    }

    pub fn filter_banks(&self) -> &[FilterBank] {
        &self.banks
    }

    /// Replaces the seeded filters with externally supplied ones, keeping
    /// the configured shapes. The loading hook for pre-computed filters.
    pub fn with_filters(
        config: &ConvConfig,
        banks: Vec<FilterBank>,
    ) -> Result<ConvModule, ConvError> {
        let module = build_conv_module(config)?;
        if banks.len() != module.banks.len() {
            return Err(ConvError::FilterBankCount {
                expected: module.banks.len(),
                found: banks.len(),
            });
        }
        for (index, (loaded, built)) in banks.iter().zip(&module.banks).enumerate() {
            let expected = built.filters * built.in_channels * built.kernel * built.kernel;
            if loaded.filters != built.filters
                || loaded.in_channels != built.in_channels
                || loaded.kernel != built.kernel
                || loaded.weights.len() != expected
            {
                return Err(ConvError::FilterSizeMismatch {
                    index,
                    expected,
                    found: loaded.weights.len(),
                });
            }
        }
        Ok(ConvModule {
            config: config.clone(),
            banks,
            output_len: module.output_len,
        })
    }
}

/// Forward pass: convolutions (valid padding), activations, pooling, then a
/// row-major flatten. Pure and deterministic.
pub fn extract(module: &ConvModule, image: &Tensor3) -> Result<Vec<f64>, ConvError> {
    let expected = (
        module.config.input_height,
        module.config.input_width,
        module.config.input_channels,
    );
    if image.shape() != expected {
        return Err(ConvError::ShapeMismatch {
            expected,
            found: image.shape(),
        });
    }

    let mut current = image.clone();
    let mut bank_idx = 0;
    for layer in &module.config.layers {
        current = match *layer {
            LayerSpec::Conv {
                stride, activation, ..
            } => {
                let bank = &module.banks[bank_idx];
                bank_idx += 1;
                conv_forward(&current, bank, stride, activation)
            }
            LayerSpec::Pool { window } => maxpool_forward(&current, window),
            LayerSpec::Flatten => break,
        };
    }
    Ok(current.as_slice().to_vec())
}

fn conv_forward(
    input: &Tensor3,
    bank: &FilterBank,
    stride: usize,
    activation: Activation,
) -> Tensor3 {
    let (h, w, _) = input.shape();
    let out_h = (h - bank.kernel) / stride + 1;
    let out_w = (w - bank.kernel) / stride + 1;
    let mut out = Tensor3::zeros(out_h, out_w, bank.filters);
    for y in 0..out_h {
        for x in 0..out_w {
            for f in 0..bank.filters {
                let mut acc = 0.0;
                for c in 0..bank.in_channels {
                    for ky in 0..bank.kernel {
                        for kx in 0..bank.kernel {
                            acc += input.get(y * stride + ky, x * stride + kx, c)
                                * bank.weight(f, c, ky, kx);
                        }
                    }
                }
                out.set(y, x, f, activation.apply(acc));
            }
        }
    }
    out
}

fn maxpool_forward(input: &Tensor3, window: usize) -> Tensor3 {
    let (h, w, c) = input.shape();
    let out_h = h / window;
    let out_w = w / window;
    let mut out = Tensor3::zeros(out_h, out_w, c);
    for y in 0..out_h {
        for x in 0..out_w {
            for ch in 0..c {
                let mut best = f64::NEG_INFINITY;
                for dy in 0..window {
                    for dx in 0..window {
                        best = best.max(input.get(y * window + dy, x * window + dx, ch));
                    }
                }
                out.set(y, x, ch, best);
            }
        }
    }
    out
}
