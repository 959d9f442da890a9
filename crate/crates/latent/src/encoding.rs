//! Fixed-point binary encoding of feature vectors.
//!
//! Each real value becomes a string of `l = n + m + 1` bits: one sign bit
//! (1 for negative), `n` whole-number bits and `m` fraction bits, both most
//! significant first. Magnitudes are truncated toward zero at resolution
//! `2^-m` and saturate at `2^n - 2^-m`. The per-feature strings are merged
//! into one string of `r·l` bits which is randomized exactly once; the
//! merged string's sensitivity is therefore `r·l`.
//!
//! Values are z-score normalized before encoding so the whole-number part
//! stays small. Normalization statistics are fit once (population standard
//! deviation) and can be persisted as JSON.

use serde::{Deserialize, Serialize};

use crate::bits::{BitString, Builder};

/// Errors from encoding and normalization.
#[derive(Debug, thiserror::Error)]
pub enum EncodingError {
    #[error("bit layout needs at least one magnitude bit (n + m >= 1)")]
    NoMagnitudeBits,
    #[error("bit layout is limited to n + m <= 52 magnitude bits, got {0}")]
    TooManyMagnitudeBits(u32),
    #[error("cannot encode non-finite value {0}")]
    NonFiniteValue(f64),
    #[error("bit string has {found} bits, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("dataset must contain at least two records, got {0}")]
    TooFewRecords(usize),
    #[error("record {record} has {found} features, expected {expected}")]
    RaggedRecord {
        record: usize,
        expected: usize,
        found: usize,
    },
    #[error("feature count mismatch: vector has {found} features, stats have {expected}")]
    FeatureCountMismatch { expected: usize, found: usize },
    #[error("dataset has no features")]
    NoFeatures,
    #[error("failed to read normalization stats: {0}")]
    StatsRead(#[from] std::io::Error),
    #[error("failed to parse normalization stats: {0}")]
    StatsParse(#[from] serde_json::Error),
}

/// Bit layout for one encoded value: `n` whole bits, `m` fraction bits and
/// an implicit sign bit, `l = n + m + 1` bits total.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingSpec {
    whole_bits: u32,
    frac_bits: u32,
}

impl EncodingSpec {
    pub fn new(whole_bits: u32, frac_bits: u32) -> Result<Self, EncodingError> {
        if whole_bits + frac_bits == 0 {
            return Err(EncodingError::NoMagnitudeBits);
        }
        // Magnitudes are staged through an f64 mantissa.
        if whole_bits + frac_bits > 52 {
            return Err(EncodingError::TooManyMagnitudeBits(whole_bits + frac_bits));
        }
        Ok(EncodingSpec {
            whole_bits,
            frac_bits,
        })
    }

    pub fn whole_bits(&self) -> u32 {
        self.whole_bits
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    /// String length `l = n + m + 1`.
    pub fn string_length(&self) -> u32 {
        self.whole_bits + self.frac_bits + 1
    }

    /// Smallest representable magnitude step, `2^-m`.
    pub fn resolution(&self) -> f64 {
        (-(self.frac_bits as f64)).exp2()
    }

    /// Largest representable magnitude, `2^n - 2^-m`.
    pub fn max_magnitude(&self) -> f64 {
        (self.whole_bits as f64).exp2() - self.resolution()
    }
}

/// Sensitivity of a merged string of `r` features: `r·l`.
pub fn sensitivity_of(spec: &EncodingSpec, feature_count: usize) -> u64 {
    feature_count as u64 * spec.string_length() as u64
}

/// Encodes one finite value into `l` bits: sign, whole part (MSB first),
/// fraction (MSB first). Truncates toward zero; saturates out-of-range
/// magnitudes at all-ones.
pub fn encode_value(x: f64, spec: &EncodingSpec) -> Result<BitString, EncodingError> {
    let mut out = Builder::with_capacity(spec.string_length() as usize);
    encode_value_into(x, spec, &mut out)?;
    Ok(out.finish())
}

fn encode_value_into(x: f64, spec: &EncodingSpec, out: &mut Builder) -> Result<(), EncodingError> {
    if !x.is_finite() {
        return Err(EncodingError::NonFiniteValue(x));
    }
    let magnitude_bits = spec.whole_bits + spec.frac_bits;
    let cap = (1u64 << magnitude_bits) - 1;
    let magnitude = x.abs();
    let scaled = if magnitude >= (spec.whole_bits as f64).exp2() {
        cap
    } else {
        // magnitude < 2^n, so the product stays below 2^(n+m) and fits.
        (((magnitude * (spec.frac_bits as f64).exp2()).floor()) as u64).min(cap)
    };
    out.push(x < 0.0);
    for k in (0..magnitude_bits).rev() {
        out.push((scaled >> k) & 1 == 1);
    }
    Ok(())
}

/// Decodes an `l`-bit string back to its value on the `2^-m` grid.
/// A negative-zero pattern decodes to plain 0.0.
pub fn decode_value(bits: &BitString, spec: &EncodingSpec) -> Result<f64, EncodingError> {
    let l = spec.string_length() as usize;
    if bits.len() != l {
        return Err(EncodingError::LengthMismatch {
            expected: l,
            found: bits.len(),
        });
    }
    let mut scaled = 0u64;
    for i in 1..l {
        scaled = (scaled << 1) | u64::from(bits.get(i));
    }
    let magnitude = scaled as f64 * spec.resolution();
    if magnitude == 0.0 {
        return Ok(0.0);
    }
    Ok(if bits.get(0) { -magnitude } else { magnitude })
}

/// A whole feature vector encoded and concatenated: `r·l` payload bits.
#[derive(Clone, Debug, PartialEq)]
pub struct MergedString {
    payload: BitString,
    feature_count: usize,
    spec: EncodingSpec,
}

impl MergedString {
    pub fn payload(&self) -> &BitString {
        &self.payload
    }

    pub fn into_payload(self) -> BitString {
        self.payload
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn spec(&self) -> &EncodingSpec {
        &self.spec
    }

    /// Sensitivity of this merged string, `r·l` (= payload length).
    pub fn sensitivity(&self) -> u64 {
        sensitivity_of(&self.spec, self.feature_count)
    }
}

/// Encodes every element of `values` and concatenates the strings in order.
pub fn encode_vector(values: &[f64], spec: &EncodingSpec) -> Result<MergedString, EncodingError> {
    let mut out = Builder::with_capacity(values.len() * spec.string_length() as usize);
    for &x in values {
        encode_value_into(x, spec, &mut out)?;
    }
    Ok(MergedString {
        payload: out.finish(),
        feature_count: values.len(),
        spec: *spec,
    })
}

/// Per-feature mean and population standard deviation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    features: Vec<FeatureStats>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub mean: f64,
    pub std: f64,
}

impl NormStats {
    pub fn feature_count(&self) -> usize {
        self.features.len()
    }

    pub fn feature(&self, index: usize) -> &FeatureStats {
        &self.features[index]
    }

    /// Z-scores a vector in place order: `(x - mean) / std` per feature.
    pub fn normalize(&self, values: &[f64]) -> Result<Vec<f64>, EncodingError> {
        if values.len() != self.features.len() {
            return Err(EncodingError::FeatureCountMismatch {
                expected: self.features.len(),
                found: values.len(),
            });
        }
        Ok(values
            .iter()
            .zip(&self.features)
            .map(|(x, f)| (x - f.mean) / f.std)
            .collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats serialize")
    }

    pub fn from_json(json: &str) -> Result<Self, EncodingError> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), EncodingError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self, EncodingError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Fits per-feature mean and population standard deviation.
///
/// Zero-variance features get their deviation clamped to 1 with a warning so
/// they normalize to a constant 0 instead of dividing by zero.
pub fn fit_zscore(records: &[Vec<f64>]) -> Result<NormStats, EncodingError> {
    if records.len() < 2 {
        return Err(EncodingError::TooFewRecords(records.len()));
    }
    let width = records[0].len();
    if width == 0 {
        return Err(EncodingError::NoFeatures);
    }
    for (i, r) in records.iter().enumerate() {
        if r.len() != width {
            return Err(EncodingError::RaggedRecord {
                record: i,
                expected: width,
                found: r.len(),
            });
        }
    }

    let n = records.len() as f64;
    let mut features = Vec::with_capacity(width);
    for j in 0..width {
        let mean = records.iter().map(|r| r[j]).sum::<f64>() / n;
        let var = records.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        let std = if std == 0.0 {
            log::warn!("feature {j} has zero variance; clamping std to 1");
            1.0
        } else {
            std
        };
        features.push(FeatureStats { mean, std });
    }
    Ok(NormStats { features })
}
