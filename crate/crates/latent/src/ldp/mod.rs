//! Randomized-response protocols over bit strings.
//!
//! Four per-bit perturbation protocols are supported, all derived from the
//! unary-encoding family: plain unary encoding (UE), optimized unary encoding
//! (OUE), its α-parameterized variant (MOUE), and the parity-alternating
//! utility-enhancing randomization (UER). Each protocol is described by the
//! probability of keeping a 1-bit (possibly split by bit-position parity) and
//! the probability of keeping a 0-bit; flip probabilities are the
//! complements.
//!
//! All probabilities are computed through the logistic form `1/(1+e^(-x))`
//! so that large budget/sensitivity ratios saturate instead of overflowing.
//!
//! The auditing entry points live in [`audit`]: a closed-form evaluation of
//! the per-bit ratio patterns and an exhaustive brute-force check of the
//! ε-LDP ratio bound over every input pair and output of a short string.

pub mod audit;

use serde::{Deserialize, Serialize};

use crate::bits::{BitString, Builder};
use crate::rng::RngStream;

/// Errors from privacy-parameter validation and protocol construction.
#[derive(Debug, thiserror::Error)]
pub enum LdpError {
    #[error("privacy budget epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("privacy budget coefficient alpha must be >= 1 and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("sensitivity must be >= 1, got {0}")]
    InvalidSensitivity(u64),
    #[error("UER requires an even sensitivity (equal parity counts), got {0}")]
    OddUerSensitivity(u64),
    #[error("derived probability {value} for {name} is outside (0, 1]")]
    DegenerateProbability { name: &'static str, value: f64 },
    #[error("audit length {0} exceeds the exhaustive-enumeration cap of {max}", max = audit::MAX_AUDIT_LENGTH)]
    AuditLengthTooLarge(usize),
    #[error("audit length must be >= 1")]
    AuditLengthZero,
}

/// Which randomized-response protocol produced a set of probabilities.
///
/// The discriminants are the wire codes used by the session protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolKind {
    Ue = 0,
    Oue = 1,
    Moue = 2,
    Uer = 3,
}

impl ProtocolKind {
    pub fn wire_code(self) -> u8 {
        self as u8
    }

    pub fn from_wire_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(ProtocolKind::Ue),
            1 => Some(ProtocolKind::Oue),
            2 => Some(ProtocolKind::Moue),
            3 => Some(ProtocolKind::Uer),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::Ue => "ue",
            ProtocolKind::Oue => "oue",
            ProtocolKind::Moue => "moue",
            ProtocolKind::Uer => "uer",
        }
    }
}

impl std::str::FromStr for ProtocolKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ue" => Ok(ProtocolKind::Ue),
            "oue" => Ok(ProtocolKind::Oue),
            "moue" => Ok(ProtocolKind::Moue),
            "uer" => Ok(ProtocolKind::Uer),
            other => Err(format!(
                "unknown protocol {other:?} (expected ue, oue, moue, or uer)"
            )),
        }
    }
}

/// Privacy budget ε, budget coefficient α, and sensitivity s.
///
/// Sensitivity is the maximum number of bits by which two adjacent inputs may
/// differ; for a merged string of `r` features at `l` bits each it is `r·l`.
/// Every derived probability uses the exponent `ε/s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    epsilon: f64,
    alpha: f64,
    sensitivity: u64,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, alpha: f64, sensitivity: u64) -> Result<Self, LdpError> {
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(LdpError::InvalidEpsilon(epsilon));
        }
        if !alpha.is_finite() || alpha < 1.0 {
            return Err(LdpError::InvalidAlpha(alpha));
        }
        if sensitivity == 0 {
            return Err(LdpError::InvalidSensitivity(sensitivity));
        }
        Ok(PrivacyParams {
            epsilon,
            alpha,
            sensitivity,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sensitivity(&self) -> u64 {
        self.sensitivity
    }

    /// The per-bit exponent argument ε/s.
    fn budget_per_bit(&self) -> f64 {
        self.epsilon / self.sensitivity as f64
    }
}

/// `1/(1+e^(-x))`, the overflow-safe form of `e^x/(1+e^x)`.
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Probability of transmitting a bit unchanged under the RAPPOR-style
/// symmetric randomizer: `e^(ε/s) / (1 + e^(ε/s))`.
///
/// Strictly above 1/2, increasing in ε, decreasing in the sensitivity `s`.
pub fn rappor_keep_prob(epsilon: f64, sensitivity: u64) -> Result<f64, LdpError> {
    let params = PrivacyParams::new(epsilon, 1.0, sensitivity)?;
    Ok(sigmoid(params.budget_per_bit()))
}

/// Upper bound on the effective privacy budget when both keep probabilities
/// are scaled by α: `ln(α² e^ε) = 2·ln α + ε`.
pub fn ub_epsilon(alpha: f64, epsilon: f64) -> Result<f64, LdpError> {
    let params = PrivacyParams::new(epsilon, alpha, 1)?;
    Ok(2.0 * params.alpha.ln() + params.epsilon)
}

/// Per-bit keep probabilities for one protocol.
///
/// `keep_one_*` is the probability that a 1-bit stays 1 (split by the parity
/// of its 0-based position in the string; only UER distinguishes the two),
/// `keep_zero` is the probability that a 0-bit stays 0. Flips are the
/// complements. Values are validated to lie in `(0, 1]`; exact 1.0 arises
/// only from saturation at extreme budgets or from the explicit
/// no-randomization constructor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolProbs {
    kind: ProtocolKind,
    keep_one_even: f64,
    keep_one_odd: f64,
    keep_zero: f64,
}

impl ProtocolProbs {
    /// Probabilities for `kind` at the budget and sensitivity in `params`.
    ///
    /// UE ignores α; OUE and MOUE ignore parity; UER additionally requires an
    /// even sensitivity so the two parity classes have equal size.
    pub fn for_protocol(kind: ProtocolKind, params: &PrivacyParams) -> Result<Self, LdpError> {
        let t = params.budget_per_bit();
        let a = params.alpha;
        let probs = match kind {
            ProtocolKind::Ue => {
                let keep = sigmoid(t);
                ProtocolProbs {
                    kind,
                    keep_one_even: keep,
                    keep_one_odd: keep,
                    keep_zero: keep,
                }
            }
            ProtocolKind::Oue => ProtocolProbs {
                kind,
                keep_one_even: 0.5,
                keep_one_odd: 0.5,
                keep_zero: sigmoid(t),
            },
            ProtocolKind::Moue => {
                let keep_one = 1.0 / (1.0 + a);
                ProtocolProbs {
                    kind,
                    keep_one_even: keep_one,
                    keep_one_odd: keep_one,
                    keep_zero: sigmoid(t + a.ln()),
                }
            }
            ProtocolKind::Uer => {
                if !params.sensitivity.is_multiple_of(2) {
                    return Err(LdpError::OddUerSensitivity(params.sensitivity));
                }
                ProtocolProbs {
                    kind,
                    keep_one_even: a / (1.0 + a),
                    keep_one_odd: 1.0 / (1.0 + a * a * a),
                    keep_zero: sigmoid(t + a.ln()),
                }
            }
        };
        probs.validated()
    }

    /// Explicit keep probabilities. Used for the non-private `p = 1` override
    /// and for test fixtures; protocol constructors should be preferred.
    pub fn with_keep_probs(
        kind: ProtocolKind,
        keep_one_even: f64,
        keep_one_odd: f64,
        keep_zero: f64,
    ) -> Result<Self, LdpError> {
        ProtocolProbs {
            kind,
            keep_one_even,
            keep_one_odd,
            keep_zero,
        }
        .validated()
    }

    /// Keep probabilities of exactly 1: the identity randomizer.
    pub fn identity(kind: ProtocolKind) -> Self {
        ProtocolProbs {
            kind,
            keep_one_even: 1.0,
            keep_one_odd: 1.0,
            keep_zero: 1.0,
        }
    }

    fn validated(self) -> Result<Self, LdpError> {
        for (name, value) in [
            ("keep_one_even", self.keep_one_even),
            ("keep_one_odd", self.keep_one_odd),
            ("keep_zero", self.keep_zero),
        ] {
            if !value.is_finite() || value <= 0.0 || value > 1.0 {
                return Err(LdpError::DegenerateProbability { name, value });
            }
        }
        Ok(self)
    }

    pub fn kind(&self) -> ProtocolKind {
        self.kind
    }

    /// Keep probability for a 1-bit at 0-based position `index`.
    pub fn keep_one(&self, index: usize) -> f64 {
        if index.is_multiple_of(2) {
            self.keep_one_even
        } else {
            self.keep_one_odd
        }
    }

    pub fn keep_one_even(&self) -> f64 {
        self.keep_one_even
    }

    pub fn keep_one_odd(&self) -> f64 {
        self.keep_one_odd
    }

    pub fn keep_zero(&self) -> f64 {
        self.keep_zero
    }

    /// Probability that a 1-bit at `index` is reported as 0.
    pub fn flip_one_to_zero(&self, index: usize) -> f64 {
        1.0 - self.keep_one(index)
    }

    /// Probability that a 0-bit is reported as 1.
    pub fn flip_zero_to_one(&self) -> f64 {
        1.0 - self.keep_zero
    }

    /// Probability of reporting 1 given the true bit and its position.
    pub fn prob_one_given(&self, bit: bool, index: usize) -> f64 {
        if bit {
            self.keep_one(index)
        } else {
            self.flip_zero_to_one()
        }
    }

    /// True when the two parity classes share one keep-one probability.
    pub fn parity_independent(&self) -> bool {
        self.keep_one_even == self.keep_one_odd
    }
}

/// Plain unary encoding: `p = e^(ε/2)/(1+e^(ε/2))`, `q = 1 - p`.
pub fn ue_probs(epsilon: f64) -> Result<ProtocolProbs, LdpError> {
    let params = PrivacyParams::new(epsilon, 1.0, 2)?;
    ProtocolProbs::for_protocol(ProtocolKind::Ue, &params)
}

/// Optimized unary encoding: `p = 1/2`, `q = 1/(1+e^ε)`.
pub fn oue_probs(epsilon: f64) -> Result<ProtocolProbs, LdpError> {
    let params = PrivacyParams::new(epsilon, 1.0, 1)?;
    ProtocolProbs::for_protocol(ProtocolKind::Oue, &params)
}

/// Modified OUE: keep-one `1/(1+α)`, keep-zero `α·e^(ε/s)/(1+α·e^(ε/s))`.
pub fn moue_probs(params: &PrivacyParams) -> Result<ProtocolProbs, LdpError> {
    ProtocolProbs::for_protocol(ProtocolKind::Moue, params)
}

/// Utility-enhancing randomization: keep-one `α/(1+α)` at even positions and
/// `1/(1+α³)` at odd positions, keep-zero `α·e^(ε/s)/(1+α·e^(ε/s))`.
///
/// The sensitivity must be even so both parity classes are the same size.
pub fn uer_probs(params: &PrivacyParams) -> Result<ProtocolProbs, LdpError> {
    ProtocolProbs::for_protocol(ProtocolKind::Uer, params)
}

/// Randomizes a bit string, one independent draw per position.
///
/// A 1-bit at position `i` is kept with `keep_one(i)`, a 0-bit with
/// `keep_zero`; otherwise the bit is flipped. Output length always equals
/// input length, and a fixed [`RngStream`] makes the result reproducible.
pub fn randomize(bits: &BitString, probs: &ProtocolProbs, rng: &mut RngStream) -> BitString {
    let mut out = Builder::with_capacity(bits.len());
    for (i, bit) in bits.iter().enumerate() {
        let keep = if bit {
            probs.keep_one(i)
        } else {
            probs.keep_zero()
        };
        let kept = rng.next_bool(keep);
        out.push(if kept { bit } else { !bit });
    }
    out.finish()
}
