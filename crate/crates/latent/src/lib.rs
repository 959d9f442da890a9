//! Local differential privacy for split neural-network training.
//!
//! A convolutional network is cut into three pieces: an untrained
//! convolutional feature extractor that runs on the data owner's device, a
//! randomization layer that perturbs a fixed-point binary encoding of the
//! extracted features under a configurable ε-LDP protocol, and a dense
//! classifier trained by an untrusted aggregator on nothing but the
//! randomized bit strings.
//!
//! The crate provides each stage as a library module plus the glue to run
//! them end to end:
//!
//! * [`ldp`] — the UE / OUE / MOUE / UER randomized-response protocols,
//!   their exact probability calculus, bit-string randomization, and two
//!   independent ε-LDP audit routes (closed-form and exhaustive).
//! * [`encoding`] — z-score normalization, sign/whole/fraction fixed-point
//!   encoding, merging into one `r·l`-bit string, and the sensitivity rule.
//! * [`conv`] — the seeded, never-trained convolution + max-pool feature
//!   extractor.
//! * [`dense`] — a from-scratch dense classifier (SGD/momentum or Adam,
//!   inverted dropout, gradient checking, binary checkpoints).
//! * [`augment`] — shift / rotate / flip image augmentation.
//! * [`netsim`] — a TCP client/server simulation in which owners randomize
//!   locally and stream records to the aggregator over a length-prefixed
//!   frame protocol.
//! * [`pipeline`] — end-to-end runs, ε/α sweeps, latency benchmarks, and
//!   protocol audit reports.
//!
//! The `latent` binary exposes the same functionality as subcommands;
//! the `examples/` directory walks each capability in isolation.
//!
//! # Example
//!
//! Randomize a feature vector the way a data owner would:
//!
//! ```
//! use latent::encoding::{encode_vector, EncodingSpec};
//! use latent::ldp::{uer_probs, randomize, PrivacyParams};
//! use latent::rng::RngStream;
//!
//! let spec = EncodingSpec::new(4, 5).unwrap();
//! let merged = encode_vector(&[-1.40625, 2.5], &spec).unwrap();
//! let params = PrivacyParams::new(0.5, 7.0, merged.sensitivity()).unwrap();
//! let probs = uer_probs(&params).unwrap();
//! let mut rng = RngStream::for_record(99, 0);
//! let randomized = randomize(merged.payload(), &probs, &mut rng);
//! assert_eq!(randomized.len(), merged.payload().len());
//! ```

pub mod activation;
pub mod augment;
pub mod bits;
pub mod config;
pub mod conv;
pub mod dataset;
pub mod dense;
pub mod encoding;
pub mod ldp;
pub mod netsim;
pub mod pipeline;
pub mod rng;

pub use activation::Activation;
pub use bits::BitString;
pub use rng::RngStream;
