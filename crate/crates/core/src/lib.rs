//! Deterministic identification over a discrete-time Poisson channel with
//! inter-symbol interference.
//!
//! * [`channel`]: the convolutional Poisson channel, sampling and likelihood.
//! * [`codebook`]: greedy saturated sphere packing in `[0, A]^n`.
//! * [`decoder`]: the distance decoding metric and yes/no test.
//! * [`analysis`]: closed-form capacity, rate and error bounds.
//! * [`montecarlo`]: seeded estimation of type I/II error rates and sweeps.
//! * [`cli`]: the `dtpc-di` command line.

pub mod analysis;
pub mod channel;
pub mod cli;
pub mod codebook;
pub mod decoder;
mod error;
pub mod montecarlo;
pub mod numeric;
mod seed;

pub use channel::{ChannelParams, ChannelSampler, OutputVector};
pub use codebook::{Codebook, GreedyPacker, PackingParams, PackingReport};
pub use decoder::{DecoderConfig, MetricEvaluator};
pub use error::{Error, Result};
pub use seed::SeedStream;
