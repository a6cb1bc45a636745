//! Discrete-time Poisson channel with `K`-tap inter-symbol interference.
//!
//! A codeword `x` of length `n` produces `n + K - 1` output counts. Slot `t`
//! (zero-based here) is Poisson with mean
//!
//! ```text
//! mu_t = lambda + sum_{k=0}^{K-1} rho_k * x_{t-k}
//! ```
//!
//! where entries of `x` outside `0..n` count as zero. Outputs are
//! conditionally independent given the whole codeword.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::seed::SeedStream;

/// Tap weights, background interference and timing of the channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    rho: Vec<f64>,
    lambda: f64,
    symbol_period: f64,
    cir_duration: f64,
}

impl ChannelParams {
    /// Channel with unit symbol period, so `T_cir = K`.
    pub fn new(rho: Vec<f64>, lambda: f64) -> Result<Self> {
        let k = rho.len() as f64;
        Self::with_timing(rho, lambda, 1.0, k)
    }

    pub fn with_timing(
        rho: Vec<f64>,
        lambda: f64,
        symbol_period: f64,
        cir_duration: f64,
    ) -> Result<Self> {
        if rho.is_empty() {
            return Err(Error::Argument("channel needs at least one tap".into()));
        }
        for &r in &rho {
            ensure(
                r.is_finite() && r > 0.0,
                "rho_k",
                r,
                "tap weights must be positive",
            )?;
        }
        ensure(
            lambda.is_finite() && lambda > 0.0,
            "lambda",
            lambda,
            "must be positive",
        )?;
        ensure(
            symbol_period.is_finite() && symbol_period > 0.0,
            "symbol_period",
            symbol_period,
            "must be positive",
        )?;
        ensure(
            cir_duration.is_finite() && cir_duration > 0.0,
            "cir_duration",
            cir_duration,
            "must be positive",
        )?;
        Ok(Self {
            rho,
            lambda,
            symbol_period,
            cir_duration,
        })
    }

    /// Builds the tap weights `rho_k = p_k * T_s` from per-slot arrival
    /// probabilities `p_k` in `(0, 1]`. The CIR spans `K * T_s`.
    pub fn from_arrival_probabilities(p: &[f64], symbol_period: f64, lambda: f64) -> Result<Self> {
        for &pk in p {
            ensure(
                pk > 0.0 && pk <= 1.0,
                "p_k",
                pk,
                "arrival probabilities lie in (0, 1]",
            )?;
        }
        let rho = p.iter().map(|pk| pk * symbol_period).collect();
        Self::with_timing(rho, lambda, symbol_period, p.len() as f64 * symbol_period)
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn rho0(&self) -> f64 {
        self.rho[0]
    }

    pub fn taps(&self) -> usize {
        self.rho.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn symbol_period(&self) -> f64 {
        self.symbol_period
    }

    pub fn cir_duration(&self) -> f64 {
        self.cir_duration
    }

    /// Output length `n + K - 1` for codewords of length `n`.
    pub fn padded_len(&self, n: usize) -> usize {
        n + self.taps() - 1
    }
}

/// Observed molecule counts, one per output slot.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OutputVector(Vec<u64>);

impl OutputVector {
    pub fn new(counts: Vec<u64>) -> Self {
        Self(counts)
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<u64> {
        self.0
    }
}

impl From<Vec<u64>> for OutputVector {
    fn from(v: Vec<u64>) -> Self {
        Self(v)
    }
}

/// `sum_{k=from}^{K-1} rho_k * x_{t-k}` with zero padding.
pub(crate) fn tap_sum(x: &[f64], t: usize, rho: &[f64], from: usize) -> f64 {
    let mut acc = 0.0;
    for (k, &r) in rho.iter().enumerate().skip(from) {
        if k > t {
            break;
        }
        if let Some(&v) = x.get(t - k) {
            acc += r * v;
        }
    }
    acc
}

pub(crate) fn check_codeword(x: &[f64]) -> Result<()> {
    for &v in x {
        ensure(
            v.is_finite() && v >= 0.0,
            "codeword entry",
            v,
            "must be non-negative",
        )?;
    }
    Ok(())
}

pub(crate) fn check_slot(t: usize, n: usize, params: &ChannelParams) -> Result<()> {
    let len = params.padded_len(n);
    if t >= len {
        return Err(Error::Index {
            what: "output slot",
            index: t,
            len,
        });
    }
    Ok(())
}

/// Mean of output slot `t` (zero-based, `t < n + K - 1`).
pub fn convolved_mean(x: &[f64], t: usize, params: &ChannelParams) -> Result<f64> {
    check_slot(t, x.len(), params)?;
    check_codeword(x)?;
    Ok(params.lambda + tap_sum(x, t, &params.rho, 0))
}

/// Means of all `n + K - 1` output slots.
pub fn convolved_means(x: &[f64], params: &ChannelParams) -> Result<Vec<f64>> {
    check_codeword(x)?;
    Ok(means_unchecked(x, params))
}

pub(crate) fn means_unchecked(x: &[f64], params: &ChannelParams) -> Vec<f64> {
    (0..params.padded_len(x.len()))
        .map(|t| params.lambda + tap_sum(x, t, &params.rho, 0))
        .collect()
}

/// Per-slot Poisson laws for one codeword, prepared once and reused across
/// trials.
#[derive(Clone, Debug)]
pub struct ChannelSampler {
    slots: Vec<Poisson<f64>>,
}

impl ChannelSampler {
    pub fn new(x: &[f64], params: &ChannelParams) -> Result<Self> {
        let slots = convolved_means(x, params)?
            .into_iter()
            .map(|mu| {
                Poisson::new(mu).map_err(|e| Error::Argument(format!("poisson mean {mu}: {e}")))
            })
            .collect::<Result<_>>()?;
        Ok(Self { slots })
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Overwrites `out` with one channel realisation.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<u64>) {
        out.clear();
        out.extend(self.slots.iter().map(|d| d.sample(rng) as u64));
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> OutputVector {
        let mut out = Vec::with_capacity(self.slots.len());
        self.sample_into(rng, &mut out);
        OutputVector(out)
    }
}

/// One channel realisation for codeword `x`, fully determined by `seed`.
pub fn sample_output(x: &[f64], params: &ChannelParams, seed: u64) -> Result<OutputVector> {
    let sampler = ChannelSampler::new(x, params)?;
    Ok(sampler.sample(&mut SeedStream::from(seed).rng(0)))
}

/// Natural-log likelihood `ln V(y | x)` of the whole output vector.
pub fn transition_log_prob(y: &OutputVector, x: &[f64], params: &ChannelParams) -> Result<f64> {
    let expected = params.padded_len(x.len());
    if y.len() != expected {
        return Err(Error::Dimension {
            what: "output vector",
            expected,
            got: y.len(),
        });
    }
    let means = convolved_means(x, params)?;
    Ok(y.as_slice()
        .iter()
        .zip(&means)
        .map(|(&yt, &mu)| {
            let k = yt as f64;
            -mu + k * mu.ln() - libm::lgamma(k + 1.0)
        })
        .sum())
}
