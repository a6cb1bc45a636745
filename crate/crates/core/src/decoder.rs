//! Distance decoder: the metric `T(y; c)`, its threshold `tau_n` and the
//! yes/no identification test `|T| <= tau_n`.

use serde::{Deserialize, Serialize};

use crate::channel::{check_codeword, check_slot, tap_sum, ChannelParams, OutputVector};
use crate::error::{ensure, Error, Result};
use crate::numeric::pairwise_sum;

/// Above this many slots the metric is accumulated by pairwise summation.
const PAIRWISE_ABOVE: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoderConfig {
    c_const: f64,
    tau_n: f64,
}

impl DecoderConfig {
    /// `tau_n = c rho0^2 theta_n`.
    pub fn new(c_const: f64, rho0: f64, theta_n: f64) -> Result<Self> {
        Ok(Self {
            c_const,
            tau_n: decoding_threshold(theta_n, rho0, c_const)?,
        })
    }

    /// Arbitrary non-negative threshold. `f64::INFINITY` accepts every output.
    pub fn with_threshold(c_const: f64, tau_n: f64) -> Result<Self> {
        check_c(c_const)?;
        ensure(tau_n >= 0.0, "tau_n", tau_n, "must be non-negative")?;
        Ok(Self { c_const, tau_n })
    }

    pub fn c_const(&self) -> f64 {
        self.c_const
    }

    pub fn tau_n(&self) -> f64 {
        self.tau_n
    }
}

fn check_c(c: f64) -> Result<()> {
    ensure(c > 0.0 && c < 2.0, "c", c, "lies in (0, 2)")
}

/// `tau_n = c rho0^2 theta_n`.
pub fn decoding_threshold(theta_n: f64, rho0: f64, c_const: f64) -> Result<f64> {
    ensure(
        theta_n.is_finite() && theta_n > 0.0,
        "theta_n",
        theta_n,
        "must be positive",
    )?;
    ensure(
        rho0.is_finite() && rho0 > 0.0,
        "rho0",
        rho0,
        "must be positive",
    )?;
    check_c(c_const)?;
    Ok(c_const * rho0 * rho0 * theta_n)
}

/// `I_t = lambda + sum_{k>=1} rho_k cw_{t-k}` at zero-based slot `t`.
pub fn isi_interference(cw: &[f64], t: usize, params: &ChannelParams) -> Result<f64> {
    check_slot(t, cw.len(), params)?;
    check_codeword(cw)?;
    Ok(params.lambda() + tap_sum(cw, t, params.rho(), 1))
}

fn check_output(y: &OutputVector, cw: &[f64], params: &ChannelParams) -> Result<()> {
    let expected = params.padded_len(cw.len());
    if y.len() != expected {
        return Err(Error::Dimension {
            what: "output vector",
            expected,
            got: y.len(),
        });
    }
    Ok(())
}

/// Decoding metric of one codeword, with the codeword-dependent parts
/// precomputed so that repeated evaluation costs one pass over `y`.
#[derive(Clone, Debug)]
pub struct MetricEvaluator {
    /// `rho0 c_t + lambda`
    centre: Vec<f64>,
    /// `-(rho0 c_t + I_t) - (I_t - lambda)^2`
    offset: Vec<f64>,
}

impl MetricEvaluator {
    pub fn new(cw: &[f64], params: &ChannelParams) -> Result<Self> {
        check_codeword(cw)?;
        let n_bar = params.padded_len(cw.len());
        let (rho0, lambda) = (params.rho0(), params.lambda());
        let mut centre = Vec::with_capacity(n_bar);
        let mut offset = Vec::with_capacity(n_bar);
        for t in 0..n_bar {
            let ct = cw.get(t).copied().unwrap_or(0.0);
            let isi = lambda + tap_sum(cw, t, params.rho(), 1);
            centre.push(rho0 * ct + lambda);
            offset.push(-(rho0 * ct + isi) - (isi - lambda) * (isi - lambda));
        }
        Ok(Self { centre, offset })
    }

    pub fn len(&self) -> usize {
        self.centre.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centre.is_empty()
    }

    /// `T(y; c)`; `y` must have `n + K - 1` entries.
    pub fn metric(&self, y: &[u64]) -> Result<f64> {
        if y.len() != self.len() {
            return Err(Error::Dimension {
                what: "output vector",
                expected: self.len(),
                got: y.len(),
            });
        }
        Ok(self.metric_unchecked(y))
    }

    pub(crate) fn metric_unchecked(&self, y: &[u64]) -> f64 {
        let term = |t: usize| {
            let dev = y[t] as f64 - self.centre[t];
            dev * dev + self.offset[t]
        };
        let n_bar = self.len();
        let total = if n_bar > PAIRWISE_ABOVE {
            let terms: Vec<f64> = (0..n_bar).map(term).collect();
            pairwise_sum(&terms)
        } else {
            (0..n_bar).map(term).sum()
        };
        total / n_bar as f64
    }
}

/// `T(y; c) = (1/n_bar) sum_t [(y_t - (rho0 c_t + lambda))^2 - (rho0 c_t + I_t) - (I_t - lambda)^2]`
/// over all `n + K - 1` slots.
pub fn decoding_metric(y: &OutputVector, cw: &[f64], params: &ChannelParams) -> Result<f64> {
    check_output(y, cw, params)?;
    Ok(MetricEvaluator::new(cw, params)?.metric_unchecked(y.as_slice()))
}

/// Yes when `|T(y; c)| <= tau_n`.
pub fn identify(
    y: &OutputVector,
    cw: &[f64],
    params: &ChannelParams,
    cfg: &DecoderConfig,
) -> Result<bool> {
    Ok(decoding_metric(y, cw, params)?.abs() <= cfg.tau_n)
}
