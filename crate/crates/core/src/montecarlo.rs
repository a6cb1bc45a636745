//! Seeded Monte Carlo estimation of identification errors and of the moments
//! of the decoding metric, plus the `n`-sweep behind the `simulate` command.
//!
//! Trial `k` of an estimate always draws from `SeedStream::new(seed, cell).rng(k)`,
//! and trials are grouped into fixed-size chunks reduced in index order, so
//! results do not depend on how many threads run them.

use std::fmt::Write as _;

use rand::seq::index::sample as sample_indices;
use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{type1_error_bound, type2_event_bounds, ErrorBoundParams};
use crate::channel::{ChannelParams, ChannelSampler};
use crate::codebook::{admissible_amplitude, Codebook, GreedyPacker, PackingParams};
use crate::decoder::{DecoderConfig, MetricEvaluator};
use crate::error::{ensure, Error, Result};
use crate::numeric::{fmt17, wilson_interval, Z95};
use crate::seed::SeedStream;

pub const MIN_TRIALS: u64 = 100;
pub const SCHEMA: &str = "dtpc-di-sweep/1";
const CHUNK: u64 = 1024;

/// One binomial error-rate estimate with its Wilson 95% interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub p_hat: f64,
    pub failures: u64,
    pub trials: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Chebyshev companion bound, unclamped.
    pub analytic_bound: f64,
}

impl ErrorEstimate {
    fn new(failures: u64, trials: u64, analytic_bound: f64) -> Self {
        let (ci_low, ci_high) = wilson_interval(failures, trials, Z95);
        Self {
            p_hat: failures as f64 / trials as f64,
            failures,
            trials,
            ci_low,
            ci_high,
            analytic_bound,
        }
    }

    /// `min(1, analytic_bound)`.
    pub fn clamped_bound(&self) -> f64 {
        self.analytic_bound.min(1.0)
    }

    /// The estimate is compatible with its bound: the interval reaches below
    /// `min(1, bound)`.
    pub fn dominated(&self) -> bool {
        self.ci_low <= self.clamped_bound()
    }
}

/// Error-bound parameters implied by a codebook, channel and decoder.
pub fn bound_params(
    cb: &Codebook,
    channel: &ChannelParams,
    cfg: &DecoderConfig,
) -> ErrorBoundParams {
    let p = cb.params();
    ErrorBoundParams {
        n: p.n(),
        kappa: p.kappa(),
        a: p.a(),
        b: p.b(),
        c_const: cfg.c_const(),
        rho0: channel.rho0(),
        amplitude: p.amplitude(),
        lambda: channel.lambda(),
    }
}

fn check_trials(trials: u64) -> Result<()> {
    ensure(trials >= 1, "trials", trials as f64, "must be positive")
}

/// Counts trials where `reject(|T(Y(i); c_j)| > tau)` differs from `accept_counts`.
/// Returns the number of trials whose output lies inside the region of `j`.
fn count_accepts(
    cb: &Codebook,
    i: usize,
    j: usize,
    channel: &ChannelParams,
    tau: f64,
    trials: u64,
    stream: SeedStream,
) -> Result<u64> {
    let sampler = ChannelSampler::new(cb.codeword(i)?, channel)?;
    let eval = MetricEvaluator::new(cb.codeword(j)?, channel)?;
    let chunks = trials.div_ceil(CHUNK);
    Ok((0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut y = Vec::with_capacity(sampler.len());
            let end = ((chunk + 1) * CHUNK).min(trials);
            let mut hits = 0u64;
            for k in chunk * CHUNK..end {
                sampler.sample_into(&mut stream.rng(k), &mut y);
                if eval.metric_unchecked(&y).abs() <= tau {
                    hits += 1;
                }
            }
            hits
        })
        .sum())
}

pub(crate) fn type1_in(
    cb: &Codebook,
    i: usize,
    channel: &ChannelParams,
    cfg: &DecoderConfig,
    trials: u64,
    stream: SeedStream,
) -> Result<ErrorEstimate> {
    check_trials(trials)?;
    let accepts = count_accepts(cb, i, i, channel, cfg.tau_n(), trials, stream)?;
    let bound = type1_error_bound(&bound_params(cb, channel, cfg))?;
    Ok(ErrorEstimate::new(trials - accepts, trials, bound))
}

/// Type-II estimate without the `i != j` guard.
pub(crate) fn type2_in(
    cb: &Codebook,
    i: usize,
    j: usize,
    channel: &ChannelParams,
    cfg: &DecoderConfig,
    trials: u64,
    stream: SeedStream,
) -> Result<ErrorEstimate> {
    check_trials(trials)?;
    let accepts = count_accepts(cb, i, j, channel, cfg.tau_n(), trials, stream)?;
    let (e0, e1) = type2_event_bounds(&bound_params(cb, channel, cfg))?;
    Ok(ErrorEstimate::new(accepts, trials, e0 + e1))
}

/// Fraction of trials where the true message `i` is rejected.
pub fn estimate_type1(
    cb: &Codebook,
    i: usize,
    channel: &ChannelParams,
    cfg: &DecoderConfig,
    trials: u64,
    seed: u64,
) -> Result<ErrorEstimate> {
    type1_in(cb, i, channel, cfg, trials, SeedStream::from(seed))
}

/// Fraction of trials where message `j` is accepted although `i` was sent.
pub fn estimate_type2(
    cb: &Codebook,
    i: usize,
    j: usize,
    channel: &ChannelParams,
    cfg: &DecoderConfig,
    trials: u64,
    seed: u64,
) -> Result<ErrorEstimate> {
    if i == j {
        return Err(Error::Argument(format!(
            "type-II error needs distinct messages, got i = j = {i}"
        )));
    }
    type2_in(cb, i, j, channel, cfg, trials, SeedStream::from(seed))
}

/// Sample moments of `T(Y(i); c_i)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricMoments {
    pub trials: u64,
    pub mean: f64,
    /// Unbiased sample variance.
    pub var: f64,
    pub se_mean: f64,
    /// Standard error of `var`, from the fourth central moment.
    pub var_se: f64,
}

pub fn estimate_metric_moments(
    cb: &Codebook,
    i: usize,
    channel: &ChannelParams,
    trials: u64,
    seed: u64,
) -> Result<MetricMoments> {
    ensure(
        trials >= 2,
        "trials",
        trials as f64,
        "need at least 2 for a variance",
    )?;
    let cw = cb.codeword(i)?;
    let sampler = ChannelSampler::new(cw, channel)?;
    let eval = MetricEvaluator::new(cw, channel)?;
    let stream = SeedStream::from(seed);
    let chunks: Vec<Vec<f64>> = (0..trials.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let mut y = Vec::with_capacity(sampler.len());
            let end = ((chunk + 1) * CHUNK).min(trials);
            (chunk * CHUNK..end)
                .map(|k| {
                    sampler.sample_into(&mut stream.rng(k), &mut y);
                    eval.metric_unchecked(&y)
                })
                .collect()
        })
        .collect();
    let values: Vec<f64> = chunks.concat();
    Ok(moments(&values))
}

fn moments(values: &[f64]) -> MetricMoments {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut m2, mut m4) = (0.0, 0.0);
    for &v in values {
        let d = (v - mean) * (v - mean);
        m2 += d;
        m4 += d * d;
    }
    let var = m2 / (n - 1.0);
    let (pop2, pop4) = (m2 / n, m4 / n);
    MetricMoments {
        trials: values.len() as u64,
        mean,
        var,
        se_mean: (var / n).sqrt(),
        var_se: ((pop4 - pop2 * pop2).max(0.0) / n).sqrt(),
    }
}

/// How the tap profile scales with `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TapSpec {
    /// The same taps at every `n`; the ISI rate is `ln K / ln n`.
    Fixed { rho: Vec<f64> },
    /// `K = round(n^kappa)` taps `rho_k = rho0 decay^k`.
    Geometric { kappa: f64, rho0: f64, decay: f64 },
}

impl TapSpec {
    pub fn rho_for(&self, n: usize) -> Vec<f64> {
        match self {
            Self::Fixed { rho } => rho.clone(),
            Self::Geometric { kappa, rho0, decay } => {
                let k = crate::analysis::taps_for(n, *kappa);
                (0..k).map(|i| rho0 * decay.powi(i as i32)).collect()
            }
        }
    }

    fn packing(&self, n: usize, amplitude: f64, a: f64, b: f64) -> Result<PackingParams> {
        match self {
            Self::Fixed { rho } => PackingParams::for_taps(n, amplitude, a, b, rho.len()),
            Self::Geometric { kappa, .. } => PackingParams::new(n, amplitude, a, b, *kappa),
        }
    }
}

/// Full description of a sweep over codeword lengths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub n_grid: Vec<usize>,
    pub taps: TapSpec,
    pub lambda: f64,
    pub p_ave: f64,
    pub p_max: f64,
    pub a: f64,
    pub b: f64,
    pub c_const: f64,
    pub trials: u64,
    pub base_seed: u64,
    /// Random ordered pairs per `n` for type II; the closest pair is added.
    pub pair_budget: usize,
    /// Messages per `n` for type I.
    pub message_budget: usize,
    /// Upper limit on codebook size; `None` packs to saturation.
    pub max_codewords: Option<usize>,
    pub max_rejections: u64,
}

impl ExperimentSpec {
    /// The shipped demonstration sweep.
    pub fn demo() -> Self {
        Self {
            n_grid: vec![32, 64, 128, 256],
            taps: TapSpec::Fixed {
                rho: vec![0.8, 0.2],
            },
            lambda: 0.5,
            p_ave: 8.0,
            p_max: 8.0,
            a: 4.0,
            b: 0.3,
            c_const: 1.0,
            trials: 10_000,
            base_seed: 2024,
            pair_budget: 32,
            message_budget: 8,
            max_codewords: Some(256),
            max_rejections: 10_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(
            self.trials >= MIN_TRIALS,
            "trials",
            self.trials as f64,
            "must be at least 100",
        )?;
        ensure(
            self.pair_budget >= 1,
            "pair_budget",
            self.pair_budget as f64,
            "must be at least 1",
        )?;
        ensure(
            self.message_budget >= 1,
            "message_budget",
            self.message_budget as f64,
            "must be at least 1",
        )?;
        ensure(
            self.max_rejections >= 1,
            "max_rejections",
            self.max_rejections as f64,
            "must be at least 1",
        )?;
        if self.max_codewords == Some(0) {
            return Err(crate::error::domain(
                "max_codewords",
                0.0,
                "must be at least 1",
            ));
        }
        admissible_amplitude(self.p_ave, self.p_max)?;
        ensure(
            self.c_const > 0.0 && self.c_const < 2.0,
            "c_const",
            self.c_const,
            "lies in (0, 2)",
        )?;
        match &self.taps {
            TapSpec::Fixed { rho } => {
                ChannelParams::new(rho.clone(), self.lambda)?;
            }
            TapSpec::Geometric { kappa, rho0, decay } => {
                ensure(
                    (0.0..1.0).contains(kappa),
                    "kappa",
                    *kappa,
                    "ISI rate lies in [0, 1)",
                )?;
                ensure(*rho0 > 0.0, "rho0", *rho0, "must be positive")?;
                ensure(*decay > 0.0, "decay", *decay, "must be positive")?;
                ChannelParams::new(vec![*rho0], self.lambda)?;
            }
        }
        for &n in &self.n_grid {
            self.taps.packing(n, 1.0, self.a, self.b)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKind {
    Type1,
    Type2,
}

impl EstimateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Type1 => "type1",
            Self::Type2 => "type2",
        }
    }
}

/// Headline figure for one `(n, kind)`: the maximum over sampled messages
/// or pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub taps: usize,
    pub kappa: f64,
    pub m: usize,
    pub r0: f64,
    pub tau_n: f64,
    pub kind: EstimateKind,
    /// Messages or pairs estimated.
    pub cells: usize,
    pub estimate: Option<ErrorEstimate>,
    /// Message index, or sender of the pair, attaining the maximum.
    pub argmax_i: Option<usize>,
    pub argmax_j: Option<usize>,
    pub dominance: bool,
    pub status: String,
}

/// One message (type I) or ordered pair (type II).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetailRow {
    pub n: usize,
    pub kind: EstimateKind,
    pub i: usize,
    pub j: usize,
    pub closest: bool,
    pub cell: u64,
    pub estimate: ErrorEstimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub schema: String,
    pub version: String,
    pub spec: ExperimentSpec,
    pub rows: Vec<SweepRow>,
    pub details: Vec<DetailRow>,
}

pub const SWEEP_COLUMNS: [&str; 19] = [
    "n",
    "taps",
    "kappa",
    "m",
    "r0",
    "tau_n",
    "kind",
    "cells",
    "p_hat",
    "failures",
    "trials",
    "ci_low",
    "ci_high",
    "bound",
    "bound_clamped",
    "argmax_i",
    "argmax_j",
    "dominance",
    "status",
];

pub const DETAIL_COLUMNS: [&str; 13] = [
    "n",
    "kind",
    "i",
    "j",
    "closest",
    "cell",
    "p_hat",
    "failures",
    "trials",
    "ci_low",
    "ci_high",
    "bound",
    "dominance",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl ResultTable {
    pub fn rows_of(&self, kind: EstimateKind) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.kind == kind)
    }

    /// Headline estimates never increase with `n` beyond what the 95%
    /// intervals allow: each interval starts no higher than the previous
    /// one ends.
    pub fn non_increasing(&self, kind: EstimateKind) -> bool {
        let ests: Vec<&ErrorEstimate> = self
            .rows_of(kind)
            .filter_map(|r| r.estimate.as_ref())
            .collect();
        ests.windows(2).all(|w| w[1].ci_low <= w[0].ci_high)
    }

    pub fn all_dominated(&self) -> bool {
        self.rows.iter().all(|r| r.dominance) && self.details.iter().all(|d| d.estimate.dominated())
    }

    /// Cells that produced no estimate.
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.estimate.is_none()).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("#schema={SCHEMA}\n{}\n", SWEEP_COLUMNS.join(","));
        for r in &self.rows {
            let e = r.estimate.as_ref();
            let num = |f: fn(&ErrorEstimate) -> f64| e.map(|e| fmt17(f(e))).unwrap_or_default();
            let cols = [
                r.n.to_string(),
                r.taps.to_string(),
                fmt17(r.kappa),
                r.m.to_string(),
                fmt17(r.r0),
                fmt17(r.tau_n),
                r.kind.as_str().into(),
                r.cells.to_string(),
                num(|e| e.p_hat),
                opt(e.map(|e| e.failures)),
                opt(e.map(|e| e.trials)),
                num(|e| e.ci_low),
                num(|e| e.ci_high),
                num(|e| e.analytic_bound),
                num(|e| e.clamped_bound()),
                opt(r.argmax_i),
                opt(r.argmax_j),
                r.dominance.to_string(),
                csv_field(&r.status),
            ];
            let _ = writeln!(out, "{}", cols.join(","));
        }
        out
    }

    pub fn details_csv(&self) -> String {
        let mut out = format!("#schema={SCHEMA}\n{}\n", DETAIL_COLUMNS.join(","));
        for d in &self.details {
            let e = &d.estimate;
            let cols = [
                d.n.to_string(),
                d.kind.as_str().into(),
                d.i.to_string(),
                d.j.to_string(),
                d.closest.to_string(),
                d.cell.to_string(),
                fmt17(e.p_hat),
                e.failures.to_string(),
                e.trials.to_string(),
                fmt17(e.ci_low),
                fmt17(e.ci_high),
                fmt17(e.analytic_bound),
                e.dominated().to_string(),
            ];
            let _ = writeln!(out, "{}", cols.join(","));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result table serialises")
    }
}

/// Seed cells per `n`: codebook, selection, then one per estimate.
const CELLS_PER_N: u64 = 1 << 32;
const CODEBOOK_CELL: u64 = 0;
const SELECTION_CELL: u64 = 1;
const FIRST_ESTIMATE_CELL: u64 = 2;

struct Prepared {
    channel: ChannelParams,
    cb: Codebook,
    cfg: DecoderConfig,
}

fn prepare(spec: &ExperimentSpec, n_index: usize, n: usize) -> Result<Prepared> {
    let amplitude = admissible_amplitude(spec.p_ave, spec.p_max)?;
    let channel = ChannelParams::new(spec.taps.rho_for(n), spec.lambda)?;
    let packing = spec.taps.packing(n, amplitude, spec.a, spec.b)?;
    let cb_seed = SeedStream::new(spec.base_seed, n_index as u64 * CELLS_PER_N + CODEBOOK_CELL)
        .rng(0)
        .next_u64();
    let mut packer = GreedyPacker::new(packing.clone()).max_rejections(spec.max_rejections);
    if let Some(cap) = spec.max_codewords {
        packer = packer.max_codewords(cap);
    }
    let cb = packer.build(cb_seed)?;
    let cfg = DecoderConfig::new(spec.c_const, channel.rho0(), packing.theta_n())?;
    Ok(Prepared { channel, cb, cfg })
}

/// Distinct messages for type I, and ordered pairs `(i, j)` with `i != j`
/// for type II. The closest pair comes last and is flagged.
fn select(
    spec: &ExperimentSpec,
    m: usize,
    stream: SeedStream,
) -> (Vec<usize>, Vec<(usize, usize)>) {
    let mut rng = stream.rng(0);
    let mut messages = sample_indices(&mut rng, m, spec.message_budget.min(m)).into_vec();
    messages.sort_unstable();
    let mut pairs = Vec::new();
    if m >= 2 {
        for _ in 0..spec.pair_budget {
            let i = rng.random_range(0..m);
            let mut j = rng.random_range(0..m - 1);
            if j >= i {
                j += 1;
            }
            pairs.push((i, j));
        }
    }
    (messages, pairs)
}

fn headline(n: usize, prep: &Prepared, kind: EstimateKind, details: &[DetailRow]) -> SweepRow {
    let p = prep.cb.params();
    let best =
        details
            .iter()
            .filter(|d| d.kind == kind)
            .fold(None::<&DetailRow>, |acc, d| match acc {
                Some(b) if b.estimate.p_hat >= d.estimate.p_hat => Some(b),
                _ => Some(d),
            });
    let cells = details.iter().filter(|d| d.kind == kind).count();
    let status = match (best, kind) {
        (Some(_), _) => "ok".to_string(),
        (None, EstimateKind::Type2) => "no pairs: codebook has a single codeword".to_string(),
        (None, EstimateKind::Type1) => "no messages estimated".to_string(),
    };
    SweepRow {
        n,
        taps: prep.channel.taps(),
        kappa: p.kappa(),
        m: prep.cb.len(),
        r0: p.r0(),
        tau_n: prep.cfg.tau_n(),
        kind,
        cells,
        estimate: best.map(|d| d.estimate),
        argmax_i: best.map(|d| d.i),
        argmax_j: best.filter(|_| kind == EstimateKind::Type2).map(|d| d.j),
        dominance: details
            .iter()
            .filter(|d| d.kind == kind)
            .all(|d| d.estimate.dominated()),
        status,
    }
}

fn error_row(n: usize, kind: EstimateKind, e: &Error) -> SweepRow {
    SweepRow {
        n,
        taps: 0,
        kappa: f64::NAN,
        m: 0,
        r0: f64::NAN,
        tau_n: f64::NAN,
        kind,
        cells: 0,
        estimate: None,
        argmax_i: None,
        argmax_j: None,
        dominance: false,
        status: format!("error: {e}"),
    }
}

fn sweep_one(
    spec: &ExperimentSpec,
    n_index: usize,
    n: usize,
) -> Result<(Prepared, Vec<DetailRow>)> {
    let prep = prepare(spec, n_index, n)?;
    let base_cell = n_index as u64 * CELLS_PER_N;
    let (messages, mut pairs) = select(
        spec,
        prep.cb.len(),
        SeedStream::new(spec.base_seed, base_cell + SELECTION_CELL),
    );
    let closest = prep.cb.closest_pair().map(|(i, j, _)| (i, j));
    let random_pairs = pairs.len();
    pairs.extend(closest);

    let mut cell = base_cell + FIRST_ESTIMATE_CELL;
    let mut details = Vec::with_capacity(messages.len() + pairs.len());
    for &i in &messages {
        let stream = SeedStream::new(spec.base_seed, cell);
        let estimate = type1_in(&prep.cb, i, &prep.channel, &prep.cfg, spec.trials, stream)?;
        details.push(DetailRow {
            n,
            kind: EstimateKind::Type1,
            i,
            j: i,
            closest: false,
            cell,
            estimate,
        });
        cell += 1;
    }
    for (k, &(i, j)) in pairs.iter().enumerate() {
        let stream = SeedStream::new(spec.base_seed, cell);
        let estimate = type2_in(
            &prep.cb,
            i,
            j,
            &prep.channel,
            &prep.cfg,
            spec.trials,
            stream,
        )?;
        details.push(DetailRow {
            n,
            kind: EstimateKind::Type2,
            i,
            j,
            closest: k >= random_pairs,
            cell,
            estimate,
        });
        cell += 1;
    }
    Ok((prep, details))
}

/// Runs the sweep. A failing `n` is reported in its rows and does not stop
/// the others; only an invalid spec is an error.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let mut rows = Vec::new();
    let mut details = Vec::new();
    for (n_index, &n) in spec.n_grid.iter().enumerate() {
        match sweep_one(spec, n_index, n) {
            Ok((prep, d)) => {
                rows.push(headline(n, &prep, EstimateKind::Type1, &d));
                rows.push(headline(n, &prep, EstimateKind::Type2, &d));
                details.extend(d);
            }
            Err(e) => {
                rows.push(error_row(n, EstimateKind::Type1, &e));
                rows.push(error_row(n, EstimateKind::Type2, &e));
            }
        }
    }
    Ok(ResultTable {
        schema: SCHEMA.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        spec: spec.clone(),
        rows,
        details,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn book(codewords: Vec<Vec<f64>>, a: f64) -> Codebook {
        let n = codewords[0].len();
        let p = PackingParams::new(n, 10.0, a, 0.3, 0.0).unwrap();
        Codebook::from_codewords(codewords, p, 0).unwrap()
    }

    #[test]
    fn infinite_threshold_never_rejects() {
        let cb = book(vec![vec![1.0, 2.0, 0.5]], 1.0);
        let ch = ChannelParams::new(vec![0.9, 0.3], 0.5).unwrap();
        let cfg = DecoderConfig::with_threshold(1.0, f64::INFINITY).unwrap();
        let e = estimate_type1(&cb, 0, &ch, &cfg, 2000, 1).unwrap();
        assert_eq!(e.failures, 0);
        assert_eq!(e.p_hat, 0.0);
        assert!(e.ci_low <= e.p_hat && e.p_hat <= e.ci_high);
    }

    #[test]
    fn zero_threshold_almost_always_rejects() {
        let cb = book(vec![vec![1.3, 2.7, 0.4, 3.1]], 1.0);
        let ch = ChannelParams::new(vec![0.9, 0.3], 0.55).unwrap();
        let cfg = DecoderConfig::with_threshold(1.0, 0.0).unwrap();
        let e = estimate_type1(&cb, 0, &ch, &cfg, 2000, 1).unwrap();
        assert!(e.p_hat > 0.99, "{}", e.p_hat);
    }

    #[test]
    fn guards() {
        let cb = book(vec![vec![1.0], vec![5.0]], 1.0);
        let ch = ChannelParams::new(vec![1.0], 0.5).unwrap();
        let cfg = DecoderConfig::with_threshold(1.0, 1.0).unwrap();
        assert!(matches!(
            estimate_type2(&cb, 1, 1, &ch, &cfg, 100, 0),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            estimate_type1(&cb, 2, &ch, &cfg, 100, 0),
            Err(Error::Index { .. })
        ));
        assert!(estimate_type1(&cb, 0, &ch, &cfg, 0, 0).is_err());
    }

    #[test]
    fn forced_identical_pair_is_complementary() {
        let cb = book(vec![vec![2.0, 1.0, 3.0]], 1.0);
        let ch = ChannelParams::new(vec![0.7, 0.4], 0.8).unwrap();
        let cfg = DecoderConfig::with_threshold(1.0, 0.9).unwrap();
        for seed in 0..5 {
            let s = SeedStream::from(seed);
            let t1 = type1_in(&cb, 0, &ch, &cfg, 3000, s).unwrap();
            let t2 = type2_in(&cb, 0, 0, &ch, &cfg, 3000, s).unwrap();
            assert_eq!(t1.failures + t2.failures, 3000);
            assert_eq!(t1.p_hat + t2.p_hat, 1.0);
        }
    }

    #[test]
    fn far_pair_is_rarely_confused() {
        let n = 16;
        let cb = book(vec![vec![0.0; n], vec![9.0; n]], 1.0);
        let ch = ChannelParams::new(vec![1.0, 0.2], 0.1).unwrap();
        let cfg = DecoderConfig::new(1.0, 1.0, cb.params().theta_n()).unwrap();
        let e = estimate_type2(&cb, 0, 1, &ch, &cfg, 5000, 3).unwrap();
        assert!(e.p_hat < 0.01, "{}", e.p_hat);
        let e = estimate_type2(&cb, 1, 0, &ch, &cfg, 5000, 3).unwrap();
        assert!(e.p_hat < 0.01, "{}", e.p_hat);
    }

    #[test]
    fn moments_match_exact_oracle_for_poisson_one() {
        // K = 1, lambda = 1, zero codeword: T = (1/n) sum [(Y_t - 1)^2 - 1],
        // so Var T = Var[(Y - 1)^2] / n = 3 / n for Y ~ Pois(1).
        let n = 4;
        let cb = book(vec![vec![0.0; n]], 1.0);
        let ch = ChannelParams::new(vec![1.0], 1.0).unwrap();
        let m = estimate_metric_moments(&cb, 0, &ch, 100_000, 5).unwrap();
        let exact = exact_var_sq_dev(1.0) / n as f64;
        assert_abs_diff_eq!(exact, 0.75, epsilon = 1e-12);
        assert!(m.mean.abs() <= 5.0 * m.se_mean, "{m:?}");
        assert!((m.var - exact).abs() <= 5.0 * m.var_se, "{m:?}");
    }

    /// `Var[(Y - mu)^2]` for `Y ~ Pois(mu)` by summing the pmf to `y <= 60`.
    fn exact_var_sq_dev(mu: f64) -> f64 {
        let mut pmf = (-mu).exp();
        let (mut m2, mut m4) = (0.0, 0.0);
        for y in 0..=60 {
            if y > 0 {
                pmf *= mu / y as f64;
            }
            let d = (y as f64 - mu).powi(2);
            m2 += pmf * d;
            m4 += pmf * d * d;
        }
        m4 - m2 * m2
    }

    #[test]
    fn empty_grid_gives_empty_table() {
        let spec = ExperimentSpec {
            n_grid: vec![],
            ..ExperimentSpec::demo()
        };
        let t = run_sweep(&spec).unwrap();
        assert!(t.rows.is_empty() && t.details.is_empty());
        assert_eq!(t.to_csv().lines().count(), 2);
    }

    #[test]
    fn small_sweep_is_reproducible() {
        let spec = ExperimentSpec {
            n_grid: vec![8, 16],
            trials: 300,
            pair_budget: 3,
            message_budget: 2,
            max_codewords: Some(20),
            ..ExperimentSpec::demo()
        };
        let a = run_sweep(&spec).unwrap();
        let b = run_sweep(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.rows.len(), 4);
        assert_eq!(a.details.len(), 2 * (2 + 3 + 1));
        assert!(a
            .details
            .iter()
            .all(|d| d.kind == EstimateKind::Type1 || d.i != d.j));
        let cells: std::collections::BTreeSet<u64> = a.details.iter().map(|d| d.cell).collect();
        assert_eq!(cells.len(), a.details.len());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut s = ExperimentSpec::demo();
        s.trials = 0;
        assert!(run_sweep(&s).is_err());
        let mut s = ExperimentSpec::demo();
        s.pair_budget = 0;
        assert!(s.validate().is_err());
        let mut s = ExperimentSpec::demo();
        s.c_const = 2.0;
        assert!(s.validate().is_err());
        let mut s = ExperimentSpec::demo();
        s.n_grid = vec![2];
        s.taps = TapSpec::Fixed { rho: vec![0.5; 4] };
        assert!(s.validate().is_err());
    }
}
